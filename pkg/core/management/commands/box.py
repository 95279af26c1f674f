from django.conf import settings
from django.core.exceptions import ValidationError

from core.commands import ReportCommand, parse_probability
from core.output import Report
from nsboxes.boxes import (
    OUTCOMES,
    box_to_dict,
    check_no_signalling,
    check_perp,
    ks_box,
    pr_box,
)


class Command(ReportCommand):
    help = "Build a KS or PR box and report its no-signalling and perp checks"

    def add_report_arguments(self, parser):
        parser.add_argument("kind", choices=["ks", "pr"], help="Box family")
        parser.add_argument("--n", type=int, required=True, help="Number of inputs per party")
        parser.add_argument("--p", type=str, default=None, help="KS marginal, e.g. 0.5 or 1/2")

    def build_report(self, config, options):
        n = options["n"]
        if options["kind"] == "ks":
            if options["p"] is None:
                raise ValidationError("a KS box needs --p", code="invalid_marginal")
            p = parse_probability(options["p"], config.exact)
            box = ks_box(n, p, exact=config.exact)
        else:
            p = None
            box = pr_box(n)
            if not config.exact:
                box = box.to_float()

        signalling = check_no_signalling(box, settings.KSBOX_FLOAT_TOL)
        perp = check_perp(box)
        payload = {
            "kind": options["kind"],
            "n": n,
            "p": p,
            "box": box_to_dict(box),
            "no_signalling": {
                "passed": signalling.passed,
                "deviation": signalling.deviation,
            },
            "perp": {
                "holds": perp.holds,
                "holds_equal_inputs": perp.holds_equal_inputs,
                "holds_product_zero": perp.holds_product_zero,
                "offending_entries": [
                    {"x": x, "y": y, "a": a, "b": b, "p": prob}
                    for x, y, a, b, prob in perp.offending_entries
                ],
            },
        }
        rows = [
            (x, y, a, b, blk[a][b])
            for (x, y), blk in sorted(box.table.items())
            for a, b in OUTCOMES
        ]
        return Report(payload, columns=("x", "y", "a", "b", "p"), rows=rows)
