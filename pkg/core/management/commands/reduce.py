from django.conf import settings

from core.commands import ReportCommand
from core.output import Report
from nsboxes.boxes import OUTCOMES, make_rng
from reduction.services import (
    chained_value_from_ks,
    derived_pr_box,
    marginal_thresholds,
    reduction_report,
    simulate_chained_from_ks,
)


class Command(ReportCommand):
    help = "Simulate a PR box with a KS box and report the chained-inequality marginals"

    def add_report_arguments(self, parser):
        parser.add_argument("--n", type=int, required=True, help="PR box dimension")
        parser.add_argument("--rounds", type=int, default=None, help="Monte Carlo rounds")
        parser.add_argument(
            "--chained-p",
            type=float,
            default=None,
            help="Also sample the chained value of the KS strategy at this marginal",
        )

    def build_report(self, config, options):
        n = options["n"]
        payload = reduction_report(n, options["rounds"], config.seed)

        if n >= 4 and n % 2 == 0:
            p_c, p_q, p_ns = marginal_thresholds(n)
            payload["thresholds"] = {
                "p_c": p_c,
                "p_q": p_q,
                "p_ns": p_ns,
                "value_at_p_c": chained_value_from_ks(n, p_c),
                "value_at_p_q": chained_value_from_ks(n, p_q),
                "value_at_p_ns": chained_value_from_ks(n, p_ns),
            }
            if options["chained_p"] is not None:
                rounds = options["rounds"]
                if rounds is None:
                    rounds = settings.KSBOX_DEFAULT_ROUNDS
                result = simulate_chained_from_ks(
                    n, options["chained_p"], rounds, make_rng(config.seed)
                )
                payload["chained_monte_carlo"] = {
                    "p": result.p,
                    "rounds": result.rounds,
                    "value": result.value,
                    "sigma": result.sigma,
                    "expected": chained_value_from_ks(n, result.p),
                }

        box = derived_pr_box(n)
        rows = [
            (x, y, a, b, blk[a][b])
            for (x, y), blk in sorted(box.table.items())
            for a, b in OUTCOMES
        ]
        failure = None if payload["matches_pr"] else f"derived box differs from the PR box at n={n}"
        return Report(payload, columns=("x", "y", "a", "b", "p"), rows=rows, failure=failure)
