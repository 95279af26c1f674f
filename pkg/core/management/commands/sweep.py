from fractions import Fraction

from django.core.exceptions import ValidationError

from chartsim.services import sweep_optimal
from core.commands import ReportCommand, parse_probability
from core.output import Report
from ncycle.services import chained_bounds, kcbs_bounds, kcbs_threshold
from reduction.services import threshold_sweep

SWEEPS = ("optimal-sim", "kcbs-threshold", "chained-gap", "ks-thresholds")

# (first n, default last n) per sweep
RANGES = {
    "optimal-sim": (2, 12),
    "kcbs-threshold": (5, 51),
    "chained-gap": (4, 40),
    "ks-thresholds": (4, 100),
}


def n_range(what, n_min, n_max):
    first, last = RANGES[what]
    start = max(first, n_min if n_min is not None else first)
    stop = n_max if n_max is not None else last
    if what == "kcbs-threshold":
        values = [n for n in range(start, stop + 1) if n % 2 == 1]
    elif what in ("chained-gap", "ks-thresholds"):
        values = [n for n in range(start, stop + 1) if n % 2 == 0]
    else:
        values = list(range(start, stop + 1))
    if not values:
        raise ValidationError(f"empty n range {start}..{stop} for {what}", code="invalid_dimension")
    return values


def p_grid(step):
    if step <= 0 or step > Fraction(1, 2):
        raise ValidationError(f"p step {step} outside (0, 1/2]", code="invalid_marginal")
    grid = []
    p = Fraction(0)
    while p <= Fraction(1, 2):
        grid.append(p)
        p += step
    return grid


class Command(ReportCommand):
    help = "CSV sweeps: optimal chart simulation, KCBS threshold, chained gap, KS thresholds"
    default_format = "csv"

    def add_report_arguments(self, parser):
        parser.add_argument("--what", choices=SWEEPS, required=True, help="Which sweep")
        parser.add_argument("--n-min", type=int, default=None, help="Smallest n (or N)")
        parser.add_argument("--n-max", type=int, default=None, help="Largest n (or N)")
        parser.add_argument("--p-step", type=str, default="1/20", help="p grid step for optimal-sim")
        parser.add_argument("--rounds", type=int, default=None, help="Monte Carlo rounds for optimal-sim")

    def exact_supported(self, options):
        return options.get("what") not in ("kcbs-threshold", "chained-gap")

    def build_report(self, config, options):
        what = options["what"]
        values = n_range(what, options["n_min"], options["n_max"])
        builder = {
            "optimal-sim": self._optimal_sim,
            "kcbs-threshold": self._kcbs_threshold,
            "chained-gap": self._chained_gap,
            "ks-thresholds": self._ks_thresholds,
        }[what]
        return builder(config, options, values)

    def _optimal_sim(self, config, options, values):
        grid = p_grid(parse_probability(options["p_step"], exact=True))
        rows = sweep_optimal(values, grid, options["rounds"], config.seed)
        mismatches = [(r.N, r.p) for r in rows if r.closed_form != r.lp_oracle]
        failure = None
        if mismatches:
            failure = f"closed form disagrees with LP oracle at {len(mismatches)} grid points"
        return Report(
            {"what": "optimal-sim", "rows": len(rows), "mismatches": len(mismatches)},
            columns=("N", "p", "closed_form", "lp_oracle", "monte_carlo", "rounds", "seed"),
            rows=[
                (r.N, r.p, r.closed_form, r.lp_oracle, r.monte_carlo, r.rounds, r.seed)
                for r in rows
            ],
            failure=failure,
        )

    def _kcbs_threshold(self, config, options, values):
        rows = [(n, kcbs_threshold(n), *kcbs_bounds(n)) for n in values]
        return Report(
            {"what": "kcbs-threshold", "rows": len(rows)},
            columns=("n", "threshold", "classical_bound", "quantum_bound"),
            rows=rows,
        )

    def _chained_gap(self, config, options, values):
        rows = [(n, (n - 2) / n, *chained_bounds(n)) for n in values]
        return Report(
            {"what": "chained-gap", "rows": len(rows)},
            columns=("n", "gap_threshold", "classical_bound", "quantum_bound"),
            rows=rows,
        )

    def _ks_thresholds(self, config, options, values):
        rows = [(r.n, r.p_c, r.p_q, r.p_ns) for r in threshold_sweep(values)]
        return Report(
            {"what": "ks-thresholds", "rows": len(rows)},
            columns=("n", "p_c", "p_q", "p_ns"),
            rows=rows,
        )
