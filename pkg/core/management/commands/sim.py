from django.conf import settings

from chartsim.services import lp_oracle, lp_solve, optimal_strategy, simulate_strategy
from core.commands import ReportCommand, parse_probability
from core.output import Report


class Command(ReportCommand):
    help = "Optimal chart simulation of a KS box: closed form, LP oracles and Monte Carlo"

    def add_report_arguments(self, parser):
        parser.add_argument("target", choices=["charts"], help="What to simulate")
        parser.add_argument("--n", type=int, required=True, help="KS box dimension N")
        parser.add_argument("--p", type=str, required=True, help="KS marginal in [0, 1/2]")
        parser.add_argument("--rounds", type=int, default=None, help="Monte Carlo rounds")
        parser.add_argument("--workers", type=int, default=1, help="Independent RNG streams")

    def build_report(self, config, options):
        N = options["n"]
        p = parse_probability(options["p"], exact=True)
        strategy, closed_form = optimal_strategy(N, p)
        oracle = lp_oracle(N, p)
        highs, _ = lp_solve(N, float(p))

        payload = {
            "N": N,
            "p": p,
            "closed_form": closed_form,
            "lp_oracle": oracle,
            "lp_highs": highs,
            "agree": closed_form == oracle,
            "strategy": [
                {"degree": degree, "weight": weight} for degree, weight in strategy.support
            ],
        }
        row = [N, p, closed_form, oracle, None, None, None, config.seed]
        if options["rounds"] is not None:
            result = simulate_strategy(N, p, options["rounds"], config.seed, options["workers"])
            payload["monte_carlo"] = {
                "rounds": result.rounds,
                "success_rate": result.success_rate,
                "sigma": result.sigma,
                "marginal_one": result.marginal_one,
            }
            row[4:7] = [result.success_rate, result.sigma, result.rounds]

        failure = None
        if config.exact:
            agree = closed_form == oracle
        else:
            agree = abs(float(closed_form) - float(oracle)) <= settings.KSBOX_AGREEMENT_TOL
        if not agree:
            failure = f"closed form {closed_form} disagrees with LP oracle {oracle} at N={N}, p={p}"
        columns = ("N", "p", "closed_form", "lp_oracle", "monte_carlo", "sigma", "rounds", "seed")
        return Report(payload, columns=columns, rows=[row], failure=failure)
