from pathlib import Path

from django.conf import settings
from django.core.exceptions import ValidationError

from core.commands import ReportCommand
from core.output import Report
from ncycle.linalg import DensityMatrix, qutrit_basis, singlet
from ncycle.services import (
    chained_bounds,
    chained_model,
    chained_violation,
    kcbs_bounds,
    kcbs_model,
    kcbs_threshold,
    kcbs_violation,
)


def load_state(name, dim):
    """A built-in state name or a path to a density-matrix JSON file."""
    if name == "singlet":
        return singlet()
    if name == "qutrit-3":
        return qutrit_basis(3)
    if name == "mixed":
        return DensityMatrix.maximally_mixed(dim)
    try:
        text = Path(name).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read density matrix {name!r}: {exc}", code="malformed") from exc
    return DensityMatrix.from_json(text)


class Command(ReportCommand):
    help = "Bounds, thresholds and violation verdicts for the n-cycle inequalities"
    allow_exact = False

    def add_report_arguments(self, parser):
        parser.add_argument("kind", choices=["kcbs", "chained"], help="Odd or even cycle")
        parser.add_argument("--n", type=int, required=True, help="Cycle length")
        parser.add_argument(
            "--rho",
            type=str,
            default=None,
            help="Density matrix JSON file, or singlet / qutrit-3 / mixed",
        )

    def build_report(self, config, options):
        if options["kind"] == "kcbs":
            payload = self._kcbs(options["n"], options["rho"])
        else:
            payload = self._chained(options["n"], options["rho"])
        return Report(payload)

    def _kcbs(self, n, rho_name):
        model = kcbs_model(n)
        classical, quantum = kcbs_bounds(n)
        payload = {
            "kind": "kcbs",
            "n": n,
            "classical_bound": classical,
            "quantum_bound": quantum,
            "threshold": kcbs_threshold(n),
        }
        if rho_name:
            rho = load_state(rho_name, 3)
            report = kcbs_violation(model, rho)
            payload.update(
                value=report.value,
                rho33=report.rho33,
                violated=report.violated,
                event_probabilities=model.event_probabilities(rho),
            )
        return payload

    def _chained(self, n, rho_name):
        model = chained_model(n)
        classical, quantum = chained_bounds(n)
        payload = {
            "kind": "chained",
            "n": n,
            "classical_bound": classical,
            "quantum_bound": quantum,
            "threshold": (n - 2) / n,
        }
        if rho_name:
            report = chained_violation(model, load_state(rho_name, 4), settings.KSBOX_EIGEN_TOL)
            payload.update(
                value=report.value,
                magnitude=report.magnitude,
                violated=report.violated,
                violated_form=report.violated_form,
                gap=report.condition.gap,
                gap_satisfied=report.condition.satisfied,
            )
        return payload
