"""
n-cycle inequalities: the odd-cycle KCBS family on a qutrit and the
even-cycle chained Bell family on two qubits, with the measurement settings
that reach the quantum maximum.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from django.core.exceptions import ValidationError

from .linalg import DensityMatrix, SpectralResult, eigenvalues_hermitian

logger = logging.getLogger(__name__)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

VALUE_CROSSCHECK_TOL = 1e-10


def _check_odd(n: int) -> None:
    if n % 2 == 0:
        raise ValidationError(f"odd cycle needs odd n, got {n}", code="invalid_parity")
    if n < 5:
        raise ValidationError(f"odd cycle needs n >= 5, got {n}", code="invalid_dimension")


def _check_even(n: int) -> None:
    if n % 2:
        raise ValidationError(f"chained inequality needs even n, got {n}", code="invalid_parity")
    if n < 4:
        raise ValidationError(f"chained inequality needs n >= 4, got {n}", code="invalid_dimension")


def _check_dim(rho: DensityMatrix, dim: int) -> None:
    if rho.dim != dim:
        raise ValidationError(
            f"expected a {dim}x{dim} density matrix, got {rho.dim}x{rho.dim}",
            code="dimension_mismatch",
        )


# Odd cycle (KCBS)


@dataclass(frozen=True, eq=False)
class KCBSModel:
    n: int
    theta: float
    vectors: np.ndarray  # (n, 3), row j-1 is |psi_j>
    projectors: np.ndarray  # (n, 3, 3)
    operator: np.ndarray  # K_n = sum of projectors
    eigenvalues: Tuple[float, float, float]  # (k1, k2, k3)

    def event_probabilities(self, rho: DensityMatrix) -> np.ndarray:
        """Tr(Pi_j rho) for j = 1..n."""
        _check_dim(rho, 3)
        return np.real(np.einsum("jab,ba->j", self.projectors, rho.matrix))

    def spectrum(self) -> SpectralResult:
        return eigenvalues_hermitian(self.operator)


def kcbs_model(n: int) -> KCBSModel:
    """Projectors reaching the quantum maximum of the odd n-cycle inequality."""
    _check_odd(n)
    c = math.cos(math.pi / n)
    theta = math.acos(math.sqrt(c / (1 + c)))
    angles = np.arange(1, n + 1) * math.pi * (n - 1) / n
    vectors = np.column_stack(
        [
            math.sin(theta) * np.cos(angles),
            math.sin(theta) * np.sin(angles),
            np.full(n, math.cos(theta)),
        ]
    )
    projectors = np.einsum("ja,jb->jab", vectors, vectors).astype(complex)
    operator = projectors.sum(axis=0)
    k1 = n / (2 * (1 + c))
    k3 = n * c / (1 + c)
    logger.debug("kcbs model n=%s theta=%.12f k1=%.12f k3=%.12f", n, theta, k1, k3)
    return KCBSModel(n, theta, vectors, projectors, operator, (k1, k1, k3))


def kcbs_value(model: KCBSModel, rho: DensityMatrix) -> float:
    """Tr(K_n rho)."""
    _check_dim(rho, 3)
    return rho.expectation(model.operator)


def kcbs_threshold(n: int) -> float:
    """Smallest rho_33 at which the odd n-cycle value reaches (n-1)/2."""
    _check_odd(n)
    c = math.cos(math.pi / n)
    return (c * (n - 1) - 1) / (n * (2 * c - 1))


def kcbs_bounds(n: int) -> Tuple[float, float]:
    """(noncontextual bound, quantum maximum) of the odd n-cycle inequality."""
    _check_odd(n)
    return (n - 1) / 2, lovasz_theta_odd_cycle(n)


def lovasz_theta_odd_cycle(n: int) -> float:
    c = math.cos(math.pi / n)
    return n * c / (1 + c)


@dataclass(frozen=True)
class KCBSReport:
    n: int
    value: float
    classical_bound: float
    quantum_bound: float
    rho33: float
    threshold: float
    violated: bool


def kcbs_violation(model: KCBSModel, rho: DensityMatrix) -> KCBSReport:
    value = kcbs_value(model, rho)
    classical, quantum = kcbs_bounds(model.n)
    rho33 = rho.element(3, 3).real
    threshold = kcbs_threshold(model.n)
    violated = value > classical
    if violated != (rho33 > threshold):
        logger.warning(
            "kcbs verdict and rho33 threshold disagree at the boundary: value=%r rho33=%r",
            value, rho33,
        )
    return KCBSReport(model.n, value, classical, quantum, rho33, threshold, violated)


# Even cycle (chained Bell)


def rotated_observable(angle: float) -> np.ndarray:
    """cos(angle) sigma_x + sin(angle) sigma_z."""
    return math.cos(angle) * SIGMA_X + math.sin(angle) * SIGMA_Z


def chained_closed_form(n: int) -> np.ndarray:
    """(n/2) cos(pi/n) (sigma_x x sigma_x + sigma_z x sigma_z)."""
    return (n / 2) * math.cos(math.pi / n) * (
        np.kron(SIGMA_X, SIGMA_X) + np.kron(SIGMA_Z, SIGMA_Z)
    )


@dataclass(frozen=True, eq=False)
class ChainedModel:
    n: int
    local_observables: List[np.ndarray]  # X~_j, 2x2
    observables: List[np.ndarray]  # X_j, 4x4
    operator: np.ndarray  # O_n
    chained_operator: np.ndarray  # sum_{j<n} X_j X_{j+1} - X_n X_1

    def observable(self, j: int) -> np.ndarray:
        return self.observables[j - 1]

    def spectrum(self) -> SpectralResult:
        return eigenvalues_hermitian(self.operator)


def chained_model(n: int) -> ChainedModel:
    """Observables X_j placed on the first qubit for even j, the second for odd j."""
    _check_even(n)
    local = [rotated_observable(j * math.pi / n) for j in range(1, n + 1)]
    observables = [
        np.kron(x, IDENTITY_2) if j % 2 == 0 else np.kron(IDENTITY_2, x)
        for j, x in enumerate(local, start=1)
    ]
    c, s = math.cos(math.pi / n), math.sin(math.pi / n)
    operator = c * (np.kron(SIGMA_X, SIGMA_X) + np.kron(SIGMA_Z, SIGMA_Z)) + s * (
        np.kron(SIGMA_X, SIGMA_Z) - np.kron(SIGMA_Z, SIGMA_X)
    )
    chained = sum(observables[j] @ observables[j + 1] for j in range(n - 1))
    chained = chained - observables[-1] @ observables[0]
    return ChainedModel(n, local, observables, operator, chained)


def chained_terms(model: ChainedModel, rho: DensityMatrix) -> List[float]:
    """<X_j X_{j+1}> for j = 1..n-1 followed by <X_n X_1>."""
    _check_dim(rho, 4)
    X = model.observables
    pairs = [(j, j + 1) for j in range(model.n - 1)] + [(model.n - 1, 0)]
    return [rho.expectation(X[i] @ X[k]) for i, k in pairs]


def chained_value(model: ChainedModel, rho: DensityMatrix) -> float:
    """sum_{j<n} <X_j X_{j+1}> - <X_n X_1>, checked against the closed form."""
    terms = chained_terms(model, rho)
    value = sum(terms[:-1]) - terms[-1]
    closed = rho.expectation(chained_closed_form(model.n))
    if abs(value - closed) > VALUE_CROSSCHECK_TOL:
        raise ArithmeticError(
            f"chained value {value!r} disagrees with closed form {closed!r}"
        )
    return value


def chained_bounds(n: int) -> Tuple[float, float]:
    """(local bound n-2, quantum maximum n cos(pi/n))."""
    _check_even(n)
    return float(n - 2), n * math.cos(math.pi / n)


@dataclass(frozen=True)
class GapReport:
    gap: float
    threshold: float
    satisfied: bool


def chained_necessary_condition(rho: DensityMatrix, n: int, tol: float = 1e-12) -> GapReport:
    """lambda_1 - lambda_4 > (n-2)/n, necessary for a chained violation."""
    _check_even(n)
    _check_dim(rho, 4)
    gap = rho.spectrum(tol).gap
    threshold = (n - 2) / n
    return GapReport(gap, threshold, gap > threshold)


@dataclass(frozen=True)
class ChainedReport:
    n: int
    value: float
    magnitude: float
    classical_bound: float
    quantum_bound: float
    violated: bool
    violated_form: Optional[str]  # "canonical" or "flipped" (X_n -> -X_n)
    condition: GapReport


def chained_violation(
    model: ChainedModel, rho: DensityMatrix, tol: float = 1e-12
) -> ChainedReport:
    value = chained_value(model, rho)
    classical, quantum = chained_bounds(model.n)
    form = None
    if value > classical:
        form = "canonical"
    elif -value > classical:
        form = "flipped"
    return ChainedReport(
        n=model.n,
        value=value,
        magnitude=abs(value),
        classical_bound=classical,
        quantum_bound=quantum,
        violated=form is not None,
        violated_form=form,
        condition=chained_necessary_condition(rho, model.n, tol),
    )
