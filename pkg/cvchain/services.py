"""
Chained Bell construction on a lattice of localized packets.

Packet k is the sole coordinate (unit lattice spacing).  X(0) averages the
two unit translations, the sign operator is (-1)^k, and X(phi) is X(0)
conjugated by the phase U(phi) = exp(i (-1)^k phi / 2).  States live on a
window covering the occupied band plus one guard cell per side, so the
amplitude pushed past the band edge is kept and gives the (N-1)/N factor.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple

import numpy as np
from django.core.exceptions import ValidationError
from scipy import sparse

logger = logging.getLogger(__name__)

NORM_TOL = 1e-12
MAX_M = 4096


@dataclass(frozen=True, eq=False)
class LatticeState:
    """Unit-norm amplitudes over the packet indices window[0]..window[1]."""

    window: Tuple[int, int]
    amplitudes: np.ndarray

    def __post_init__(self):
        lo, hi = self.window
        if self.amplitudes.shape != (hi - lo + 1,):
            raise ValidationError(
                f"{self.amplitudes.shape[0]} amplitudes for a window of {hi - lo + 1} cells",
                code="malformed",
            )
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state norm is {norm:.15g}", code="not_normalized")

    def amplitude(self, k: int) -> complex:
        lo, hi = self.window
        return complex(self.amplitudes[k - lo]) if lo <= k <= hi else 0j

    def support(self) -> Tuple[int, ...]:
        lo = self.window[0]
        return tuple(int(i) + lo for i in np.flatnonzero(np.abs(self.amplitudes) > 0))

    def overlap(self, other: "LatticeState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class CVModel:
    """Band of 2M packets starting at index 2*(offset - M//2), with guard cells."""

    M: int
    offset: int = 0

    def __post_init__(self):
        if self.M < 1:
            raise ValidationError(f"M must be positive, got {self.M}", code="invalid_dimension")
        if self.M > MAX_M:
            raise ValidationError(f"M={self.M} exceeds {MAX_M}", code="invalid_dimension")

    @property
    def N(self) -> int:
        return 2 * self.M

    @property
    def band(self) -> Tuple[int, int]:
        start = 2 * (self.offset - self.M // 2)
        return start, start + self.N - 1

    @property
    def window(self) -> Tuple[int, int]:
        lo, hi = self.band
        return lo - 1, hi + 1

    @property
    def size(self) -> int:
        return self.N + 2

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.window[0], self.window[1] + 1)

    @property
    def contrast(self) -> float:
        """(N-1)/N, the factor each X(phi) loses at the band edges."""
        return (self.N - 1) / self.N

    def signs(self) -> np.ndarray:
        """Diagonal of the sign operator, (-1)^k."""
        return np.where(self.indices % 2 == 0, 1.0, -1.0)

    def x0(self) -> sparse.csr_matrix:
        step = np.full(self.size - 1, 0.5)
        return sparse.diags([step, step], [-1, 1], format="csr")

    def phases(self, phi: float) -> np.ndarray:
        return np.exp(0.5j * phi * self.signs())

    def u(self, phi: float) -> sparse.csr_matrix:
        return sparse.diags(self.phases(phi), format="csr")

    def x_phi(self, phi: float) -> sparse.csr_matrix:
        return x_phi(self, phi)


def build_states(M: int) -> Tuple[LatticeState, LatticeState, LatticeState, LatticeState]:
    """psi0 (odd packets), psi1 (even packets), psi+ and psi- of the M-band."""
    return _build_states(CVModel(M))


def _build_states(model: CVModel) -> Tuple[LatticeState, LatticeState, LatticeState, LatticeState]:
    lo, hi = model.band
    k = model.indices
    in_band = (k >= lo) & (k <= hi)
    amp = 1 / math.sqrt(model.M)
    psi0 = np.where(in_band & (k % 2 == 1), amp, 0.0).astype(complex)
    psi1 = np.where(in_band & (k % 2 == 0), amp, 0.0).astype(complex)
    plus = (psi0 + psi1) / math.sqrt(2)
    minus = (psi0 - psi1) / math.sqrt(2)
    window = model.window
    return (
        LatticeState(window, psi0),
        LatticeState(window, psi1),
        LatticeState(window, plus),
        LatticeState(window, minus),
    )


def x_phi(model: CVModel, phi: float) -> sparse.csr_matrix:
    """U(phi)^dagger X(0) U(phi) on the window.

    U is diagonal, so only the two neighbour bands of X(0) pick up phases:
    entry (k, k+1) becomes conj(w_k) w_{k+1} / 2 with w = diag U.
    """
    w = model.phases(phi)
    upper = 0.5 * np.conj(w[:-1]) * w[1:]
    return sparse.diags([np.conj(upper), upper], [-1, 1], format="csr")


def expectation(state: LatticeState, operator) -> float:
    return float(np.real(np.vdot(state.amplitudes, operator @ state.amplitudes)))


def x0_expectation_exact(M: int, sign: int) -> Fraction:
    """<psi(sign)|X(0)|psi(sign)> in rational arithmetic.

    Uses the unnormalised +-1 amplitudes of psi+ (sign=1) or psi- (sign=-1)
    on the band, padded by the two guard cells; the squared norm is 2M.
    """
    if sign not in (1, -1):
        raise ValidationError(f"sign must be +1 or -1, got {sign}", code="malformed")
    model = CVModel(M)
    lo, hi = model.band
    v = [0] + [sign ** (k - lo) for k in range(lo, hi + 1)] + [0]
    total = sum(
        Fraction(1, 2) * v[i] * (v[i - 1] + v[i + 1]) for i in range(1, len(v) - 1)
    )
    return total / sum(a * a for a in v)


ProductTerm = Tuple[float, np.ndarray, np.ndarray]


def entangled_terms(model: CVModel) -> Tuple[ProductTerm, ProductTerm]:
    """(|psi+>|psi-> - |psi->|psi+>)/sqrt 2 as two weighted product terms."""
    _, _, plus, minus = _build_states(model)
    p, m = plus.amplitudes, minus.amplitudes
    c = 1 / math.sqrt(2)
    return (c, p, m), (-c, m, p)


def entangled_state(model: CVModel) -> np.ndarray:
    """The entangled state as a dense window x window amplitude matrix."""
    return sum(c * np.outer(u, v) for c, u, v in entangled_terms(model))


def is_swap_antisymmetric(psi: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(psi + psi.T)) <= tol)


def _product_expectation(terms, A, B) -> float:
    """<psi| A x B |psi> for psi a sum of product terms; linear in the window size."""
    moved = [(c, A @ u, B @ v) for c, u, v in terms]
    total = sum(
        ci * cj * np.vdot(ui, au) * np.vdot(vi, bv)
        for ci, ui, vi in terms
        for cj, au, bv in moved
    )
    return float(np.real(total))


def cv_joint_expectation(model: CVModel, phi: float, theta: float) -> float:
    """<psi| X(phi) x X(theta) |psi> on the entangled lattice state."""
    return _product_expectation(
        entangled_terms(model), x_phi(model, phi), x_phi(model, theta)
    )


def cv_chained_value(model: CVModel, n: int) -> float:
    """Chained sum with X_j = X(j pi/n), even j on the first mode and odd j on the second."""
    if n % 2:
        raise ValidationError(f"chained inequality needs even n, got {n}", code="invalid_parity")
    if n < 4:
        raise ValidationError(f"chained inequality needs n >= 4, got {n}", code="invalid_dimension")
    terms = entangled_terms(model)
    X = {j: x_phi(model, j * math.pi / n) for j in range(1, n + 1)}

    def term(i: int, k: int) -> float:
        first, second = (i, k) if i % 2 == 0 else (k, i)
        return _product_expectation(terms, X[first], X[second])

    value = sum(term(j, j + 1) for j in range(1, n)) - term(n, 1)
    logger.debug("cv chained value M=%s n=%s value=%.12f", model.M, n, value)
    return value


def cv_chained_closed_form(M: int, n: int) -> float:
    r = (2 * M - 1) / (2 * M)
    return -(r**2) * n * math.cos(math.pi / n)


def effective_qubit(model: CVModel, phi: float) -> np.ndarray:
    """X(phi) compressed to span{psi0, psi1}: r (cos phi sigma_x - sin phi sigma_y)."""
    psi0, psi1, _, _ = _build_states(model)
    basis = np.column_stack([psi0.amplitudes, psi1.amplitudes])
    return basis.conj().T @ (x_phi(model, phi) @ basis)


def violation_crossover(n: int, M_max: int = 64) -> Optional[int]:
    """Smallest M with ((N-1)/N)^2 n cos(pi/n) > n - 2, or None up to M_max."""
    for M in range(1, M_max + 1):
        if abs(cv_chained_closed_form(M, n)) > n - 2:
            return M
    return None


def cv_report(n: int, M: int) -> Dict[str, object]:
    model = CVModel(M)
    value = cv_chained_value(model, n)
    limit = n * math.cos(math.pi / n)
    report = {
        "M": M,
        "n": n,
        "N": model.N,
        "value": value,
        "limit": limit,
        "classical_bound": float(n - 2),
        "violated": abs(value) > n - 2,
        "crossover_M": violation_crossover(n, max(M, 64)),
    }
    logger.info("cv report n=%s M=%s value=%.12f", n, M, value)
    return report
