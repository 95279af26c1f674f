"""
Small dense linear algebra for the n-cycle engine: density matrices and a
cyclic Jacobi eigensolver for complex Hermitian matrices.
"""

import json
import logging
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np
from django.core.exceptions import ValidationError

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
MAX_JACOBI_DIM = 8
MAX_SWEEPS = 100


@dataclass(frozen=True)
class SpectralResult:
    eigenvalues: np.ndarray  # descending
    residual: float  # ||V^T V - I|| of the accumulated rotations
    sweeps: int

    @property
    def gap(self) -> float:
        """Difference of the extremal eigenvalues."""
        return float(self.eigenvalues[0] - self.eigenvalues[-1])


def check_hermitian(H: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValidationError(f"matrix must be square, got shape {H.shape}", code="malformed")
    deviation = np.max(np.abs(H - H.conj().T)) if H.size else 0.0
    if deviation > tol:
        raise ValidationError(
            f"matrix is not Hermitian (max |H - H^dagger| = {deviation:.3e})",
            code="not_hermitian",
        )
    return H


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    apq = a[p, q]
    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
    if theta < 0.0:
        t = -t
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c

    col_p, col_q = a[:, p].copy(), a[:, q].copy()
    a[:, p] = c * col_p - s * col_q
    a[:, q] = s * col_p + c * col_q
    row_p, row_q = a[p, :].copy(), a[q, :].copy()
    a[p, :] = c * row_p - s * row_q
    a[q, :] = s * row_p + c * row_q
    a[p, q] = a[q, p] = 0.0

    vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
    v[:, p] = c * vec_p - s * vec_q
    v[:, q] = s * vec_p + c * vec_q


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def eigenvalues_hermitian(H: Any, tol: float = 1e-12) -> SpectralResult:
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    H = A + iB is embedded as the real symmetric [[A, -B], [B, A]], whose
    spectrum is that of H with every eigenvalue doubled.  Sweeps run until
    the off-diagonal norm drops below ``tol`` (scaled by the matrix norm when
    that exceeds one).
    """
    H = check_hermitian(H, tol=max(tol, HERMITIAN_TOL))
    d = H.shape[0]
    if d > MAX_JACOBI_DIM:
        raise ValidationError(
            f"Jacobi solver handles dimension <= {MAX_JACOBI_DIM}, got {d}",
            code="invalid_dimension",
        )
    A, B = H.real, H.imag
    a = np.block([[A, -B], [B, A]]).astype(float)
    n = a.shape[0]
    v = np.eye(n)
    threshold = tol * max(1.0, float(np.linalg.norm(a)))

    for sweep in range(MAX_SWEEPS + 1):
        if _off_norm(a) <= threshold:
            break
        if sweep == MAX_SWEEPS:
            raise ArithmeticError(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] != 0.0:
                    _rotate(a, v, p, q)

    doubled = np.sort(np.diag(a))[::-1]
    residual = float(np.max(np.abs(v.T @ v - np.eye(n))))
    logger.debug("jacobi dim=%s sweeps=%s residual=%.2e", d, sweep, residual)
    return SpectralResult(eigenvalues=doubled[::2].copy(), residual=residual, sweeps=sweep)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        rho = check_hermitian(self.matrix)
        trace = np.trace(rho)
        if abs(trace - 1.0) > TRACE_TOL:
            raise ValidationError(f"trace is {trace.real:.12g}, not 1", code="trace")
        smallest = float(np.linalg.eigvalsh(rho)[0])
        if smallest < -PSD_TOL:
            raise ValidationError(
                f"matrix is not positive semidefinite (eigenvalue {smallest:.3e})",
                code="not_psd",
            )
        object.__setattr__(self, "matrix", rho)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def element(self, i: int, j: int) -> complex:
        """rho_ij with 1-based indices."""
        return complex(self.matrix[i - 1, j - 1])

    def expectation(self, operator: np.ndarray) -> float:
        return float(np.real(np.trace(operator @ self.matrix)))

    def spectrum(self, tol: float = 1e-12) -> SpectralResult:
        return eigenvalues_hermitian(self.matrix, tol)

    @classmethod
    def pure(cls, vector: Sequence[complex]) -> "DensityMatrix":
        psi = np.asarray(vector, dtype=complex)
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise ValidationError("state vector is zero", code="malformed")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "DensityMatrix":
        try:
            dim = int(data["dim"])
            re = np.asarray(data["re"], dtype=float)
            im = np.asarray(data.get("im", np.zeros((dim, dim))), dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed density matrix: {exc}", code="malformed") from exc
        if re.shape != (dim, dim) or im.shape != (dim, dim):
            raise ValidationError(
                f"density matrix entries must be {dim}x{dim}", code="malformed"
            )
        return cls(re + 1j * im)

    @classmethod
    def from_json(cls, text: str) -> "DensityMatrix":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"density matrix is not JSON: {exc}", code="malformed") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "re": self.matrix.real.tolist(),
            "im": self.matrix.imag.tolist(),
        }


def singlet() -> DensityMatrix:
    return DensityMatrix.pure([0.0, 1.0, -1.0, 0.0])


def qutrit_basis(k: int) -> DensityMatrix:
    """|k><k| for k in 1..3."""
    vector = np.zeros(3, dtype=complex)
    vector[k - 1] = 1.0
    return DensityMatrix.pure(vector)


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int = 0) -> DensityMatrix:
    """Ginibre-distributed density matrix (full rank unless ``rank`` is given)."""
    cols = rank or dim
    G = rng.normal(size=(dim, cols)) + 1j * rng.normal(size=(dim, cols))
    rho = G @ G.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho / np.trace(rho).real)
