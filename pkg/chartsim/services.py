"""
Classical simulation of KS_p boxes with shared charts.

A chart of degree M labels M of the N inputs with '1'.  Both parties answer
with the label of their own input, so equal inputs always agree and only the
a*b=0 condition can fail.  Success only depends on the degree.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from django.core.exceptions import ValidationError
from scipy.optimize import linprog

from nsboxes.boxes import as_probability, spawn_rngs

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Chart:
    """0/1 assignment to the N vertices of an N-gon."""

    assignment: Tuple[int, ...]

    def __post_init__(self):
        if not self.assignment or any(bit not in (0, 1) for bit in self.assignment):
            raise ValidationError("a chart is a non-empty 0/1 sequence", code="malformed")

    @property
    def N(self) -> int:
        return len(self.assignment)

    @property
    def degree(self) -> int:
        return sum(self.assignment)

    @classmethod
    def canonical(cls, N: int, M: int) -> "Chart":
        """Degree-M chart with its ones on the first M vertices."""
        _check_degree(N, M)
        return cls(tuple(1 if i < M else 0 for i in range(N)))

    def rotate(self, k: int) -> "Chart":
        k %= self.N
        return Chart(self.assignment[-k:] + self.assignment[:-k] if k else self.assignment)


@dataclass(frozen=True)
class MixedStrategy:
    """Mixture over chart degrees, as (degree, weight) pairs."""

    support: Tuple[Tuple[int, Fraction], ...]

    @property
    def mean_degree(self):
        return sum(weight * degree for degree, weight in self.support)

    @property
    def total_weight(self):
        return sum(weight for _, weight in self.support)


def _check_degree(N: int, M: int) -> None:
    if N < 1:
        raise ValidationError(f"N must be positive, got {N}", code="invalid_dimension")
    if M < 0 or M > N:
        raise ValidationError(f"degree {M} outside [0, {N}]", code="invalid_degree")


def _check_marginal(p) -> None:
    if p < 0 or p > Fraction(1, 2):
        raise ValidationError(f"marginal p={p} outside [0, 1/2]", code="invalid_marginal")


def perp_success(N: int, M: int) -> Fraction:
    """Probability that chart C_M passes the perp condition: (N^2 - M^2 + M)/N^2."""
    _check_degree(N, M)
    return Fraction(N * N - M * M + M, N * N)


def perp_success_bruteforce(chart: Chart) -> Fraction:
    """Count ordered input pairs that answer (1, 1) on distinct inputs."""
    N = chart.N
    failures = sum(
        1
        for x in range(N)
        for y in range(N)
        if x != y and chart.assignment[x] == 1 and chart.assignment[y] == 1
    )
    return Fraction(N * N - failures, N * N)


def mixed_strategy_value(N: int, strategy: MixedStrategy) -> Fraction:
    return sum(
        (weight * perp_success(N, degree) for degree, weight in strategy.support),
        Fraction(0),
    )


def optimal_strategy(N: int, p: Any) -> Tuple[MixedStrategy, Fraction]:
    """Optimal chart mixture for an N-dimensional KS_p box.

    The support is {floor(Np), ceil(Np)} (a single chart when Np is an
    integer) and the value is 1 - (2Np - M)(M - 1)/N^2 with M = ceil(Np).
    """
    p = as_probability(p, exact=True)
    _check_marginal(p)
    if N < 2:
        raise ValidationError(f"N must be at least 2, got {N}", code="invalid_dimension")

    mean = N * p
    m = math.floor(mean)
    if mean == m:
        strategy = MixedStrategy(((m, Fraction(1)),))
    else:
        strategy = MixedStrategy(((m, m + 1 - mean), (m + 1, mean - m)))
    M = math.ceil(mean)
    value = 1 - (2 * mean - M) * (M - 1) / Fraction(N * N)
    logger.debug("optimal strategy N=%s p=%s support=%s value=%s", N, p, strategy.support, value)
    return strategy, value


def lp_oracle(N: int, p: Any) -> Fraction:
    """Exact LP optimum by enumerating every support of size one or two.

    The least-variance distribution with a fixed mean on integer points has
    at most two support points, so this search is exhaustive.
    """
    p = as_probability(p, exact=True)
    _check_marginal(p)
    mean = N * p
    if mean > N:
        raise ValidationError(f"mean degree {mean} exceeds N={N}", code="infeasible_mean")

    best: Optional[Fraction] = None
    for i in range(N + 1):
        if i == mean:
            value = perp_success(N, i)
            best = value if best is None else max(best, value)
        for j in range(i + 1, N + 1):
            if not i <= mean <= j:
                continue
            w_j = (mean - i) / Fraction(j - i)
            value = (1 - w_j) * perp_success(N, i) + w_j * perp_success(N, j)
            best = value if best is None else max(best, value)
    if best is None:
        raise ValidationError(f"no feasible chart mixture for N={N}, p={p}", code="infeasible_mean")
    return best


def lp_solve(N: int, p: float) -> Tuple[float, np.ndarray]:
    """Float LP over all N+1 chart degrees, solved with HiGHS.

    Returns the optimum and the weight vector indexed by degree.
    """
    _check_marginal(p)
    degrees = np.arange(N + 1)
    success = (N * N - degrees**2 + degrees) / (N * N)
    result = linprog(
        -success,
        A_eq=np.vstack([degrees, np.ones(N + 1)]),
        b_eq=np.array([N * float(p), 1.0]),
        bounds=[(0, None)] * (N + 1),
        method="highs",
    )
    if not result.success:
        raise ArithmeticError(f"chart LP failed for N={N}, p={p}: {result.message}")
    return -result.fun, result.x


def asymptotic_limit(p: Any) -> Any:
    """Large-N simulation efficiency 1 - p^2."""
    _check_marginal(p)
    return 1 - p * p


@dataclass(frozen=True)
class MonteCarloResult:
    rounds: int
    successes: int
    ones: int
    seed: int

    @property
    def success_rate(self) -> float:
        return self.successes / self.rounds

    @property
    def sigma(self) -> float:
        rate = self.success_rate
        return math.sqrt(max(rate * (1 - rate), 0.0) / self.rounds)

    @property
    def marginal_one(self) -> float:
        """Fraction of Alice's outputs equal to 1."""
        return self.ones / self.rounds


def _simulate_rounds(
    N: int, strategy: MixedStrategy, rounds: int, rng: np.random.Generator
) -> Tuple[int, int]:
    degrees = np.array([d for d, _ in strategy.support])
    weights = np.array([float(w) for _, w in strategy.support])
    degree = rng.choice(degrees, size=rounds, p=weights / weights.sum())
    rotation = rng.integers(0, N, size=rounds)
    x = rng.integers(0, N, size=rounds)
    y = rng.integers(0, N, size=rounds)
    # canonical chart rotated by r labels vertex v with 1 iff (v - r) mod N < M
    a = ((x - rotation) % N) < degree
    b = ((y - rotation) % N) < degree
    failed = (x != y) & a & b
    return int(rounds - failed.sum()), int(a.sum())


def simulate_strategy(
    N: int, p: Any, rounds: int, seed: int, workers: int = 1
) -> MonteCarloResult:
    """Play the optimal chart mixture for ``rounds`` rounds.

    Each round draws a degree from the mixture, a shared uniform rotation of
    the canonical chart and independent uniform inputs.  Rounds are split
    across ``workers`` streams spawned from ``seed`` and the counts summed.
    """
    if rounds < 1:
        raise ValidationError("rounds must be positive", code="invalid_rounds")
    strategy, _ = optimal_strategy(N, p)
    workers = max(1, min(workers, rounds))
    shares = [rounds // workers + (1 if k < rounds % workers else 0) for k in range(workers)]
    successes = ones = 0
    for share, rng in zip(shares, spawn_rngs(seed, workers)):
        s, o = _simulate_rounds(N, strategy, share, rng)
        successes += s
        ones += o
    result = MonteCarloResult(rounds, successes, ones, seed)
    logger.info(
        "chart simulation N=%s p=%s rounds=%s seed=%s rate=%.6f",
        N, p, rounds, seed, result.success_rate,
    )
    return result


@dataclass(frozen=True)
class SweepRow:
    N: int
    p: Fraction
    closed_form: Fraction
    lp_oracle: Fraction
    monte_carlo: Optional[float] = None
    rounds: Optional[int] = None
    seed: Optional[int] = None


def sweep_optimal(
    N_values: Iterable[int],
    p_values: Sequence[Any],
    rounds: Optional[int] = None,
    seed: Optional[int] = None,
) -> List[SweepRow]:
    """Closed form, oracle and optional Monte Carlo over an (N, p) grid."""
    rows = []
    for N in sorted(N_values):
        for p in sorted(as_probability(p, exact=True) for p in p_values):
            _, value = optimal_strategy(N, p)
            mc = None
            if rounds is not None:
                mc = simulate_strategy(N, p, rounds, seed).success_rate
            rows.append(SweepRow(N, p, value, lp_oracle(N, p), mc, rounds, seed))
    return rows
