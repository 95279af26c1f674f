"""
PR boxes from KS boxes, and the KS marginals that meet the chained bounds.

A PR box on n inputs is played with one KS_{1/2} box of dimension 2n-1:
Alice sends input i >= 2 to KS input 2i-2, Bob sends it to 2i-1, both send
input 1 to KS input 1, and Bob flips his output every round.  Only (1,1)
lands on a shared KS input, where the flipped outputs always differ.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np
from django.core.exceptions import ValidationError

from nsboxes.boxes import (
    OUTCOMES,
    Box,
    box_to_dict,
    ks_box,
    make_rng,
    pr_box,
    sample_many,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RelabelMap:
    n: int
    alice: Dict[int, int]
    bob: Dict[int, int]

    @property
    def ks_dimension(self) -> int:
        return 2 * self.n - 1

    def collisions(self) -> List[Tuple[int, int]]:
        """PR input pairs that land on the same KS input."""
        return [
            (x, y)
            for x, a in self.alice.items()
            for y, b in self.bob.items()
            if a == b
        ]


def relabel_map(n: int) -> RelabelMap:
    if n < 2:
        raise ValidationError(f"PR dimension must be at least 2, got {n}", code="invalid_dimension")
    alice = {1: 1, **{i: 2 * i - 2 for i in range(2, n + 1)}}
    bob = {1: 1, **{i: 2 * i - 1 for i in range(2, n + 1)}}
    return RelabelMap(n, alice, bob)


def derived_pr_box(n: int) -> Box:
    """KS_{1/2} of dimension 2n-1 seen through the relabel maps with Bob flipping."""
    maps = relabel_map(n)
    ks = ks_box(maps.ks_dimension, Fraction(1, 2))
    derived = ks.relabel(maps.alice, maps.bob).flip_bob()
    logger.debug("derived PR box n=%s from KS dimension %s", n, maps.ks_dimension)
    return derived


@dataclass(frozen=True, eq=False)
class EmpiricalBox:
    """Outcome counts per input pair, shape (n, n, 4) in OUTCOMES order."""

    n: int
    counts: np.ndarray
    seed: Optional[int] = None

    @property
    def rounds(self) -> int:
        return int(self.counts.sum())

    def trials(self, x: int, y: int) -> int:
        return int(self.counts[x - 1, y - 1].sum())

    def frequency(self, x: int, y: int, a: int, b: int) -> float:
        trials = self.trials(x, y)
        if trials == 0:
            raise ValidationError(f"input pair ({x},{y}) was never drawn", code="invalid_rounds")
        return self.counts[x - 1, y - 1, OUTCOMES.index((a, b))] / trials

    def marginal_alice(self, a: int) -> float:
        ones = self.counts[:, :, 2] + self.counts[:, :, 3]
        share = ones.sum() / self.rounds
        return float(share if a == 1 else 1 - share)

    def marginal_bob(self, b: int) -> float:
        ones = self.counts[:, :, 1] + self.counts[:, :, 3]
        share = ones.sum() / self.rounds
        return float(share if b == 1 else 1 - share)

    def to_box(self) -> Box:
        table = {}
        for x in range(1, self.n + 1):
            for y in range(1, self.n + 1):
                f = {ab: self.frequency(x, y, *ab) for ab in OUTCOMES}
                table[(x, y)] = ((f[(0, 0)], f[(0, 1)]), (f[(1, 0)], f[(1, 1)]))
        return Box(self.n, self.n, table)

    def max_sigma_deviation(self, target: Box) -> float:
        """Largest |frequency - p| / sigma over all entries; inf if an impossible outcome shows up."""
        worst = 0.0
        for x in range(1, self.n + 1):
            for y in range(1, self.n + 1):
                trials = self.trials(x, y)
                for a, b in OUTCOMES:
                    p = float(target.prob(a, b, x, y))
                    freq = self.frequency(x, y, a, b)
                    sigma = math.sqrt(p * (1 - p) / trials)
                    if sigma == 0:
                        if freq != p:
                            return math.inf
                        continue
                    worst = max(worst, abs(freq - p) / sigma)
        return worst


def simulate_pr_from_ks(n: int, rounds: int, rng: np.random.Generator) -> EmpiricalBox:
    """Play the PR box with uniform inputs through a sampled KS_{1/2} box."""
    if rounds < 1:
        raise ValidationError("rounds must be positive", code="invalid_rounds")
    maps = relabel_map(n)
    ks = ks_box(maps.ks_dimension, 0.5)
    x = rng.integers(1, n + 1, size=rounds)
    y = rng.integers(1, n + 1, size=rounds)
    per_pair = np.bincount((x - 1) * n + (y - 1), minlength=n * n).reshape(n, n)

    counts = np.zeros((n, n, 4), dtype=np.int64)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            size = int(per_pair[i - 1, j - 1])
            if size == 0:
                continue
            outcomes = sample_many(ks, maps.alice[i], maps.bob[j], size, rng)
            a = outcomes[:, 0].astype(np.int64)
            b = 1 - outcomes[:, 1].astype(np.int64)
            counts[i - 1, j - 1] = np.bincount(2 * a + b, minlength=4)
    return EmpiricalBox(n, counts)


def _check_chained(n: int) -> None:
    if n % 2:
        raise ValidationError(f"chained inequality needs even n, got {n}", code="invalid_parity")
    if n < 4:
        raise ValidationError(f"chained inequality needs n >= 4, got {n}", code="invalid_dimension")


def chained_value_from_ks(n: int, p: Any) -> Any:
    """(n-1)(4p-1) + 1; exact when p is a Fraction or int."""
    _check_chained(n)
    if p < 0 or p > Fraction(1, 2):
        raise ValidationError(f"marginal p={p} outside [0, 1/2]", code="invalid_marginal")
    return (n - 1) * (4 * p - 1) + 1


def marginal_thresholds(n: int) -> Tuple[Fraction, float, Fraction]:
    """KS marginals at which the chained value reaches n-2, n cos(pi/n) and n."""
    _check_chained(n)
    p_c = Fraction(n - 2, 2 * (n - 1))
    p_q = (n * (math.cos(math.pi / n) + 1) - 2) / (4 * (n - 1))
    return p_c, p_q, Fraction(1, 2)


@dataclass(frozen=True)
class ThresholdRow:
    n: int
    p_c: Fraction
    p_q: float
    p_ns: Fraction


def threshold_sweep(n_values: Iterable[int]) -> List[ThresholdRow]:
    return [ThresholdRow(n, *marginal_thresholds(n)) for n in sorted(n_values)]


def ks_chained_settings(n: int) -> Tuple[Dict[int, int], Dict[int, int]]:
    """KS inputs for Alice's even settings and Bob's odd settings.

    Setting j uses KS input j, except Alice's setting n which reuses input 1
    so that the closing term X_n X_1 shares a KS input.
    """
    alice = {j: (1 if j == n else j) for j in range(2, n + 1, 2)}
    bob = {j: j for j in range(1, n, 2)}
    return alice, bob


@dataclass(frozen=True)
class ChainedMonteCarlo:
    n: int
    p: float
    rounds: int
    value: float
    sigma: float
    terms: Tuple[float, ...]


def simulate_chained_from_ks(
    n: int, p: Any, rounds: int, rng: np.random.Generator
) -> ChainedMonteCarlo:
    """Estimate the chained value of the KS_p strategy, rounds split evenly over the n terms."""
    _check_chained(n)
    if rounds < n:
        raise ValidationError(f"need at least {n} rounds, got {rounds}", code="invalid_rounds")
    ks = ks_box(n, float(p))
    alice, bob = ks_chained_settings(n)
    pairs = [(j, j + 1) for j in range(1, n)] + [(n, 1)]
    shares = [rounds // n + (1 if t < rounds % n else 0) for t in range(n)]

    value = 0.0
    variance = 0.0
    terms = []
    for t, ((i, k), share) in enumerate(zip(pairs, shares)):
        even, odd = (i, k) if i % 2 == 0 else (k, i)
        outcomes = sample_many(ks, alice[even], bob[odd], share, rng)
        # Bob flips, so the product sign is -(-1)^(a xor b)
        products = 2.0 * (outcomes[:, 0] != outcomes[:, 1]) - 1.0
        mean = float(products.mean())
        sign = -1.0 if t == n - 1 else 1.0
        value += sign * mean
        variance += float(products.var()) / share
        terms.append(mean)
    result = ChainedMonteCarlo(n, float(p), rounds, value, math.sqrt(variance), tuple(terms))
    logger.info(
        "chained KS simulation n=%s p=%s rounds=%s value=%.6f sigma=%.6f",
        n, p, rounds, value, result.sigma,
    )
    return result


def reduction_report(
    n: int, rounds: Optional[int] = None, seed: Optional[int] = None
) -> Dict[str, Any]:
    maps = relabel_map(n)
    derived = derived_pr_box(n)
    report: Dict[str, Any] = {
        "n": n,
        "ks_dimension": maps.ks_dimension,
        "alice_map": {str(k): v for k, v in maps.alice.items()},
        "bob_map": {str(k): v for k, v in maps.bob.items()},
        "derived_box": box_to_dict(derived),
        "matches_pr": derived == pr_box(n),
    }
    if rounds is not None:
        empirical = simulate_pr_from_ks(n, rounds, make_rng(seed))
        deviation = empirical.max_sigma_deviation(pr_box(n))
        report["monte_carlo"] = {
            "rounds": rounds,
            "max_sigma_deviation": deviation,
            "within_3_sigma": deviation <= 3,
            "marginal_alice": empirical.marginal_alice(1),
            "marginal_bob": empirical.marginal_bob(1),
        }
    return report
