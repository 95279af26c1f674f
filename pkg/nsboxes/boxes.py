"""
Bipartite two-outcome no-signalling boxes.

A box is a table of 2x2 blocks P(a, b | x, y) indexed by 1-based input pairs.
Boxes built from rational parameters keep ``Fraction`` entries so that
constructions and reductions can be compared exactly; everything else is float.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from django.core.exceptions import ValidationError

logger = logging.getLogger(__name__)

Prob = Union[Fraction, float]
Block = Tuple[Tuple[Prob, Prob], Tuple[Prob, Prob]]
InputPair = Tuple[int, int]

FLOAT_TOL = 1e-12
OUTCOMES = ((0, 0), (0, 1), (1, 0), (1, 1))


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator used for every Monte Carlo stream."""
    return np.random.Generator(np.random.Philox(seed))


def spawn_rngs(seed: int, count: int) -> List[np.random.Generator]:
    """Independent worker streams derived from one seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def as_probability(value: Any, exact: bool) -> Prob:
    if exact:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, int):
            return Fraction(value)
        return Fraction(str(value))
    return float(value)


@dataclass(frozen=True)
class Box:
    """Conditional probability table P(a,b|x,y) with 1-indexed inputs."""

    n_inputs_alice: int
    n_inputs_bob: int
    table: Mapping[InputPair, Block] = field(repr=False)
    exact: bool = False

    def __post_init__(self):
        if self.n_inputs_alice < 1 or self.n_inputs_bob < 1:
            raise ValidationError(
                "a box needs at least one input per party", code="invalid_dimension"
            )
        expected = {
            (x, y)
            for x in range(1, self.n_inputs_alice + 1)
            for y in range(1, self.n_inputs_bob + 1)
        }
        if set(self.table) != expected:
            raise ValidationError(
                "table must hold exactly one block per input pair", code="malformed"
            )
        for (x, y), block in self.table.items():
            entries = [block[a][b] for a, b in OUTCOMES]
            if any(entry < 0 or entry > 1 for entry in entries):
                raise ValidationError(
                    f"block ({x},{y}) has an entry outside [0, 1]",
                    code="negative_entry",
                )
            total = sum(entries)
            off = total != 1 if self.exact else abs(total - 1) > FLOAT_TOL
            if off:
                raise ValidationError(
                    f"block ({x},{y}) sums to {total}, not 1", code="not_normalized"
                )

    def block(self, x: int, y: int) -> Block:
        self._check_inputs(x, y)
        return self.table[(x, y)]

    def prob(self, a: int, b: int, x: int, y: int) -> Prob:
        return self.block(x, y)[a][b]

    def marginal_alice(self, x: int, a: int, y: int = 1) -> Prob:
        """P(a|x) read through Bob's input ``y``."""
        row = self.block(x, y)[a]
        return row[0] + row[1]

    def marginal_bob(self, y: int, b: int, x: int = 1) -> Prob:
        """P(b|y) read through Alice's input ``x``."""
        blk = self.block(x, y)
        return blk[0][b] + blk[1][b]

    def correlator(self, x: int, y: int) -> Prob:
        """P(a=b) - P(a!=b) for the input pair."""
        blk = self.block(x, y)
        return blk[0][0] + blk[1][1] - blk[0][1] - blk[1][0]

    def flip_bob(self) -> "Box":
        table = {
            key: ((blk[0][1], blk[0][0]), (blk[1][1], blk[1][0]))
            for key, blk in self.table.items()
        }
        return Box(self.n_inputs_alice, self.n_inputs_bob, table, self.exact)

    def relabel(self, alice_map: Mapping[int, int], bob_map: Mapping[int, int]) -> "Box":
        """Box whose input (x, y) plays this box at (alice_map[x], bob_map[y])."""
        table = {
            (x, y): self.block(alice_map[x], bob_map[y])
            for x in alice_map
            for y in bob_map
        }
        return Box(len(alice_map), len(bob_map), table, self.exact)

    def to_float(self) -> "Box":
        table = {
            key: tuple(tuple(float(v) for v in row) for row in blk)
            for key, blk in self.table.items()
        }
        return Box(self.n_inputs_alice, self.n_inputs_bob, table, exact=False)

    def _check_inputs(self, x: int, y: int) -> None:
        if not (1 <= x <= self.n_inputs_alice and 1 <= y <= self.n_inputs_bob):
            raise ValidationError(
                f"input pair ({x},{y}) outside 1..{self.n_inputs_alice} x "
                f"1..{self.n_inputs_bob}",
                code="input_out_of_range",
            )


def ks_box(N: int, p: Any, exact: Optional[bool] = None) -> Box:
    """N-dimensional KS box with marginal ``p`` for output 1.

    Diagonal blocks are [1-p, 0; 0, p] and off-diagonal blocks
    [1-2p, p; p, 0].  Exact mode is used when ``p`` is an int or Fraction
    unless ``exact`` says otherwise.
    """
    if N < 2:
        raise ValidationError(
            f"KS box dimension must be at least 2, got {N}", code="invalid_dimension"
        )
    if exact is None:
        exact = isinstance(p, (int, Fraction))
    p = as_probability(p, exact)
    if p < 0 or p > Fraction(1, 2):
        raise ValidationError(
            f"marginal p={p} outside [0, 1/2]", code="invalid_marginal"
        )

    one = as_probability(1, exact)
    zero = as_probability(0, exact)
    diagonal = ((one - p, zero), (zero, p))
    off_diagonal = ((one - 2 * p, p), (p, zero))
    table = {
        (x, y): diagonal if x == y else off_diagonal
        for x in range(1, N + 1)
        for y in range(1, N + 1)
    }
    logger.debug("built KS box N=%s p=%s exact=%s", N, p, exact)
    return Box(N, N, table, exact)


def pr_box(n: int) -> Box:
    """Generalised PR box: anti-correlated at (1,1), correlated elsewhere."""
    if n < 2:
        raise ValidationError(
            f"PR box needs at least 2 inputs, got {n}", code="invalid_dimension"
        )
    half = Fraction(1, 2)
    zero = Fraction(0)
    correlated = ((half, zero), (zero, half))
    anti = ((zero, half), (half, zero))
    table = {
        (x, y): anti if (x, y) == (1, 1) else correlated
        for x in range(1, n + 1)
        for y in range(1, n + 1)
    }
    return Box(n, n, table, exact=True)


def chart_box(assignment: Sequence[int]) -> Box:
    """Deterministic box of both parties answering from one shared chart."""
    N = len(assignment)
    if N < 1 or any(bit not in (0, 1) for bit in assignment):
        raise ValidationError("a chart is a non-empty 0/1 sequence", code="malformed")
    table = {}
    for x in range(1, N + 1):
        for y in range(1, N + 1):
            a, b = assignment[x - 1], assignment[y - 1]
            rows = [[Fraction(0), Fraction(0)], [Fraction(0), Fraction(0)]]
            rows[a][b] = Fraction(1)
            table[(x, y)] = (tuple(rows[0]), tuple(rows[1]))
    return Box(N, N, table, exact=True)


@dataclass(frozen=True)
class NoSignallingReport:
    passed: bool
    deviation: Prob
    worst: Optional[Tuple[str, int, int]] = None  # (party, own input, outcome)


def check_no_signalling(b: Box, tol: float = FLOAT_TOL) -> NoSignallingReport:
    """Largest change of either party's marginal over the other party's inputs.

    In exact mode ``tol`` is ignored and the comparison is equality.
    """
    worst_dev: Prob = Fraction(0) if b.exact else 0.0
    worst = None
    for x in range(1, b.n_inputs_alice + 1):
        for a in (0, 1):
            values = [b.marginal_alice(x, a, y) for y in range(1, b.n_inputs_bob + 1)]
            dev = max(values) - min(values)
            if dev > worst_dev:
                worst_dev, worst = dev, ("alice", x, a)
    for y in range(1, b.n_inputs_bob + 1):
        for bb in (0, 1):
            values = [b.marginal_bob(y, bb, x) for x in range(1, b.n_inputs_alice + 1)]
            dev = max(values) - min(values)
            if dev > worst_dev:
                worst_dev, worst = dev, ("bob", y, bb)
    passed = worst_dev == 0 if b.exact else worst_dev <= tol
    if not passed:
        logger.info("signalling box: deviation %s at %s", worst_dev, worst)
    return NoSignallingReport(passed=passed, deviation=worst_dev, worst=worst)


@dataclass(frozen=True)
class PerpReport:
    holds_equal_inputs: bool
    holds_product_zero: bool
    offending_entries: List[Tuple[int, int, int, int, Prob]]

    @property
    def holds(self) -> bool:
        return self.holds_equal_inputs and self.holds_product_zero


def check_perp(b: Box) -> PerpReport:
    """Supported events breaking a=b for x=y or a*b=0 for x!=y."""
    offending = []
    equal_ok = True
    product_ok = True
    for (x, y), blk in sorted(b.table.items()):
        for a, bb in OUTCOMES:
            prob = blk[a][bb]
            if prob == 0:
                continue
            if x == y and a != bb:
                equal_ok = False
                offending.append((x, y, a, bb, prob))
            elif x != y and a * bb == 1:
                product_ok = False
                offending.append((x, y, a, bb, prob))
    return PerpReport(equal_ok, product_ok, offending)


def validate(b: Box, tol: float = FLOAT_TOL) -> None:
    """Raise unless ``b`` is no-signalling."""
    report = check_no_signalling(b, tol)
    if not report.passed:
        raise ValidationError(
            f"box signals: marginal deviation {report.deviation} at {report.worst}",
            code="signalling",
        )


def _block_weights(b: Box, x: int, y: int) -> np.ndarray:
    blk = b.block(x, y)
    weights = np.array([float(blk[a][bb]) for a, bb in OUTCOMES])
    return weights / weights.sum()


def sample(b: Box, x: int, y: int, rng: np.random.Generator) -> Tuple[int, int]:
    """One outcome pair drawn from block (x, y)."""
    index = rng.choice(4, p=_block_weights(b, x, y))
    return OUTCOMES[int(index)]


def sample_many(
    b: Box, x: int, y: int, size: int, rng: np.random.Generator
) -> np.ndarray:
    """``size`` outcome pairs from block (x, y) as an array of shape (size, 2)."""
    if size < 1:
        raise ValidationError("sample size must be positive", code="invalid_rounds")
    index = rng.choice(4, size=size, p=_block_weights(b, x, y))
    return np.array(OUTCOMES, dtype=np.int8)[index]


def _encode_prob(value: Prob) -> Union[str, float]:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return float(value)


def _decode_prob(value: Any) -> Tuple[Prob, bool]:
    if isinstance(value, str):
        return Fraction(value), True
    return float(value), False


def box_to_dict(b: Box) -> Dict[str, Any]:
    return {
        "n_alice": b.n_inputs_alice,
        "n_bob": b.n_inputs_bob,
        "blocks": [
            {
                "x": x,
                "y": y,
                "p": [[_encode_prob(v) for v in row] for row in blk],
            }
            for (x, y), blk in sorted(b.table.items())
        ],
    }


def box_from_dict(data: Mapping[str, Any]) -> Box:
    """Decode a box written by ``box_to_dict``; signalling tables are rejected."""
    try:
        n_alice = int(data["n_alice"])
        n_bob = int(data["n_bob"])
        table: Dict[InputPair, Block] = {}
        modes = set()
        for entry in data["blocks"]:
            x, y = int(entry["x"]), int(entry["y"])
            p = entry["p"]
            if len(p) != 2 or any(len(row) != 2 for row in p):
                raise ValidationError(f"block ({x},{y}) is not 2x2", code="malformed")
            rows = []
            for row in p:
                decoded = [_decode_prob(v) for v in row]
                modes.update(flag for _, flag in decoded)
                rows.append(tuple(v for v, _ in decoded))
            table[(x, y)] = (rows[0], rows[1])
    except (KeyError, TypeError, ValueError, IndexError, ZeroDivisionError) as exc:
        raise ValidationError(f"malformed box JSON: {exc}", code="malformed") from exc

    exact = modes == {True}
    if not exact:
        table = {
            key: tuple(tuple(float(v) for v in row) for row in blk)
            for key, blk in table.items()
        }
    box = Box(n_alice, n_bob, table, exact)
    validate(box)
    return box
