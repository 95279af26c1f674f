"""
nsboxes tests - KS and PR box construction, no-signalling and perp checks, sampling.
"""

import json
import math
from fractions import Fraction

import numpy as np
import pytest
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from .boxes import (
    Box,
    box_from_dict,
    box_to_dict,
    chart_box,
    check_no_signalling,
    check_perp,
    ks_box,
    make_rng,
    pr_box,
    sample,
    sample_many,
    spawn_rngs,
)

HALF = Fraction(1, 2)


def _signalling_box():
    """Alice's marginals are flat, Bob's marginal on y=2 depends on x."""
    one, zero = Fraction(1), Fraction(0)
    table = {
        (1, 1): ((one, zero), (zero, zero)),
        (1, 2): ((zero, one), (zero, zero)),
        (2, 1): ((one, zero), (zero, zero)),
        (2, 2): ((one, zero), (zero, zero)),
    }
    return Box(2, 2, table, exact=True)


class KSBoxTestCase(SimpleTestCase):
    """Test the KS_p box constructor."""

    def test_two_dimensional_half_box_matches_table(self):
        """Test diagonal and off-diagonal blocks at N=2, p=1/2."""
        box = ks_box(2, HALF)
        self.assertEqual(box.block(1, 1), ((HALF, 0), (0, HALF)))
        self.assertEqual(box.block(2, 2), ((HALF, 0), (0, HALF)))
        self.assertEqual(box.block(1, 2), ((0, HALF), (HALF, 0)))
        self.assertEqual(box.block(2, 1), ((0, HALF), (HALF, 0)))

    def test_zero_marginal_is_deterministic_zero(self):
        """Test every block is [1,0;0,0] when p=0."""
        box = ks_box(3, 0)
        for blk in box.table.values():
            self.assertEqual(blk, ((1, 0), (0, 0)))

    def test_marginal_of_output_one(self):
        """Test P(a=1|x) equals p for every input."""
        box = ks_box(5, Fraction(1, 5))
        for x in range(1, 6):
            for y in range(1, 6):
                self.assertEqual(box.marginal_alice(x, 1, y), Fraction(1, 5))
                self.assertEqual(box.marginal_bob(y, 1, x), Fraction(1, 5))

    def test_rational_parameters_give_exact_mode(self):
        """Test Fraction/int marginals keep exact entries."""
        self.assertTrue(ks_box(4, Fraction(3, 8)).exact)
        self.assertFalse(ks_box(4, 0.375).exact)
        self.assertEqual(ks_box(4, 0.3, exact=True).prob(1, 0, 1, 2), Fraction(3, 10))

    def test_marginal_above_half_rejected(self):
        """Test p > 1/2 raises the invalid-marginal error."""
        with self.assertRaises(ValidationError) as ctx:
            ks_box(3, 0.7)
        self.assertEqual(ctx.exception.code, "invalid_marginal")

    def test_negative_marginal_rejected(self):
        """Test p < 0 raises the invalid-marginal error."""
        with self.assertRaises(ValidationError) as ctx:
            ks_box(3, Fraction(-1, 10))
        self.assertEqual(ctx.exception.code, "invalid_marginal")

    def test_dimension_below_two_rejected(self):
        """Test N < 2 raises the invalid-dimension error."""
        with self.assertRaises(ValidationError) as ctx:
            ks_box(1, Fraction(1, 4))
        self.assertEqual(ctx.exception.code, "invalid_dimension")

    def test_perp_holds_on_grid(self):
        """Test both KS conditions for N in [2, 20] and p in multiples of 1/8."""
        for N in range(2, 21):
            for k in range(5):
                report = check_perp(ks_box(N, Fraction(k, 8)))
                self.assertTrue(report.holds, (N, k))
                self.assertEqual(report.offending_entries, [])

    def test_no_signalling_exact(self):
        """Test exact KS boxes have zero marginal deviation."""
        report = check_no_signalling(ks_box(5, Fraction(3, 10)))
        self.assertTrue(report.passed)
        self.assertEqual(report.deviation, 0)

    def test_no_signalling_float(self):
        """Test float KS boxes stay within the float tolerance."""
        report = check_no_signalling(ks_box(5, 0.3))
        self.assertTrue(report.passed)
        self.assertLessEqual(report.deviation, 1e-12)

    def test_correlator_of_off_diagonal_block(self):
        """Test P(a=b) - P(a!=b) is 1-4p off the diagonal and 1 on it."""
        box = ks_box(4, Fraction(1, 3))
        self.assertEqual(box.correlator(1, 2), Fraction(-1, 3))
        self.assertEqual(box.correlator(3, 3), 1)


class PRBoxTestCase(SimpleTestCase):
    """Test the generalised PR box."""

    def setUp(self):
        self.box = pr_box(4)

    def test_anti_correlated_at_one_one(self):
        """Test outputs differ at input pair (1,1)."""
        self.assertEqual(self.box.block(1, 1), ((0, HALF), (HALF, 0)))

    def test_correlated_elsewhere(self):
        """Test outputs agree for every other input pair."""
        self.assertEqual(self.box.block(1, 2), ((HALF, 0), (0, HALF)))
        self.assertEqual(self.box.block(4, 3), ((HALF, 0), (0, HALF)))

    def test_uniform_marginals(self):
        """Test every marginal is exactly 1/2."""
        for x in range(1, 5):
            for y in range(1, 5):
                self.assertEqual(self.box.marginal_alice(x, 0, y), HALF)
                self.assertEqual(self.box.marginal_bob(y, 1, x), HALF)
        self.assertTrue(check_no_signalling(self.box).passed)

    def test_dimension_below_two_rejected(self):
        """Test n < 2 raises the invalid-dimension error."""
        with self.assertRaises(ValidationError) as ctx:
            pr_box(1)
        self.assertEqual(ctx.exception.code, "invalid_dimension")

    def test_perp_report_flags_one_one(self):
        """Test the equal-input condition fails only at (1,1)."""
        report = check_perp(pr_box(3))
        self.assertFalse(report.holds_equal_inputs)
        equal_input_offenders = [e for e in report.offending_entries if e[0] == e[1]]
        self.assertEqual(equal_input_offenders, [(1, 1, 0, 1, HALF), (1, 1, 1, 0, HALF)])


class SignallingTestCase(SimpleTestCase):
    """Test detection of signalling tables and chart boxes."""

    def test_hand_built_table_signals_through_bob(self):
        """Test Bob's marginal on y=2 depends on Alice's input."""
        report = check_no_signalling(_signalling_box())
        self.assertFalse(report.passed)
        self.assertEqual(report.deviation, 1)
        self.assertEqual(report.worst, ("bob", 2, 0))

    def test_chart_of_degree_two_breaks_product_zero(self):
        """Test a C_2 chart with ones on vertices 2 and 5 fails only there."""
        report = check_perp(chart_box([0, 1, 0, 0, 1]))
        self.assertTrue(report.holds_equal_inputs)
        self.assertFalse(report.holds_product_zero)
        self.assertEqual(report.offending_entries, [(2, 5, 1, 1, 1), (5, 2, 1, 1, 1)])

    def test_unnormalised_block_rejected(self):
        """Test a block that does not sum to one is refused."""
        table = {(1, 1): ((Fraction(1, 2), 0), (0, Fraction(1, 4)))}
        with self.assertRaises(ValidationError) as ctx:
            Box(1, 1, table, exact=True)
        self.assertEqual(ctx.exception.code, "not_normalized")


class SamplingTestCase(SimpleTestCase):
    """Test seeded sampling from box blocks."""

    def test_equal_inputs_give_equal_outputs(self):
        """Test a=b always at x=y for KS_{1/2}."""
        draws = sample_many(ks_box(5, HALF), 3, 3, 5000, make_rng(11))
        self.assertTrue(np.all(draws[:, 0] == draws[:, 1]))

    def test_single_draw_is_an_outcome_pair(self):
        """Test one draw returns a pair of bits."""
        a, b = sample(ks_box(5, HALF), 1, 2, make_rng(3))
        self.assertIn((a, b), [(0, 1), (1, 0)])

    def test_same_seed_same_stream(self):
        """Test identical seeds reproduce identical outcome sequences."""
        box = ks_box(5, 0.3)
        first = sample_many(box, 1, 2, 1000, make_rng(2024))
        second = sample_many(box, 1, 2, 1000, make_rng(2024))
        np.testing.assert_array_equal(first, second)

    def test_spawned_streams_differ(self):
        """Test worker streams derived from one seed are independent."""
        rng_a, rng_b = spawn_rngs(5, 2)
        self.assertFalse(np.array_equal(rng_a.random(8), rng_b.random(8)))

    def test_out_of_range_input_rejected(self):
        """Test sampling outside the input range raises."""
        with self.assertRaises(ValidationError) as ctx:
            sample(ks_box(3, HALF), 4, 1, make_rng(1))
        self.assertEqual(ctx.exception.code, "input_out_of_range")

    @pytest.mark.slow
    def test_frequency_matches_table_entry(self):
        """Test the (1,0) frequency at (1,2) is within 3 sigma of p."""
        rounds = 1_000_000
        draws = sample_many(ks_box(5, 0.3), 1, 2, rounds, make_rng(99))
        freq = np.mean((draws[:, 0] == 1) & (draws[:, 1] == 0))
        sigma = math.sqrt(0.3 * 0.7 / rounds)
        self.assertLess(abs(freq - 0.3), 3 * sigma)

    @pytest.mark.slow
    def test_every_entry_matches_table(self):
        """Test all four frequencies of a diagonal and an off-diagonal block."""
        rounds = 1_000_000
        box = ks_box(5, 0.3)
        for x, y in ((2, 2), (2, 4)):
            draws = sample_many(box, x, y, rounds, make_rng(17 + y))
            block = box.block(x, y)
            for a, b in ((0, 0), (0, 1), (1, 0), (1, 1)):
                p = float(block[a][b])
                count = int(np.sum((draws[:, 0] == a) & (draws[:, 1] == b)))
                if p == 0:
                    self.assertEqual(count, 0, f"({a},{b}) drawn at ({x},{y})")
                    continue
                sigma = math.sqrt(p * (1 - p) / rounds)
                self.assertLess(abs(count / rounds - p), 3 * sigma)


class BoxSerializationTestCase(SimpleTestCase):
    """Test the JSON interface for boxes."""

    def test_exact_entries_serialise_as_fractions(self):
        """Test rational entries are written as num/den strings."""
        data = box_to_dict(ks_box(2, Fraction(1, 3)))
        first = data["blocks"][0]
        self.assertEqual((first["x"], first["y"]), (1, 1))
        self.assertEqual(first["p"], [["2/3", "0/1"], ["0/1", "1/3"]])

    def test_float_entries_serialise_as_numbers(self):
        """Test float boxes keep numeric entries."""
        data = box_to_dict(ks_box(2, 0.25))
        self.assertEqual(data["blocks"][1]["p"], [[0.5, 0.25], [0.25, 0.0]])

    def test_decoding_keeps_mode(self):
        """Test a JSON document decodes back to an equal exact box."""
        box = pr_box(3)
        decoded = box_from_dict(json.loads(json.dumps(box_to_dict(box))))
        self.assertTrue(decoded.exact)
        self.assertEqual(decoded, box)

    def test_malformed_document_rejected(self):
        """Test missing keys raise the malformed error."""
        with self.assertRaises(ValidationError) as ctx:
            box_from_dict({"n_alice": 2})
        self.assertEqual(ctx.exception.code, "malformed")

    def test_short_block_row_rejected(self):
        """Test a block that is not 2x2 raises the malformed error."""
        data = {"n_alice": 1, "n_bob": 1, "blocks": [{"x": 1, "y": 1, "p": [[1], [0]]}]}
        with self.assertRaises(ValidationError) as ctx:
            box_from_dict(data)
        self.assertEqual(ctx.exception.code, "malformed")

    def test_signalling_document_rejected(self):
        """Test a table whose marginals depend on the other input raises."""
        data = box_to_dict(_signalling_box())
        with self.assertRaises(ValidationError) as ctx:
            box_from_dict(data)
        self.assertEqual(ctx.exception.code, "signalling")
