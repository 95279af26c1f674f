"""
reduction tests - relabel maps, exact PR-from-KS composition, thresholds.
"""

import math
from fractions import Fraction

import pytest
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from nsboxes.boxes import make_rng, pr_box

from .services import (
    chained_value_from_ks,
    derived_pr_box,
    ks_chained_settings,
    marginal_thresholds,
    reduction_report,
    relabel_map,
    simulate_chained_from_ks,
    simulate_pr_from_ks,
    threshold_sweep,
)


class RelabelMapTestCase(SimpleTestCase):
    """Test the input relabelling."""

    def test_three_inputs(self):
        """Test the n=3 maps."""
        maps = relabel_map(3)
        self.assertEqual(maps.alice, {1: 1, 2: 2, 3: 4})
        self.assertEqual(maps.bob, {1: 1, 2: 3, 3: 5})

    def test_only_first_pair_collides(self):
        """Test (1,1) is the only pair sharing a KS input."""
        for n in range(2, 21):
            maps = relabel_map(n)
            self.assertEqual(maps.collisions(), [(1, 1)])
            self.assertEqual(max(maps.bob.values()), 2 * n - 1)

    def test_dimension_one_rejected(self):
        """Test n < 2 raises."""
        with self.assertRaises(ValidationError) as ctx:
            relabel_map(1)
        self.assertEqual(ctx.exception.code, "invalid_dimension")


class DerivedBoxTestCase(SimpleTestCase):
    """Test the exact composition."""

    def test_equals_pr_box(self):
        """Test derived_pr_box(n) == pr_box(n) for n in 2..12."""
        for n in range(2, 13):
            derived = derived_pr_box(n)
            self.assertTrue(derived.exact)
            self.assertEqual(derived, pr_box(n), n)

    def test_first_pair_always_differs(self):
        """Test input (1,1) gives different outputs with probability 1."""
        box = derived_pr_box(4)
        self.assertEqual(box.prob(0, 1, 1, 1) + box.prob(1, 0, 1, 1), 1)

    def test_report(self):
        """Test the report flags the match and records the KS dimension."""
        report = reduction_report(3)
        self.assertTrue(report["matches_pr"])
        self.assertEqual(report["ks_dimension"], 5)
        self.assertEqual(len(report["derived_box"]["blocks"]), 9)
        self.assertNotIn("monte_carlo", report)


class PRMonteCarloTestCase(SimpleTestCase):
    """Test the sampled reduction."""

    @pytest.mark.slow
    def test_million_rounds_within_three_sigma(self):
        """Test every block entry lands within 3 sigma at n=2."""
        empirical = simulate_pr_from_ks(2, 1_000_000, make_rng(2019))
        self.assertEqual(empirical.rounds, 1_000_000)
        self.assertLessEqual(empirical.max_sigma_deviation(pr_box(2)), 3)
        sigma = math.sqrt(0.25 / 1_000_000)
        self.assertLess(abs(empirical.marginal_alice(1) - 0.5), 3 * sigma)
        self.assertLess(abs(empirical.marginal_bob(1) - 0.5), 3 * sigma)

    def test_impossible_outcomes_never_drawn(self):
        """Test zero-probability entries stay at zero."""
        empirical = simulate_pr_from_ks(3, 20_000, make_rng(1))
        box = empirical.to_box()
        self.assertEqual(box.prob(0, 0, 1, 1), 0)
        self.assertEqual(box.prob(0, 1, 2, 3), 0)

    def test_seed_reproduces(self):
        """Test equal seeds give equal counts."""
        first = simulate_pr_from_ks(2, 5_000, make_rng(9))
        second = simulate_pr_from_ks(2, 5_000, make_rng(9))
        self.assertTrue((first.counts == second.counts).all())

    def test_report_with_rounds(self):
        """Test the Monte Carlo section of the report."""
        report = reduction_report(2, rounds=50_000, seed=3)
        self.assertEqual(report["monte_carlo"]["rounds"], 50_000)
        self.assertNotEqual(report["monte_carlo"]["max_sigma_deviation"], math.inf)


class ThresholdTestCase(SimpleTestCase):
    """Test the marginal thresholds and the chained value of the KS strategy."""

    def test_square_thresholds(self):
        """Test n=4 gives (1/3, 0.402369, 1/2)."""
        p_c, p_q, p_ns = marginal_thresholds(4)
        self.assertEqual(p_c, Fraction(1, 3))
        self.assertAlmostEqual(p_q, 0.402369, places=6)
        self.assertEqual(p_ns, Fraction(1, 2))

    def test_values_at_thresholds(self):
        """Test the bounds n-2, n cos(pi/n) and n are met exactly."""
        for n in range(4, 101, 2):
            p_c, p_q, p_ns = marginal_thresholds(n)
            self.assertEqual(chained_value_from_ks(n, p_c), n - 2)
            self.assertAlmostEqual(chained_value_from_ks(n, p_q), n * math.cos(math.pi / n), delta=1e-12)
            self.assertEqual(chained_value_from_ks(n, p_ns), n)

    def test_ordering_and_limit(self):
        """Test p_c < p_q < 1/2 and all within 0.01 of 1/2 at n=400."""
        for n in range(4, 401, 2):
            p_c, p_q, p_ns = marginal_thresholds(n)
            self.assertLess(p_c, p_q)
            self.assertLess(p_q, p_ns)
        p_c, p_q, p_ns = marginal_thresholds(400)
        self.assertLess(0.5 - p_c, 0.01)
        self.assertLess(0.5 - p_q, 0.01)

    def test_gaps_shrink(self):
        """Test both gaps to 1/2 shrink and their ratio strictly decreases."""
        rows = threshold_sweep(range(4, 201, 2))
        gaps_c = [0.5 - float(r.p_c) for r in rows]
        gaps_q = [0.5 - r.p_q for r in rows]
        ratios = [q / c for q, c in zip(gaps_q, gaps_c)]
        self.assertTrue(all(a > b for a, b in zip(gaps_c, gaps_c[1:])))
        self.assertTrue(all(a > b for a, b in zip(gaps_q, gaps_q[1:])))
        self.assertTrue(all(a > b for a, b in zip(ratios, ratios[1:])))
        for n, gap_c, gap_q in zip(range(4, 201, 2), gaps_c, gaps_q):
            self.assertAlmostEqual(gap_c, 1 / (2 * (n - 1)), delta=1e-15)
            c = math.cos(math.pi / n)
            self.assertAlmostEqual(gap_q, n * (1 - c) / (4 * (n - 1)), delta=1e-14)

    def test_affine_in_p(self):
        """Test the value rises by 4(n-1) per unit of p."""
        slope = chained_value_from_ks(6, Fraction(1, 4)) - chained_value_from_ks(6, Fraction(0))
        self.assertEqual(slope, Fraction(5))

    def test_rejects_bad_inputs(self):
        """Test odd n and out-of-range p raise."""
        with self.assertRaises(ValidationError) as ctx:
            marginal_thresholds(5)
        self.assertEqual(ctx.exception.code, "invalid_parity")
        with self.assertRaises(ValidationError) as ctx:
            chained_value_from_ks(4, 0.6)
        self.assertEqual(ctx.exception.code, "invalid_marginal")


class ChainedMonteCarloTestCase(SimpleTestCase):
    """Test the sampled chained value of the KS strategy."""

    def test_settings_close_the_chain_on_input_one(self):
        """Test Alice's last setting reuses KS input 1."""
        alice, bob = ks_chained_settings(6)
        self.assertEqual(alice, {2: 2, 4: 4, 6: 1})
        self.assertEqual(bob, {1: 1, 3: 3, 5: 5})

    def test_closing_term_is_deterministic(self):
        """Test the shared-input term always reads -1 after the flip."""
        result = simulate_chained_from_ks(4, 0.3, 4_000, make_rng(5))
        self.assertEqual(result.terms[-1], -1.0)

    @pytest.mark.slow
    def test_matches_bridge_formula(self):
        """Test 10^6 rounds land within 3 sigma of (n-1)(4p-1)+1."""
        for seed, (n, p) in enumerate([(4, 0.3), (4, 0.45), (8, 0.3), (8, 0.45)]):
            result = simulate_chained_from_ks(n, p, 1_000_000, make_rng(100 + seed))
            expected = chained_value_from_ks(n, p)
            self.assertLess(abs(result.value - expected), 3 * result.sigma, (n, p))
