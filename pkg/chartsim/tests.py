"""
chartsim tests - chart success probability, optimal mixtures, oracles, Monte Carlo.
"""

import math
from fractions import Fraction

import pytest
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from .services import (
    Chart,
    MixedStrategy,
    asymptotic_limit,
    lp_oracle,
    lp_solve,
    mixed_strategy_value,
    optimal_strategy,
    perp_success,
    perp_success_bruteforce,
    simulate_strategy,
    sweep_optimal,
)

P_GRID = [Fraction(k, 100) for k in range(51)]


class PerpSuccessTestCase(SimpleTestCase):
    """Test the single-chart success probability."""

    def test_degree_zero_and_one_always_succeed(self):
        """Test C_0 and C_1 never output (1,1) on distinct inputs."""
        for N in range(2, 10):
            self.assertEqual(perp_success(N, 0), 1)
            self.assertEqual(perp_success(N, 1), 1)

    def test_known_values(self):
        """Test the pentagon degree-2 chart and the saturated square."""
        self.assertEqual(perp_success(5, 2), Fraction(23, 25))
        self.assertEqual(perp_success(2, 2), Fraction(1, 2))

    def test_matches_enumeration(self):
        """Test the closed form against counting failing ordered pairs."""
        for N in range(2, 11):
            for M in range(N + 1):
                chart = Chart.canonical(N, M)
                self.assertEqual(perp_success(N, M), perp_success_bruteforce(chart))
                self.assertEqual(
                    perp_success(N, M), perp_success_bruteforce(chart.rotate(N // 2 + 1))
                )

    def test_degree_above_dimension_rejected(self):
        """Test M > N raises."""
        with self.assertRaises(ValidationError) as ctx:
            perp_success(4, 5)
        self.assertEqual(ctx.exception.code, "invalid_degree")

    def test_rotation_keeps_degree(self):
        """Test rotating a chart preserves its degree."""
        chart = Chart((1, 1, 0, 0, 0)).rotate(3)
        self.assertEqual(chart.assignment, (0, 0, 0, 1, 1))
        self.assertEqual(chart.degree, 2)


class OptimalStrategyTestCase(SimpleTestCase):
    """Test the optimal chart mixture and its value."""

    def test_perfect_simulation_at_one_over_n(self):
        """Test p = 1/N is simulated perfectly."""
        strategy, value = optimal_strategy(5, 0.2)
        self.assertEqual(value, 1)
        self.assertEqual(strategy.support, ((1, Fraction(1)),))

    def test_pentagon_half(self):
        """Test N=5, p=1/2 mixes C_2 and C_3 equally with value 21/25."""
        strategy, value = optimal_strategy(5, Fraction(1, 2))
        self.assertEqual(strategy.support, ((2, Fraction(1, 2)), (3, Fraction(1, 2))))
        self.assertEqual(value, Fraction(21, 25))
        self.assertEqual(mixed_strategy_value(5, strategy), value)

    def test_mixture_invariants(self):
        """Test weights sum to one and the mean degree is Np."""
        for N in range(2, 13):
            for p in P_GRID:
                strategy, _ = optimal_strategy(N, p)
                self.assertEqual(strategy.total_weight, 1)
                self.assertEqual(strategy.mean_degree, N * p)
                self.assertTrue(all(0 <= d <= N for d, _ in strategy.support))

    def test_large_dimension_close_to_three_quarters(self):
        """Test N=1000, p=1/2 is within 1e-3 of 0.75."""
        _, value = optimal_strategy(1000, Fraction(1, 2))
        self.assertLessEqual(abs(float(value) - 0.75), 1e-3)

    def test_marginal_out_of_range_rejected(self):
        """Test p outside [0, 1/2] raises."""
        with self.assertRaises(ValidationError) as ctx:
            optimal_strategy(5, 0.6)
        self.assertEqual(ctx.exception.code, "invalid_marginal")

    def test_value_equals_lp_oracle_on_grid(self):
        """Test the closed form equals the exact oracle on all 561 grid points."""
        mismatches = [
            (N, p)
            for N in range(2, 13)
            for p in P_GRID
            if optimal_strategy(N, p)[1] != lp_oracle(N, p)
        ]
        self.assertEqual(mismatches, [])

    def test_perfect_iff_p_at_most_one_over_n(self):
        """Test value = 1 exactly when p <= 1/N."""
        for N in range(2, 13):
            for p in P_GRID:
                _, value = optimal_strategy(N, p)
                self.assertEqual(value == 1, p <= Fraction(1, N), (N, p))

    def test_non_increasing_in_p(self):
        """Test the value never rises as p grows."""
        for N in range(2, 13):
            values = [optimal_strategy(N, p)[1] for p in P_GRID]
            self.assertTrue(all(a >= b for a, b in zip(values, values[1:])), N)

    def test_pentagon_beats_larger_dimensions(self):
        """Test value(5, p) >= value(N, p) for every N > 5."""
        for p in P_GRID:
            five = optimal_strategy(5, p)[1]
            for N in range(6, 13):
                self.assertGreaterEqual(five, optimal_strategy(N, p)[1], (N, p))

    def test_large_n_limit(self):
        """Test |value - (1 - p^2)| <= 2/N for large N."""
        for N in (50, 100, 500):
            for p in (Fraction(1, 10), Fraction(3, 10), Fraction(1, 2)):
                _, value = optimal_strategy(N, p)
                self.assertLessEqual(abs(value - asymptotic_limit(p)), Fraction(2, N))


class OracleTestCase(SimpleTestCase):
    """Test the LP oracles."""

    def test_zero_marginal(self):
        """Test p=0 gives value 1 through C_0."""
        for N in (2, 5, 9):
            self.assertEqual(lp_oracle(N, 0), 1)

    def test_pentagon_half(self):
        """Test the direct pair search gives 21/25."""
        self.assertEqual(lp_oracle(5, Fraction(1, 2)), Fraction(21, 25))

    def test_float_lp_agrees(self):
        """Test the HiGHS LP over all degrees matches the closed form."""
        for N, p in [(5, 0.5), (7, 0.33), (12, 0.27), (4, 0.1)]:
            value, weights = lp_solve(N, p)
            self.assertAlmostEqual(value, float(optimal_strategy(N, p)[1]), places=9)
            self.assertAlmostEqual(weights.sum(), 1.0, places=9)

    def test_asymptotic_limit(self):
        """Test 1 - p^2 at the ends of the range."""
        self.assertEqual(asymptotic_limit(0.5), 0.75)
        self.assertEqual(asymptotic_limit(0), 1)

    def test_closed_form_approaches_limit(self):
        """Test |value(N, 0.3) - 0.91| <= 2/N for N >= 50."""
        for N in (50, 64, 100, 250):
            _, value = optimal_strategy(N, Fraction(3, 10))
            self.assertLessEqual(abs(float(value) - 0.91), 2 / N)


class MonteCarloTestCase(SimpleTestCase):
    """Test the seeded chart simulation."""

    @pytest.mark.slow
    def test_pentagon_half_within_three_sigma(self):
        """Test 10^6 rounds at N=5, p=1/2 land within 3 sigma of 0.84."""
        rounds = 1_000_000
        result = simulate_strategy(5, 0.5, rounds, seed=7)
        sigma = math.sqrt(0.84 * 0.16 / rounds)
        self.assertLess(abs(result.success_rate - 0.84), 3 * sigma)
        self.assertLess(abs(result.marginal_one - 0.5), 3 * math.sqrt(0.25 / rounds))

    def test_perfect_case_never_fails(self):
        """Test p = 1/N succeeds in every round."""
        result = simulate_strategy(5, 0.2, 200_000, seed=1)
        self.assertEqual(result.success_rate, 1.0)

    def test_marginal_frequency(self):
        """Test the empirical rate of output 1 is close to p."""
        rounds = 200_000
        result = simulate_strategy(7, 0.3, rounds, seed=3)
        self.assertLess(abs(result.marginal_one - 0.3), 4 * math.sqrt(0.21 / rounds))

    def test_same_seed_reproduces(self):
        """Test identical seeds give identical counts."""
        first = simulate_strategy(6, 0.4, 10_000, seed=42)
        second = simulate_strategy(6, 0.4, 10_000, seed=42)
        self.assertEqual(first, second)

    def test_worker_split_keeps_round_count(self):
        """Test rounds split across workers add back up."""
        result = simulate_strategy(5, 0.5, 100_001, seed=5, workers=4)
        self.assertEqual(result.rounds, 100_001)
        self.assertLess(abs(result.success_rate - 0.84), 5 * result.sigma)

    def test_rounds_must_be_positive(self):
        """Test zero rounds raises."""
        with self.assertRaises(ValidationError):
            simulate_strategy(5, 0.5, 0, seed=1)

    @pytest.mark.slow
    def test_repeated_runs_rarely_exceed_four_sigma(self):
        """Test at most one of 100 seeded runs deviates by more than 4 sigma."""
        rounds = 20_000
        target = 0.84
        sigma = math.sqrt(target * (1 - target) / rounds)
        excursions = sum(
            abs(simulate_strategy(5, 0.5, rounds, seed=seed).success_rate - target) > 4 * sigma
            for seed in range(100)
        )
        self.assertLessEqual(excursions, 1)


class SweepTestCase(SimpleTestCase):
    """Test the optimal-simulation sweep rows."""

    def test_rows_sorted_and_consistent(self):
        """Test rows are sorted by (N, p) and closed form equals oracle."""
        rows = sweep_optimal([6, 5], [0.5, 0.1])
        self.assertEqual([(r.N, r.p) for r in rows], [
            (5, Fraction(1, 10)), (5, Fraction(1, 2)), (6, Fraction(1, 10)), (6, Fraction(1, 2)),
        ])
        self.assertTrue(all(r.closed_form == r.lp_oracle for r in rows))
        self.assertIsNone(rows[0].monte_carlo)

    def test_strategy_type_holds_support(self):
        """Test MixedStrategy exposes its mean."""
        strategy = MixedStrategy(((1, Fraction(1, 4)), (2, Fraction(3, 4))))
        self.assertEqual(strategy.mean_degree, Fraction(7, 4))
