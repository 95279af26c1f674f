"""
cvchain tests - packet lattice states, X(phi) and the chained expectation.
"""

import math
from fractions import Fraction

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from .services import (
    CVModel,
    LatticeState,
    build_states,
    cv_chained_closed_form,
    cv_chained_value,
    cv_joint_expectation,
    cv_report,
    effective_qubit,
    entangled_state,
    expectation,
    is_swap_antisymmetric,
    violation_crossover,
    x0_expectation_exact,
    x_phi,
)

ANGLES = [k * math.pi / 8 for k in range(16)]
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)


class LatticeStateTestCase(SimpleTestCase):
    """Test the packet states."""

    def test_single_pair(self):
        """Test M=1 puts 1/sqrt 2 on two adjacent packets."""
        _, _, plus, _ = build_states(1)
        support = plus.support()
        self.assertEqual(len(support), 2)
        self.assertEqual(support[1] - support[0], 1)
        for k in support:
            self.assertAlmostEqual(abs(plus.amplitude(k)), 1 / math.sqrt(2), delta=1e-15)

    def test_parity_classes(self):
        """Test psi0 sits on odd packets and psi1 on even packets."""
        psi0, psi1, _, _ = build_states(4)
        self.assertTrue(all(k % 2 == 1 for k in psi0.support()))
        self.assertTrue(all(k % 2 == 0 for k in psi1.support()))
        self.assertEqual(len(psi0.support()), 4)
        self.assertEqual(psi0.overlap(psi1), 0)

    def test_minus_alternates(self):
        """Test psi- changes sign between neighbouring packets."""
        _, _, _, minus = build_states(3)
        values = [minus.amplitude(k).real for k in minus.support()]
        self.assertEqual(len(values), 6)
        self.assertTrue(all(a * b < 0 for a, b in zip(values, values[1:])))

    def test_band_is_contiguous_inside_window(self):
        """Test the band leaves exactly one guard cell per side."""
        model = CVModel(5)
        _, _, plus, _ = build_states(5)
        lo, hi = model.window
        self.assertEqual(plus.support(), tuple(range(lo + 1, hi)))

    def test_unnormalised_state_rejected(self):
        """Test a non-unit vector raises."""
        with self.assertRaises(ValidationError) as ctx:
            LatticeState((0, 1), np.array([1.0, 1.0]))
        self.assertEqual(ctx.exception.code, "not_normalized")

    def test_model_needs_positive_m(self):
        """Test M=0 raises."""
        with self.assertRaises(ValidationError):
            CVModel(0)


class XOperatorTestCase(SimpleTestCase):
    """Test X(phi) on the window."""

    def test_zero_angle_is_x0(self):
        """Test X(0) is the averaged shift."""
        model = CVModel(3)
        np.testing.assert_allclose(x_phi(model, 0.0).toarray(), model.x0().toarray(), atol=1e-15)

    def test_hermitian_with_unit_radius(self):
        """Test every X(phi) is Hermitian with spectral radius at most 1."""
        model = CVModel(4)
        for phi in ANGLES:
            X = x_phi(model, phi).toarray()
            self.assertLessEqual(np.max(np.abs(X - X.conj().T)), 1e-12)
            self.assertLessEqual(np.max(np.abs(np.linalg.eigvalsh(X))), 1 + 1e-12)

    def test_banded_form_matches_conjugation(self):
        """Test the banded X(phi) equals U^dagger X(0) U built densely."""
        model = CVModel(3, offset=1)
        for phi in ANGLES:
            U = model.u(phi).toarray()
            dense = U.conj().T @ model.x0().toarray() @ U
            np.testing.assert_allclose(x_phi(model, phi).toarray(), dense, atol=1e-15)

    def test_operators_stay_sparse(self):
        """Test X(phi) keeps only the two neighbour bands."""
        model = CVModel(4096)
        self.assertEqual(x_phi(model, 0.7).nnz, 2 * (model.size - 1))

    def test_x0_expectations(self):
        """Test <psi+-|X(0)|psi+-> = +-(N-1)/N in floats."""
        for M in (1, 2, 4, 8, 32):
            model = CVModel(M)
            _, _, plus, minus = build_states(M)
            N = 2 * M
            self.assertAlmostEqual(expectation(plus, model.x0()), (N - 1) / N, delta=1e-12)
            self.assertAlmostEqual(expectation(minus, model.x0()), -(N - 1) / N, delta=1e-12)

    def test_x0_expectations_exact(self):
        """Test the rational values for M up to 64."""
        for M in range(1, 65):
            N = 2 * M
            self.assertEqual(x0_expectation_exact(M, 1), Fraction(N - 1, N))
            self.assertEqual(x0_expectation_exact(M, -1), -Fraction(N - 1, N))

    def test_effective_qubit(self):
        """Test the compression to span{psi0, psi1}."""
        for M in (1, 3, 8):
            model = CVModel(M)
            r = model.contrast
            for phi in ANGLES[:5]:
                expected = r * (math.cos(phi) * SIGMA_X - math.sin(phi) * SIGMA_Y)
                np.testing.assert_allclose(effective_qubit(model, phi), expected, atol=1e-12)


class JointExpectationTestCase(SimpleTestCase):
    """Test the entangled lattice state."""

    def test_swap_antisymmetric(self):
        """Test swapping the two modes flips the sign of the state."""
        for M in (1, 2, 5):
            psi = entangled_state(CVModel(M))
            self.assertTrue(is_swap_antisymmetric(psi))
            self.assertAlmostEqual(np.linalg.norm(psi), 1, delta=1e-12)

    def test_angle_grid(self):
        """Test -((N-1)/N)^2 cos(phi - theta) on a 16-angle grid."""
        for M in (1, 2, 4, 8):
            model = CVModel(M)
            r2 = model.contrast**2
            for phi in ANGLES:
                for theta in ANGLES:
                    self.assertAlmostEqual(
                        cv_joint_expectation(model, phi, theta),
                        -r2 * math.cos(phi - theta),
                        delta=1e-10,
                    )

    def test_quarter_turn_vanishes(self):
        """Test phi - theta = pi/2 gives zero."""
        self.assertAlmostEqual(cv_joint_expectation(CVModel(3), math.pi / 2, 0.0), 0, delta=1e-10)

    def test_eighth_turn_at_m_two(self):
        """Test M=2, phi - theta = pi/4 gives -(9/16) sqrt(2)/2."""
        value = cv_joint_expectation(CVModel(2), math.pi / 4, 0.0)
        self.assertAlmostEqual(value, -(9 / 16) * math.sqrt(2) / 2, delta=1e-12)

    def test_translation_invariance(self):
        """Test shifting the band leaves expectations unchanged."""
        for offset in (-3, 2, 11):
            shifted = CVModel(4, offset=offset)
            self.assertAlmostEqual(
                cv_joint_expectation(shifted, 0.3, 1.1),
                cv_joint_expectation(CVModel(4), 0.3, 1.1),
                delta=1e-12,
            )


class ChainedValueTestCase(SimpleTestCase):
    """Test the chained sum on the lattice."""

    def test_matches_closed_form(self):
        """Test -((N-1)/N)^2 n cos(pi/n) for M in 1..8 and n in {4, 6, 8}."""
        for M in range(1, 9):
            model = CVModel(M)
            for n in (4, 6, 8):
                self.assertAlmostEqual(
                    cv_chained_value(model, n), cv_chained_closed_form(M, n), delta=1e-9
                )

    def test_m_eight_square(self):
        """Test M=8, n=4 gives -(15/16)^2 2 sqrt 2."""
        value = cv_chained_value(CVModel(8), 4)
        self.assertAlmostEqual(value, -((15 / 16) ** 2) * 2 * math.sqrt(2), delta=1e-9)

    def test_large_m_approaches_quantum_maximum(self):
        """Test |value| tends to n cos(pi/n)."""
        value = cv_chained_value(CVModel(64), 4)
        self.assertLess(abs(abs(value) - 2 * math.sqrt(2)), 0.05)

    def test_largest_band(self):
        """Test the largest accepted M still matches the closed form."""
        value = cv_chained_value(CVModel(4096), 4)
        self.assertAlmostEqual(value, cv_chained_closed_form(4096, 4), delta=1e-9)

    def test_dense_state_agrees(self):
        """Test the product-term expectation against the dense amplitude matrix."""
        model = CVModel(3)
        psi = entangled_state(model)
        A, B = x_phi(model, 0.4).toarray(), x_phi(model, 1.3).toarray()
        dense = float(np.real(np.vdot(psi, A @ psi @ B.T)))
        self.assertAlmostEqual(cv_joint_expectation(model, 0.4, 1.3), dense, delta=1e-12)

    def test_odd_n_rejected(self):
        """Test odd n raises."""
        with self.assertRaises(ValidationError) as ctx:
            cv_chained_value(CVModel(2), 5)
        self.assertEqual(ctx.exception.code, "invalid_parity")

    def test_crossover_for_square(self):
        """Test n=4 first violates at M=4 (N=8)."""
        self.assertEqual(violation_crossover(4), 4)
        self.assertLess(abs(cv_chained_closed_form(3, 4)), 2)
        self.assertGreater(abs(cv_chained_closed_form(4, 4)), 2)

    def test_report(self):
        """Test the report fields and verdict."""
        report = cv_report(4, 2)
        self.assertEqual(report["N"], 4)
        self.assertEqual(report["classical_bound"], 2.0)
        self.assertFalse(report["violated"])
        self.assertEqual(report["crossover_M"], 4)
        self.assertAlmostEqual(report["limit"], 2 * math.sqrt(2))
