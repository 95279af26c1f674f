"""
ncycle tests - eigensolver, density matrices, KCBS odd cycle, chained Bell even cycle.
"""

import math

import numpy as np
import pytest
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from nsboxes.boxes import make_rng

from .linalg import (
    DensityMatrix,
    eigenvalues_hermitian,
    qutrit_basis,
    random_density_matrix,
    singlet,
)
from .services import (
    SIGMA_X,
    SIGMA_Z,
    chained_bounds,
    chained_closed_form,
    chained_model,
    chained_necessary_condition,
    chained_terms,
    chained_value,
    chained_violation,
    kcbs_bounds,
    kcbs_model,
    kcbs_threshold,
    kcbs_value,
    kcbs_violation,
    lovasz_theta_odd_cycle,
)

ODD_N = range(5, 52, 2)
EVEN_N = range(4, 21, 2)


class EigensolverTestCase(SimpleTestCase):
    """Test the cyclic Jacobi eigensolver."""

    def test_identity(self):
        """Test the 4x4 identity has four unit eigenvalues."""
        result = eigenvalues_hermitian(np.eye(4))
        np.testing.assert_allclose(result.eigenvalues, [1, 1, 1, 1], atol=1e-12)

    def test_diagonal_fixed_point(self):
        """Test a diagonal matrix returns its sorted diagonal."""
        result = eigenvalues_hermitian(np.diag([1.0, 3.0, -2.0]))
        np.testing.assert_allclose(result.eigenvalues, [3, 1, -2], atol=1e-12)
        self.assertEqual(result.sweeps, 0)

    def test_complex_hermitian(self):
        """Test sigma_y has eigenvalues +1 and -1."""
        result = eigenvalues_hermitian(np.array([[0, -1j], [1j, 0]]))
        np.testing.assert_allclose(result.eigenvalues, [1, -1], atol=1e-12)

    def test_matches_characteristic_polynomial(self):
        """Test random real symmetric 3x3 spectra against cubic roots."""
        rng = make_rng(31)
        for _ in range(50):
            G = rng.normal(size=(3, 3))
            A = (G + G.T) / 2
            tr = np.trace(A)
            minors = (tr**2 - np.trace(A @ A)) / 2
            roots = np.sort(np.roots([1.0, -tr, minors, -np.linalg.det(A)]).real)[::-1]
            result = eigenvalues_hermitian(A)
            np.testing.assert_allclose(result.eigenvalues, roots, atol=1e-8)

    def test_trace_and_residual(self):
        """Test eigenvalues sum to the trace and rotations stay orthogonal."""
        rng = make_rng(8)
        for dim in (2, 3, 4, 6, 8):
            rho = random_density_matrix(dim, rng)
            result = eigenvalues_hermitian(rho.matrix)
            self.assertAlmostEqual(result.eigenvalues.sum(), 1.0, delta=1e-10)
            self.assertLessEqual(result.residual, 1e-10)
            np.testing.assert_allclose(
                result.eigenvalues, np.linalg.eigvalsh(rho.matrix)[::-1], atol=1e-10
            )

    def test_non_hermitian_rejected(self):
        """Test a non-Hermitian matrix raises."""
        with self.assertRaises(ValidationError) as ctx:
            eigenvalues_hermitian(np.array([[0, 1], [0, 0]]))
        self.assertEqual(ctx.exception.code, "not_hermitian")


class DensityMatrixTestCase(SimpleTestCase):
    """Test density matrix validation."""

    def test_trace_must_be_one(self):
        """Test a trace-2 matrix names the trace invariant."""
        with self.assertRaises(ValidationError) as ctx:
            DensityMatrix(np.eye(2))
        self.assertEqual(ctx.exception.code, "trace")

    def test_must_be_positive(self):
        """Test a negative eigenvalue names the PSD invariant."""
        with self.assertRaises(ValidationError) as ctx:
            DensityMatrix(np.diag([1.5, -0.5]))
        self.assertEqual(ctx.exception.code, "not_psd")

    def test_must_be_hermitian(self):
        """Test an asymmetric matrix names the hermiticity invariant."""
        with self.assertRaises(ValidationError) as ctx:
            DensityMatrix(np.array([[0.5, 0.2], [0.0, 0.5]]))
        self.assertEqual(ctx.exception.code, "not_hermitian")

    def test_json_input(self):
        """Test the re/im JSON layout."""
        rho = DensityMatrix.from_json(
            '{"dim": 2, "re": [[0.5, 0], [0, 0.5]], "im": [[0, 0.1], [-0.1, 0]]}'
        )
        self.assertEqual(rho.dim, 2)
        self.assertAlmostEqual(rho.element(1, 2).imag, 0.1)
        self.assertEqual(DensityMatrix.from_dict(rho.to_dict()).dim, 2)

    def test_malformed_json(self):
        """Test a wrongly sized entry table raises."""
        with self.assertRaises(ValidationError) as ctx:
            DensityMatrix.from_dict({"dim": 3, "re": [[1.0]]})
        self.assertEqual(ctx.exception.code, "malformed")


class KCBSTestCase(SimpleTestCase):
    """Test the odd-cycle construction and its threshold."""

    def test_adjacent_projectors_orthogonal(self):
        """Test <psi_j|psi_{j+1}> vanishes around the cycle."""
        for n in ODD_N:
            vectors = kcbs_model(n).vectors
            overlaps = np.abs(np.sum(vectors * np.roll(vectors, -1, axis=0), axis=1))
            self.assertLessEqual(overlaps.max(), 1e-10, n)

    def test_operator_is_diagonal(self):
        """Test the summed projectors equal diag(k1, k1, k3)."""
        for n in ODD_N:
            model = kcbs_model(n)
            np.testing.assert_allclose(model.operator, np.diag(model.eigenvalues), atol=1e-10)

    def test_pentagon_maximum_is_root_five(self):
        """Test the largest eigenvalue of K_5 is sqrt(5)."""
        spectrum = kcbs_model(5).spectrum()
        self.assertAlmostEqual(spectrum.eigenvalues[0], math.sqrt(5), delta=1e-9)

    def test_trace_is_n(self):
        """Test k1 + k2 + k3 equals n."""
        for n in (5, 9, 21):
            self.assertAlmostEqual(sum(kcbs_model(n).eigenvalues), n, delta=1e-12)

    def test_heptagon_k3_matches_summed_entry(self):
        """Test k3 against the (3,3) entry of the summed operator."""
        model = kcbs_model(7)
        c = math.cos(math.pi / 7)
        self.assertAlmostEqual(model.operator[2, 2].real, 7 * c / (1 + c), delta=1e-12)

    def test_parity_and_size_rejected(self):
        """Test even n and n=3 are refused."""
        with self.assertRaises(ValidationError) as ctx:
            kcbs_model(4)
        self.assertEqual(ctx.exception.code, "invalid_parity")
        with self.assertRaises(ValidationError) as ctx:
            kcbs_model(3)
        self.assertEqual(ctx.exception.code, "invalid_dimension")

    def test_value_on_third_basis_state(self):
        """Test |3><3| reaches sqrt(5) for the pentagon."""
        self.assertAlmostEqual(kcbs_value(kcbs_model(5), qutrit_basis(3)), math.sqrt(5), delta=1e-10)

    def test_value_on_maximally_mixed_state(self):
        """Test I/3 gives n/3."""
        for n in (5, 11):
            value = kcbs_value(kcbs_model(n), DensityMatrix.maximally_mixed(3))
            self.assertAlmostEqual(value, n / 3, delta=1e-10)

    def test_event_probabilities_sum_to_value(self):
        """Test the per-event probabilities add up to the KCBS value."""
        model = kcbs_model(9)
        rho = random_density_matrix(3, make_rng(4))
        self.assertAlmostEqual(model.event_probabilities(rho).sum(), kcbs_value(model, rho), delta=1e-12)

    def test_value_at_threshold_is_classical_bound(self):
        """Test rho_33 at the threshold saturates (n-1)/2."""
        for n in ODD_N:
            r = kcbs_threshold(n)
            rho = DensityMatrix(np.diag([(1 - r) / 2, (1 - r) / 2, r]))
            self.assertAlmostEqual(kcbs_value(kcbs_model(n), rho), (n - 1) / 2, delta=1e-10)

    def test_pentagon_threshold(self):
        """Test the n=5 threshold value."""
        self.assertAlmostEqual(kcbs_threshold(5), 0.723607, places=6)

    def test_threshold_rises_towards_one(self):
        """Test the threshold increases with n and behaves like 1 - 2/n."""
        values = [kcbs_threshold(n) for n in range(5, 102, 2)]
        self.assertTrue(all(a < b for a, b in zip(values, values[1:])))
        self.assertLess(values[-1], 1)
        self.assertAlmostEqual((1 - kcbs_threshold(1001)) * 1001, 2, delta=0.01)
        self.assertGreater(kcbs_threshold(100_001), 0.9999)

    def test_bounds(self):
        """Test (2, sqrt 5) at n=5 and quantum above classical everywhere."""
        classical, quantum = kcbs_bounds(5)
        self.assertEqual(classical, 2)
        self.assertAlmostEqual(quantum, math.sqrt(5), delta=1e-12)
        for n in range(5, 1002, 2):
            classical, quantum = kcbs_bounds(n)
            self.assertGreater(quantum, classical)
        self.assertAlmostEqual(lovasz_theta_odd_cycle(10_001) / 5000, 1, delta=1e-3)

    def test_violation_report(self):
        """Test the verdict agrees with the rho_33 threshold."""
        model = kcbs_model(5)
        report = kcbs_violation(model, qutrit_basis(3))
        self.assertTrue(report.violated)
        self.assertGreater(report.rho33, report.threshold)
        report = kcbs_violation(model, DensityMatrix.maximally_mixed(3))
        self.assertFalse(report.violated)

    def test_dimension_mismatch(self):
        """Test a two-qubit state is refused."""
        with self.assertRaises(ValidationError) as ctx:
            kcbs_value(kcbs_model(5), singlet())
        self.assertEqual(ctx.exception.code, "dimension_mismatch")


class ChainedTestCase(SimpleTestCase):
    """Test the even-cycle chained Bell construction."""

    def test_observables_square_to_identity(self):
        """Test each X_j is a reflection."""
        for n in (4, 6, 10):
            for X in chained_model(n).observables:
                np.testing.assert_allclose(X @ X, np.eye(4), atol=1e-10)

    def test_placement_by_parity(self):
        """Test even j acts on the first qubit and odd j on the second."""
        model = chained_model(4)
        np.testing.assert_allclose(model.observable(2), np.kron(SIGMA_Z, np.eye(2)), atol=1e-12)
        np.testing.assert_allclose(model.observable(4), np.kron(-SIGMA_X, np.eye(2)), atol=1e-12)
        expected = np.kron(np.eye(2), (SIGMA_X + SIGMA_Z) / math.sqrt(2))
        np.testing.assert_allclose(model.observable(1), expected, atol=1e-12)

    def test_operator_spectrum(self):
        """Test O_n has eigenvalues 2, 0, 0, -2."""
        for n in EVEN_N:
            spectrum = chained_model(n).spectrum()
            np.testing.assert_allclose(spectrum.eigenvalues, [2, 0, 0, -2], atol=1e-9)

    def test_term_sum_operator(self):
        """Test the summed products equal (n/2) cos(pi/n) (XX + ZZ)."""
        for n in EVEN_N:
            model = chained_model(n)
            np.testing.assert_allclose(model.chained_operator, chained_closed_form(n), atol=1e-10)

    def test_odd_n_rejected(self):
        """Test odd n raises the parity error."""
        with self.assertRaises(ValidationError) as ctx:
            chained_model(5)
        self.assertEqual(ctx.exception.code, "invalid_parity")

    def test_maximally_mixed_value(self):
        """Test I/4 gives zero."""
        self.assertAlmostEqual(chained_value(chained_model(6), DensityMatrix.maximally_mixed(4)), 0, delta=1e-12)

    def test_singlet_value(self):
        """Test the singlet gives -n cos(pi/n), 2 sqrt 2 in magnitude at n=4."""
        for n in EVEN_N:
            value = chained_value(chained_model(n), singlet())
            self.assertAlmostEqual(value, -n * math.cos(math.pi / n), delta=1e-9)
        self.assertAlmostEqual(abs(chained_value(chained_model(4), singlet())), 2 * math.sqrt(2), delta=1e-9)

    def test_singlet_agrees_with_operator_form(self):
        """Test (n/2) Tr(O_n rho) matches the term sum on the singlet."""
        for n in EVEN_N:
            model = chained_model(n)
            self.assertAlmostEqual(
                (n / 2) * singlet().expectation(model.operator),
                chained_value(model, singlet()),
                delta=1e-10,
            )

    def test_singlet_value_per_setting_tends_to_one(self):
        """Test |value|/n approaches 1 for large n."""
        self.assertGreater(abs(chained_value(chained_model(200), singlet())) / 200, 0.999)

    def test_evaluation_paths_agree_on_random_states(self):
        """Test term-by-term evaluation against the closed-form operator."""
        rng = make_rng(77)
        for n in (4, 6, 8):
            model = chained_model(n)
            for _ in range(100):
                rho = random_density_matrix(4, rng)
                terms = chained_terms(model, rho)
                direct = sum(terms[:-1]) - terms[-1]
                self.assertAlmostEqual(direct, rho.expectation(chained_closed_form(n)), delta=1e-10)
                self.assertAlmostEqual(chained_value(model, rho), direct, delta=1e-12)

    def test_bounds(self):
        """Test local bound n-2 and quantum maximum n cos(pi/n)."""
        self.assertEqual(chained_bounds(4), (2.0, 4 * math.cos(math.pi / 4)))

    def test_violation_report_names_flipped_form(self):
        """Test the singlet violates the form with X_n sign-flipped."""
        report = chained_violation(chained_model(4), singlet())
        self.assertTrue(report.violated)
        self.assertEqual(report.violated_form, "flipped")
        self.assertTrue(report.condition.satisfied)


class NecessaryConditionTestCase(SimpleTestCase):
    """Test the extremal eigenvalue gap condition."""

    def test_pure_state_passes(self):
        """Test a pure state has gap 1 > 1/2 at n=4."""
        report = chained_necessary_condition(DensityMatrix.pure([1, 0, 0, 0]), 4)
        self.assertAlmostEqual(report.gap, 1, delta=1e-12)
        self.assertEqual(report.threshold, 0.5)
        self.assertTrue(report.satisfied)

    def test_maximally_mixed_fails(self):
        """Test I/4 has gap 0 and never passes."""
        for n in EVEN_N:
            report = chained_necessary_condition(DensityMatrix.maximally_mixed(4), n)
            self.assertAlmostEqual(report.gap, 0, delta=1e-12)
            self.assertFalse(report.satisfied)

    def test_threshold_tends_to_one(self):
        """Test (n-2)/n approaches 1."""
        report = chained_necessary_condition(singlet(), 1000)
        self.assertAlmostEqual(report.threshold, 0.998)
        self.assertTrue(report.satisfied)

    @pytest.mark.slow
    def test_violation_implies_gap(self):
        """Test no violating state fails the gap condition over 10^4 samples."""
        for n in (4, 6):
            rng = make_rng(1000 + n)
            model = chained_model(n)
            bound = n - 2
            violators = 0
            for _ in range(10_000):
                w = rng.random()
                noise = random_density_matrix(4, rng)
                rho = DensityMatrix(w * singlet().matrix + (1 - w) * noise.matrix)
                if abs(chained_value(model, rho)) > bound:
                    violators += 1
                    self.assertTrue(chained_necessary_condition(rho, n).satisfied)
            self.assertGreater(violators, 100)
