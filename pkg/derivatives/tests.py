import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, override_settings

from ansatz.circuits import (
    AnsatzSpec,
    cluster_open_bare,
    prepare_state,
    qaoa_tfi,
    sb_cluster_open,
    sb_tfc,
    sb_tfi,
    tfc_bare,
    x_layer,
    z_layer,
)
from core.utils import make_rng
from derivatives.fisher import (
    FisherVariant,
    berry_connection,
    derivative_overlaps,
    derivative_states,
    energy_gradient,
    fisher_matrix,
    should_stream,
)
from hamiltonians.builders import build_cluster_open, build_tfc, build_tfi, single_site
from pauli.operators import PauliSum, expectation
from statevector.states import basis_state

STEP = 1e-5


def one_qubit_x():
    """exp(-i theta X)|0>."""
    return AnsatzSpec(1, 1, (x_layer(1),), initial_state=basis_state(1, 0))


def one_qubit_xz():
    return AnsatzSpec(1, 1, (x_layer(1), z_layer(1)), initial_state=basis_state(1, 0))


def hamiltonian_for(spec):
    if spec.family.startswith(("qaoa_tfi", "sb_tfi")):
        return build_tfi(spec.n_qubits, 0.7)
    if "tfc" in spec.family:
        return build_tfc(spec.n_qubits, 0.3)
    return build_cluster_open(spec.n_qubits)


def numeric_derivatives(spec, params):
    columns = []
    for k in range(spec.n_params):
        shift = np.zeros(spec.n_params)
        shift[k] = STEP
        plus = prepare_state(spec, params + shift).amplitudes
        minus = prepare_state(spec, params - shift).amplitudes
        columns.append((plus - minus) / (2 * STEP))
    return columns


def fidelity_hessian(spec, params, step=1e-4):
    reference = prepare_state(spec, params).amplitudes

    def fidelity(delta):
        return abs(np.vdot(reference, prepare_state(spec, params + delta).amplitudes)) ** 2

    size = spec.n_params
    basis = np.eye(size) * step
    hessian = np.empty((size, size))
    for i in range(size):
        for j in range(size):
            hessian[i, j] = (
                fidelity(basis[i] + basis[j])
                - fidelity(basis[i] - basis[j])
                - fidelity(basis[j] - basis[i])
                + fidelity(-basis[i] - basis[j])
            ) / (4 * step**2)
    return hessian


class DerivativeStatesTestCase(SimpleTestCase):
    def test_single_rotation(self):
        theta = 0.3
        (derivative,) = derivative_states(one_qubit_x(), [theta])
        np.testing.assert_allclose(
            derivative.amplitudes, [-math.sin(theta), -1j * math.cos(theta)], atol=1e-15
        )

    def test_tangent_to_the_unit_sphere(self):
        spec = sb_tfc(6, 2)
        params = make_rng(0).uniform(-1, 1, spec.n_params)
        state = prepare_state(spec, params).amplitudes
        for derivative in derivative_states(spec, params):
            self.assertLess(abs(np.vdot(state, derivative.amplitudes).real), 1e-12)

    def test_match_finite_differences(self):
        for spec in (sb_tfi(4, 2), sb_tfc(6, 2), qaoa_tfi(6, 1)):
            params = make_rng(1).uniform(-1, 1, spec.n_params)
            exact = derivative_states(spec, params)
            for analytic, numeric in zip(exact, numeric_derivatives(spec, params)):
                np.testing.assert_allclose(analytic.amplitudes, numeric, atol=1e-7)


class EnergyGradientTestCase(SimpleTestCase):
    def test_single_rotation(self):
        h = PauliSum.from_terms(1, [(1.0, single_site(1, 0, "Z"))])
        (gradient,) = energy_gradient(h, one_qubit_x(), [math.pi / 8])
        self.assertAlmostEqual(gradient, -math.sqrt(2), places=12)

    def test_vanishes_on_plus_state(self):
        spec = qaoa_tfi(6, 2)
        gradient = energy_gradient(build_tfi(6, 0.5), spec, np.zeros(spec.n_params))
        np.testing.assert_allclose(gradient[[2, 5]], 0.0, atol=1e-12)

    def test_matches_finite_differences(self):
        rng = make_rng(2)
        builders = (qaoa_tfi, sb_tfi, tfc_bare, sb_tfc, sb_cluster_open, cluster_open_bare)
        for builder in builders:
            for depth in (2, 3):
                spec = builder(6, depth)
                h = hamiltonian_for(spec)
                for _point in range(5):
                    params = rng.uniform(-math.pi, math.pi, spec.n_params)
                    numeric = np.empty(spec.n_params)
                    for k in range(spec.n_params):
                        shift = np.zeros(spec.n_params)
                        shift[k] = STEP
                        numeric[k] = (
                            expectation(h, prepare_state(spec, params + shift))
                            - expectation(h, prepare_state(spec, params - shift))
                        ) / (2 * STEP)
                    np.testing.assert_allclose(
                        energy_gradient(h, spec, params), numeric, atol=1e-6
                    )

    def test_size_mismatch(self):
        spec = sb_tfi(6, 1)
        with self.assertRaises(ValidationError):
            energy_gradient(build_tfi(4, 0.5), spec, np.zeros(3))


class FisherMatrixTestCase(SimpleTestCase):
    def test_single_rotation(self):
        for variant in FisherVariant:
            fisher = fisher_matrix(one_qubit_x(), [0.4], variant)
            self.assertAlmostEqual(fisher.entries[0, 0], 1.0, places=12)

    def test_plus_state_diagonal(self):
        spec = sb_tfi(4, 1)
        fisher = fisher_matrix(spec, np.zeros(3))
        np.testing.assert_allclose(fisher.entries, np.diag([4.0, 0.0, 4.0]), atol=1e-12)

    def test_matches_finite_difference_states(self):
        spec = sb_tfc(4, 2)
        params = make_rng(3).uniform(-1, 1, spec.n_params)
        state = prepare_state(spec, params).amplitudes
        stacked = np.array(numeric_derivatives(spec, params))
        gram = (stacked.conj() @ stacked.T).real
        connection = stacked @ state.conj()
        expected = gram - np.outer(connection.conj(), connection).real
        np.testing.assert_allclose(fisher_matrix(spec, params).entries, expected, atol=1e-7)

    def test_variants_differ_by_connection_outer_product(self):
        spec = sb_tfi(6, 2)
        rng = make_rng(4)
        for _point in range(5):
            params = rng.uniform(-1, 1, spec.n_params)
            centered = fisher_matrix(spec, params, FisherVariant.CENTERED)
            uncentered = fisher_matrix(spec, params, FisherVariant.UNCENTERED)
            difference = uncentered.entries - centered.entries
            beta = berry_connection(spec, params)
            np.testing.assert_allclose(difference, np.outer(beta, beta), atol=1e-12)
            # positive semidefinite with rank at most one
            eigenvalues = np.linalg.eigvalsh(difference)
            self.assertGreater(eigenvalues[0], -1e-9)
            self.assertLess(eigenvalues[-2], 1e-9)
            self.assertGreater(centered.eigenvalues().min(), -1e-9)
            self.assertGreater(uncentered.eigenvalues().min(), -1e-9)

    def test_symmetric_positive_semidefinite(self):
        rng = make_rng(5)
        for spec in (sb_tfi(6, 3), sb_tfc(6, 2), sb_cluster_open(6, 2)):
            for variant in FisherVariant:
                fisher = fisher_matrix(spec, rng.uniform(-2, 2, spec.n_params), variant)
                np.testing.assert_array_equal(fisher.entries, fisher.entries.T)
                self.assertGreater(fisher.eigenvalues().min(), -1e-10)

    def test_stored_and_streamed_agree(self):
        spec = sb_tfc(6, 3)
        params = make_rng(6).uniform(-1, 1, spec.n_params)
        gram, connection = derivative_overlaps(spec, params, stream=False)
        streamed_gram, streamed_connection = derivative_overlaps(spec, params, stream=True)
        np.testing.assert_allclose(streamed_gram, gram, atol=1e-12)
        np.testing.assert_allclose(streamed_connection, connection, atol=1e-12)

    def test_fidelity_curvature(self):
        rng = make_rng(7)
        for spec in (one_qubit_xz(), sb_tfi(4, 1)):
            params = rng.uniform(-1, 1, spec.n_params)
            np.testing.assert_allclose(
                fisher_matrix(spec, params).entries,
                -0.5 * fidelity_hessian(spec, params),
                atol=1e-5,
            )

    def test_regularized(self):
        fisher = fisher_matrix(sb_tfi(4, 1), np.zeros(3))
        np.testing.assert_allclose(np.diag(fisher.regularized(0.5)), [4.5, 0.5, 4.5])


class StreamingThresholdTestCase(SimpleTestCase):
    def test_small_circuits_are_stored(self):
        self.assertFalse(should_stream(sb_tfc(10, 5)))

    @override_settings(FISHER_STREAM_BYTES=0)
    def test_threshold_from_settings(self):
        spec = sb_tfi(4, 2)
        self.assertTrue(should_stream(spec))
        params = make_rng(8).uniform(-1, 1, spec.n_params)
        np.testing.assert_allclose(
            fisher_matrix(spec, params).entries,
            fisher_matrix(spec, params, stream=False).entries,
            atol=1e-12,
        )
