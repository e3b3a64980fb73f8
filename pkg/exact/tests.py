import tracemalloc

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, override_settings

from core.exceptions import NotConvergedError
from exact.solvers import (
    BASIS_BLOCK_ROWS,
    KrylovBasis,
    SolverMethod,
    _lanczos_pass,
    dense_ground,
    ground_truth,
    lanczos_ground,
    lanczos_start_vectors,
    normalized_energy,
)
from hamiltonians.builders import build_cluster_open, build_tfc, build_tfi, x_product
from pauli.operators import apply_sum, expectation
from statevector.states import Statevector
from statevector.tests import random_state


class DenseGroundTestCase(SimpleTestCase):
    def test_classical_ring(self):
        truth = dense_ground(build_tfi(3, 0.0))
        self.assertAlmostEqual(truth.energy, -3.0, places=12)
        self.assertEqual(truth.degeneracy, 2)
        self.assertEqual(truth.method, SolverMethod.DENSE)
        self.assertIsNone(truth.state)

    def test_open_cluster_degeneracy(self):
        truth = dense_ground(build_cluster_open(5))
        self.assertAlmostEqual(truth.energy, -3.0, places=12)
        self.assertEqual(truth.degeneracy, 4)

    def test_keep_state(self):
        h = build_tfi(4, 0.5)
        truth = dense_ground(h, keep_state=True)
        self.assertAlmostEqual(truth.state.norm(), 1.0, places=12)
        self.assertAlmostEqual(expectation(h, truth.state), truth.energy, places=10)

    @override_settings(DENSE_MAX_QUBITS=4)
    def test_size_limit(self):
        with self.assertRaises(ValidationError):
            dense_ground(build_tfi(5, 1.0))

    def test_as_dict(self):
        data = dense_ground(build_cluster_open(4)).as_dict()
        self.assertEqual(sorted(data), ["degeneracy", "energy", "method"])
        self.assertEqual((data["method"], data["degeneracy"]), ("dense", 4))
        self.assertAlmostEqual(data["energy"], -2.0, places=12)


class LanczosTestCase(SimpleTestCase):
    def test_agrees_with_dense(self):
        for n in range(2, 11, 2):
            hamiltonians = [build_tfi(n, h) for h in (0.0, 0.5, 2.0)]
            if n >= 4:
                hamiltonians += [build_tfc(n, h) for h in (0.0, 0.5, 2.0)]
                hamiltonians.append(build_cluster_open(n))
            for hamiltonian in hamiltonians:
                self.assertAlmostEqual(
                    lanczos_ground(hamiltonian).energy,
                    dense_ground(hamiltonian).energy,
                    delta=1e-10,
                    msg=f"n={n} terms={len(hamiltonian)}",
                )
            if n >= 4:
                self.assertEqual(dense_ground(build_cluster_open(n)).degeneracy, 4)

    def test_periodic_cluster_stabilizers(self):
        self.assertAlmostEqual(lanczos_ground(build_tfc(6, 0.0)).energy, -6.0, delta=1e-8)

    def test_fourteen_site_open_cluster(self):
        truth = lanczos_ground(build_cluster_open(14))
        self.assertAlmostEqual(truth.energy, -12.0, delta=1e-8)
        self.assertEqual(truth.method, SolverMethod.LANCZOS)
        self.assertGreater(truth.iterations, 0)
        self.assertNotIn("degeneracy", truth.as_dict())

    def test_ground_space_outside_the_all_ones_sector(self):
        # penalties push the ground state into P1 = P2 = -1, orthogonal to all-ones
        h = build_cluster_open(5).extend(
            [(2.0, x_product(5, [1, 3])), (2.0, x_product(5, [0, 2, 4]))]
        )
        self.assertAlmostEqual(dense_ground(h).energy, -7.0, places=10)
        with self.assertLogs("exact.solvers", level="WARNING"):
            truth = lanczos_ground(h)
        self.assertAlmostEqual(truth.energy, -7.0, delta=1e-8)

    def test_start_vectors_are_deterministic(self):
        first = lanczos_start_vectors(4)
        second = lanczos_start_vectors(4)
        np.testing.assert_array_equal(first[0], np.ones(16))
        np.testing.assert_array_equal(first[1], second[1])
        self.assertFalse(np.array_equal(first[0], first[1]))

    def test_iteration_cap(self):
        with self.assertRaises(NotConvergedError):
            lanczos_ground(build_tfi(8, 0.5), max_iter=2)

    @override_settings(VQE_MAX_QUBITS=4)
    def test_size_limit(self):
        with self.assertRaises(ValidationError):
            lanczos_ground(build_tfi(5, 1.0))

    def test_peak_memory_tracks_the_basis(self):
        h = build_tfi(12, 0.5)
        start = lanczos_start_vectors(12)[0]
        apply_sum(h, Statevector(12, start))
        vector_bytes = 2**12 * 16
        tracemalloc.start()
        try:
            _value, iterations = _lanczos_pass(h, start, 1e-12, 500)
            _current, peak = tracemalloc.get_traced_memory()
        finally:
            tracemalloc.stop()
        rows = -(-iterations // BASIS_BLOCK_ROWS) * BASIS_BLOCK_ROWS
        self.assertGreater(iterations, 10)
        self.assertLess(peak, (rows + 16) * vector_bytes)


class KrylovBasisTestCase(SimpleTestCase):
    def test_orthogonalize_across_blocks(self):
        basis = KrylovBasis(16, block_rows=2)
        q, _r = np.linalg.qr(np.column_stack([random_state(4, k).amplitudes for k in range(5)]))
        for column in q.T:
            basis.append(column)
        self.assertEqual([block.shape[0] for block in basis.filled()], [2, 2, 1])
        np.testing.assert_array_equal(basis.last(), q[:, 4])

        w = random_state(4, 9).amplitudes.copy()
        for _repeat in range(2):
            basis.orthogonalize(w)
        np.testing.assert_allclose(q.conj().T @ w, 0.0, atol=1e-12)

    def test_orthogonalize_keeps_complement(self):
        basis = KrylovBasis(4)
        basis.append(np.array([1.0, 0.0, 0.0, 0.0]))
        w = np.array([2.0, 1.0j, 0.0, 3.0], dtype=np.complex128)
        basis.orthogonalize(w)
        np.testing.assert_allclose(w, [0.0, 1.0j, 0.0, 3.0])


class GroundTruthTestCase(SimpleTestCase):
    @override_settings(DENSE_MAX_QUBITS=4)
    def test_auto_switches_on_size(self):
        self.assertEqual(ground_truth(build_tfi(4, 1.0)).method, SolverMethod.DENSE)
        self.assertEqual(ground_truth(build_tfi(6, 1.0)).method, SolverMethod.LANCZOS)

    def test_explicit_method(self):
        truth = ground_truth(build_tfi(4, 1.0), "lanczos")
        self.assertEqual(truth.method, SolverMethod.LANCZOS)
        with self.assertRaises(ValueError):
            ground_truth(build_tfi(4, 1.0), "arpack")


class NormalizedEnergyTestCase(SimpleTestCase):
    def test_relative_error(self):
        self.assertAlmostEqual(normalized_energy(-0.9, -1.0), 0.1, places=15)
        self.assertEqual(normalized_energy(-2.0, -2.0), 0.0)

    def test_uses_absolute_ground_energy(self):
        self.assertAlmostEqual(normalized_energy(1.5, 1.0), 0.5, places=15)

    def test_zero_ground_energy(self):
        with self.assertRaises(ValidationError):
            normalized_energy(0.1, 0.0)
