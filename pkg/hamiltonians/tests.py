from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from exact.solvers import dense_ground
from hamiltonians.builders import (
    ModelKind,
    ModelSpec,
    build_cluster_open,
    build_hamiltonian,
    build_tfc,
    build_tfi,
    parity_ops,
)
from pauli.operators import PauliSum, expectation, strings_commute
from statevector.engine import plus_state


def labelled(h):
    return [(coefficient, string.label()) for coefficient, string in h.terms]


class ModelSpecTestCase(SimpleTestCase):
    def test_boundary(self):
        self.assertEqual(ModelSpec(ModelKind.TFI, 4).boundary, "periodic")
        self.assertEqual(ModelSpec("cluster", 4).boundary, "open")

    def test_invalid_sizes(self):
        for model, n in [("tfi", 1), ("tfc", 5), ("tfc", 2), ("cluster", 2)]:
            with self.assertRaises(ValidationError):
                ModelSpec(model, n)

    def test_unknown_model(self):
        with self.assertRaises(ValueError):
            ModelSpec("heisenberg", 4)

    def test_dispatch(self):
        self.assertEqual(build_hamiltonian(ModelSpec("tfc", 6, 0.5)).terms, build_tfc(6, 0.5).terms)
        self.assertEqual(build_hamiltonian(ModelSpec("cluster", 6)).terms, build_cluster_open(6).terms)


class TfiTestCase(SimpleTestCase):
    def test_four_sites(self):
        self.assertEqual(
            labelled(build_tfi(4, 0.5)),
            [
                (-1.0, "Z0 Z1"),
                (-1.0, "Z1 Z2"),
                (-1.0, "Z2 Z3"),
                (-1.0, "Z0 Z3"),
                (-0.5, "X0"),
                (-0.5, "X1"),
                (-0.5, "X2"),
                (-0.5, "X3"),
            ],
        )

    def test_two_sites_merge_the_doubled_bond(self):
        self.assertEqual(labelled(build_tfi(2, 0.5)), [(-2.0, "Z0 Z1"), (-0.5, "X0"), (-0.5, "X1")])

    def test_term_count(self):
        for n in range(3, 11):
            self.assertEqual(len(build_tfi(n, 0.5)), 2 * n)

    def test_too_small(self):
        with self.assertRaises(ValidationError):
            build_tfi(1, 0.5)

    def test_classical_ground_energy(self):
        self.assertAlmostEqual(dense_ground(build_tfi(3, 0.0)).energy, -3.0, places=10)

    def test_four_site_ground_energy_bounds(self):
        energy = dense_ground(build_tfi(4, 0.5)).energy
        # below both product states |0000> (-4) and |+>^4 (-2)
        self.assertLess(energy, -4.0)
        self.assertGreater(energy, -6.0)

    def test_large_field_limit(self):
        for h in (10.0, 1e3, 1e6):
            self.assertAlmostEqual(
                expectation(build_tfi(6, h), plus_state(6)) / h, -6.0, places=9
            )

    def test_ground_energy_nonincreasing_in_h(self):
        fields = [0.0, 0.25, 0.5, 1.0, 2.0]
        for n in (4, 6, 8):
            energies = [dense_ground(build_tfi(n, h)).energy for h in fields]
            for lower, higher in zip(energies, energies[1:]):
                self.assertLessEqual(higher, lower + 1e-10)


class TfcTestCase(SimpleTestCase):
    def test_term_count(self):
        self.assertEqual(len(build_tfc(6, 0.5)), 12)
        self.assertEqual(labelled(build_tfc(6, 0.5))[:2], [(-1.0, "Z0 X1 Z2"), (-1.0, "Z1 X2 Z3")])
        self.assertEqual(labelled(build_tfc(6, 0.5))[5], (-1.0, "X0 Z1 Z5"))

    def test_invalid_sizes(self):
        for n in (3, 5):
            with self.assertRaises(ValidationError):
                build_tfc(n, 0.5)

    def test_stabilizer_ground_energy(self):
        self.assertAlmostEqual(dense_ground(build_tfc(6, 0.0)).energy, -6.0, places=10)


class ClusterTestCase(SimpleTestCase):
    def test_term_counts(self):
        self.assertEqual(len(build_cluster_open(14)), 12)
        self.assertEqual(labelled(build_cluster_open(4)), [(-1.0, "Z0 X1 Z2"), (-1.0, "Z1 X2 Z3")])

    def test_too_small(self):
        with self.assertRaises(ValidationError):
            build_cluster_open(2)

    def test_ground_energy(self):
        self.assertAlmostEqual(dense_ground(build_cluster_open(4)).energy, -2.0, places=10)

    def test_four_fold_degenerate(self):
        truth = dense_ground(build_cluster_open(5))
        self.assertAlmostEqual(truth.energy, -3.0, places=10)
        self.assertEqual(truth.degeneracy, 4)

    def test_field_is_ignored(self):
        self.assertEqual(
            build_hamiltonian(ModelSpec("cluster", 6, 0.9)).terms,
            build_hamiltonian(ModelSpec("cluster", 6, 0.1)).terms,
        )


class ParityTestCase(SimpleTestCase):
    def test_tfi_global_parity(self):
        (parity,) = parity_ops(ModelSpec("tfi", 4))
        self.assertEqual(parity.label(), "X0 X1 X2 X3")

    def test_sublattice_parities(self):
        p1, p2 = parity_ops(ModelSpec("tfc", 6))
        self.assertEqual(p1.label(), "X1 X3 X5")
        self.assertEqual(p2.label(), "X0 X2 X4")

    def test_odd_cluster_rejected(self):
        with self.assertRaises(ValidationError):
            parity_ops(ModelSpec("cluster", 5))

    def test_parities_commute_with_every_term(self):
        specs = [ModelSpec("tfi", n) for n in range(2, 11)]
        specs += [ModelSpec("tfc", n) for n in range(4, 11, 2)]
        specs += [ModelSpec("cluster", n) for n in range(4, 11, 2)]
        for spec in specs:
            h = build_hamiltonian(spec)
            parities = parity_ops(spec)
            for parity in parities:
                for string in h.strings:
                    self.assertTrue(strings_commute(parity, string), (spec, string.label()))
            for a in parities:
                for b in parities:
                    self.assertTrue(strings_commute(a, b))

    def test_plus_state_is_even(self):
        for spec in [ModelSpec("tfi", 5), ModelSpec("tfc", 6), ModelSpec("cluster", 8)]:
            for parity in parity_ops(spec):
                value = expectation(
                    PauliSum.from_terms(spec.n_qubits, [(1.0, parity)]),
                    plus_state(spec.n_qubits),
                )
                self.assertAlmostEqual(value, 1.0, places=12)

    def test_sublattices_partition_the_chain(self):
        p1, p2 = parity_ops(ModelSpec("cluster", 8))
        self.assertEqual(p1.x_mask | p2.x_mask, 2**8 - 1)
        self.assertEqual(p1.x_mask & p2.x_mask, 0)
        self.assertTrue(all(site % 2 == 1 for site, axis in p1.factors))
