from functools import reduce

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from hamiltonians.builders import (
    build_cluster_open,
    build_tfc,
    build_tfi,
    x_product,
    zz_bond,
)
from pauli.operators import (
    PauliString,
    PauliSum,
    _signs,
    apply_string,
    apply_sum,
    diagonal_values,
    expectation,
    strings_commute,
    to_dense,
)
from statevector.engine import plus_state
from statevector.states import basis_state
from statevector.tests import random_state

SINGLE = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1.0, -1.0]).astype(complex),
}


def kron_matrix(string):
    """Dense matrix by Kronecker products; qubit N-1 is the leftmost factor."""
    axes = dict(string.factors)
    factors = [SINGLE[axes.get(site, "I")] for site in reversed(range(string.n_qubits))]
    return reduce(np.kron, factors)


def kron_sum(h):
    dim = 2**h.n_qubits
    return sum((c * kron_matrix(s) for c, s in h.terms), np.zeros((dim, dim), complex))


def z(n, *sites):
    return PauliString(n, tuple((site, "Z") for site in sites))


def x(n, *sites):
    return PauliString(n, tuple((site, "X") for site in sites))


class PauliStringTestCase(SimpleTestCase):
    def test_sites_must_increase(self):
        with self.assertRaises(ValidationError):
            PauliString(3, ((1, "Z"), (0, "X")))

    def test_sites_must_fit(self):
        with self.assertRaises(ValidationError):
            PauliString(2, ((2, "Z"),))

    def test_unknown_axis(self):
        with self.assertRaises(ValidationError):
            PauliString(2, ((0, "W"),))

    def test_from_sites_sorts(self):
        string = PauliString.from_sites(4, {3: "Z", 0: "x"})
        self.assertEqual(string.factors, ((0, "X"), (3, "Z")))
        self.assertEqual(string.label(), "X0 Z3")

    def test_identity(self):
        state = random_state(2, 0)
        out = apply_string(PauliString.identity(2), state)
        np.testing.assert_array_equal(out.amplitudes, state.amplitudes)


class ApplyStringTestCase(SimpleTestCase):
    def test_z_on_one(self):
        out = apply_string(z(1, 0), basis_state(1, 1))
        np.testing.assert_array_equal(out.amplitudes, [0, -1])

    def test_x_on_zero(self):
        out = apply_string(x(1, 0), basis_state(1, 0))
        np.testing.assert_array_equal(out.amplitudes, [0, 1])

    def test_y_on_zero(self):
        out = apply_string(PauliString(1, ((0, "Y"),)), basis_state(1, 0))
        np.testing.assert_array_equal(out.amplitudes, [0, 1j])

    def test_parity_on_plus_state(self):
        for n in (1, 4, 7):
            state = plus_state(n)
            out = apply_string(x_product(n, range(n)), state)
            np.testing.assert_allclose(out.amplitudes, state.amplitudes, atol=1e-15)

    def test_size_mismatch(self):
        with self.assertRaises(ValidationError):
            apply_string(z(2, 0), basis_state(1, 0))

    def test_norm_and_involution(self):
        strings = [
            PauliString(5, ((0, "X"), (2, "Y"), (4, "Z"))),
            PauliString(5, ((1, "Y"), (3, "Y"))),
            z(5, 0, 1, 2),
        ]
        state = random_state(5, 1)
        for string in strings:
            once = apply_string(string, state)
            self.assertLess(abs(once.norm() - state.norm()), 1e-12)
            twice = apply_string(string, once)
            np.testing.assert_allclose(twice.amplitudes, state.amplitudes, atol=1e-12)

    def test_matches_kronecker_oracle(self):
        state = random_state(4, 2)
        for string in [
            PauliString(4, ((0, "Y"), (1, "X"), (3, "Z"))),
            PauliString(4, ((2, "Y"),)),
            x(4, 0, 3),
        ]:
            np.testing.assert_allclose(
                apply_string(string, state).amplitudes,
                kron_matrix(string) @ state.amplitudes,
                atol=1e-12,
            )


class PauliSumTestCase(SimpleTestCase):
    def test_merges_duplicates_in_order(self):
        h = PauliSum.from_terms(2, [(-1.0, z(2, 0, 1)), (0.5, x(2, 0)), (-1.0, z(2, 0, 1))])
        self.assertEqual(h.terms, ((-2.0, z(2, 0, 1)), (0.5, x(2, 0))))

    def test_keeps_zero_coefficients(self):
        self.assertEqual(len(build_tfi(4, 0.0)), 8)

    def test_rejects_complex_coefficient(self):
        with self.assertRaises(ValidationError):
            PauliSum.from_terms(1, [(1j, z(1, 0))])

    def test_rejects_mixed_sizes(self):
        with self.assertRaises(ValidationError):
            PauliSum.from_terms(2, [(1.0, z(3, 0))])

    def test_extend(self):
        h = build_cluster_open(5).extend([(2.0, x(5, 1, 3))])
        self.assertEqual(len(h), 4)
        self.assertEqual(h.terms[-1], (2.0, x(5, 1, 3)))


class ApplySumTestCase(SimpleTestCase):
    def test_classical_ferromagnet(self):
        out = apply_sum(build_tfi(3, 0.0), basis_state(3, 0))
        np.testing.assert_allclose(out.amplitudes, -3 * basis_state(3, 0).amplitudes)

    def test_empty_sum(self):
        out = apply_sum(PauliSum(3), random_state(3, 3))
        np.testing.assert_array_equal(out.amplitudes, np.zeros(8))

    def test_overlap_with_plus_state(self):
        state = plus_state(4)
        out = apply_sum(build_tfi(4, 0.5), state)
        self.assertAlmostEqual(np.vdot(state.amplitudes, out.amplitudes), -2.0, places=12)

    def test_size_mismatch(self):
        with self.assertRaises(ValidationError):
            apply_sum(build_tfi(3, 0.5), plus_state(4))

    def test_dense_oracle(self):
        for n in range(2, 7):
            state = random_state(n, 10 + n)
            hamiltonians = [build_tfi(n, 0.7)]
            if n >= 4 and n % 2 == 0:
                hamiltonians.append(build_tfc(n, 0.3))
            if n >= 3:
                hamiltonians.append(build_cluster_open(n))
            hamiltonians.append(
                PauliSum.from_terms(
                    n, [(0.4, PauliString(n, ((0, "Y"), (1, "Y")))), (-1.1, z(n, n - 1))]
                )
            )
            for h in hamiltonians:
                np.testing.assert_allclose(
                    apply_sum(h, state).amplitudes,
                    kron_sum(h) @ state.amplitudes,
                    atol=1e-12,
                )
                np.testing.assert_allclose(to_dense(h), kron_sum(h), atol=1e-12)

    def test_sign_vectors_are_shared(self):
        signs = _signs(3, 0b101)
        self.assertIs(_signs(3, 0b101), signs)
        self.assertFalse(signs.flags.writeable)
        self.assertEqual(signs.tolist(), [1, -1, 1, -1, -1, 1, -1, 1])
        self.assertEqual(_signs(3, 0).tolist(), [1] * 8)

    def test_repeated_application_is_stable(self):
        h = build_tfc(6, 0.4)
        state = random_state(6, 3)
        first = apply_sum(h, state).amplitudes
        np.testing.assert_array_equal(apply_sum(h, state).amplitudes, first)


class ExpectationTestCase(SimpleTestCase):
    def test_plus_state_tfi(self):
        self.assertAlmostEqual(expectation(build_tfi(4, 0.5), plus_state(4)), -2.0, places=12)

    def test_all_zeros_tfi(self):
        self.assertAlmostEqual(
            expectation(build_tfi(3, 0.0), basis_state(3, 0)), -3.0, places=12
        )

    def test_sublattice_parity_on_plus_state(self):
        p1 = PauliSum.from_terms(4, [(1.0, x(4, 1, 3))])
        self.assertAlmostEqual(expectation(p1, plus_state(4)), 1.0, places=12)

    def test_matches_inner_product(self):
        h = build_tfi(5, 0.9)
        state = random_state(5, 4)
        raw = np.vdot(state.amplitudes, apply_sum(h, state).amplitudes)
        self.assertLess(abs(expectation(h, state) - raw), 1e-12)

    def test_returns_float(self):
        self.assertIsInstance(expectation(build_tfi(2, 1.0), plus_state(2)), float)


class CommuteTestCase(SimpleTestCase):
    def test_diagonal_strings(self):
        self.assertTrue(strings_commute(z(3, 0, 1), z(3, 1, 2)))

    def test_anticommuting_pair(self):
        self.assertFalse(strings_commute(x(1, 0), z(1, 0)))

    def test_cluster_stabilizers(self):
        a = PauliString(5, ((0, "Z"), (1, "X"), (2, "Z")))
        b = PauliString(5, ((2, "Z"), (3, "X"), (4, "Z")))
        self.assertTrue(strings_commute(a, b))

    def test_y_against_x_and_z(self):
        y = PauliString(2, ((0, "Y"),))
        self.assertFalse(strings_commute(y, x(2, 0)))
        self.assertFalse(strings_commute(y, z(2, 0)))
        self.assertTrue(strings_commute(y, PauliString(2, ((0, "Y"), (1, "X")))))

    def test_agrees_with_dense_commutator(self):
        strings = [
            PauliString(3, ((0, "X"), (1, "Y"))),
            PauliString(3, ((1, "Z"), (2, "X"))),
            PauliString(3, ((0, "Y"), (2, "Z"))),
            z(3, 0, 1, 2),
            x(3, 0, 1, 2),
        ]
        for a in strings:
            for b in strings:
                ma, mb = kron_matrix(a), kron_matrix(b)
                dense = np.allclose(ma @ mb, mb @ ma)
                self.assertEqual(strings_commute(a, b), dense, (a.label(), b.label()))


class DiagonalValuesTestCase(SimpleTestCase):
    def test_matches_dense_diagonal(self):
        h = PauliSum.from_terms(4, [(-1.0 - i, zz_bond(4, i, i + 1)) for i in range(4)])
        np.testing.assert_allclose(diagonal_values(h), np.diag(to_dense(h)))

    def test_rejects_off_diagonal(self):
        with self.assertRaises(ValidationError):
            diagonal_values(build_tfi(3, 0.5))
