import numpy as np
import scipy.linalg as la
from django.conf import settings
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from ansatz.circuits import x_layer, z_layer, zz_ring_layer
from core.utils import make_rng
from hamiltonians.builders import build_tfi, x_product, zxz_string
from pauli.operators import PauliString, PauliSum, expectation, to_dense
from statevector.engine import (
    LayerSpec,
    apply_layer,
    apply_rotation,
    inner,
    plus_state,
)
from statevector.states import Statevector, basis_state


def random_state(n_qubits, seed):
    rng = make_rng(seed)
    amplitudes = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return Statevector(n_qubits, amplitudes / np.linalg.norm(amplitudes))


class StatevectorTestCase(SimpleTestCase):
    def test_rejects_wrong_shape(self):
        with self.assertRaises(ValidationError):
            Statevector(2, np.ones(3))

    def test_basis_state(self):
        state = basis_state(3, 5)
        self.assertEqual(len(state), 8)
        self.assertEqual(state.amplitudes[5], 1.0)
        self.assertEqual(state.norm(), 1.0)


class PlusStateTestCase(SimpleTestCase):
    def test_one_qubit(self):
        np.testing.assert_allclose(plus_state(1).amplitudes, [2**-0.5, 2**-0.5])

    def test_two_qubits(self):
        np.testing.assert_allclose(plus_state(2).amplitudes, [0.5] * 4)

    def test_out_of_range(self):
        with self.assertRaises(ValidationError):
            plus_state(0)
        with self.assertRaises(ValidationError):
            plus_state(settings.VQE_MAX_QUBITS + 1)

    def test_supports_twenty_qubits(self):
        self.assertGreaterEqual(settings.VQE_MAX_QUBITS, 20)

    def test_tfi_energy_is_minus_h_n(self):
        for n in (2, 3, 6):
            for h in (0.0, 0.5, 3.0):
                self.assertAlmostEqual(
                    expectation(build_tfi(n, h), plus_state(n)), -h * n, places=12
                )


class RotationTestCase(SimpleTestCase):
    def test_z_phase(self):
        theta = 0.37
        out = apply_rotation(PauliString(1, ((0, "Z"),)), theta, basis_state(1, 0))
        np.testing.assert_allclose(out.amplitudes, [np.exp(-1j * theta), 0], atol=1e-15)

    def test_zero_angle(self):
        state = random_state(3, 1)
        out = apply_rotation(PauliString(3, ((1, "Y"),)), 0.0, state)
        np.testing.assert_allclose(out.amplitudes, state.amplitudes, atol=1e-15)

    def test_x_quarter_turn(self):
        out = apply_rotation(PauliString(1, ((0, "X"),)), np.pi / 2, basis_state(1, 0))
        np.testing.assert_allclose(out.amplitudes, [0, -1j], atol=1e-12)

    def test_size_mismatch(self):
        with self.assertRaises(ValidationError):
            apply_rotation(PauliString(2, ((0, "X"),)), 0.1, basis_state(1, 0))


class LayerTestCase(SimpleTestCase):
    def test_zz_ring_on_all_zeros(self):
        theta = 0.21
        out = apply_layer(zz_ring_layer(4), theta, basis_state(4, 0))
        self.assertAlmostEqual(out.amplitudes[0], np.exp(-4j * theta), places=12)
        self.assertAlmostEqual(np.linalg.norm(out.amplitudes[1:]), 0.0, places=12)

    def test_zero_angle_is_identity(self):
        state = random_state(4, 2)
        for layer in (zz_ring_layer(4), x_layer(4), z_layer(4)):
            np.testing.assert_allclose(
                apply_layer(layer, 0.0, state).amplitudes, state.amplitudes, atol=1e-15
            )

    def test_inverse(self):
        state = random_state(5, 3)
        for layer in (zz_ring_layer(5), x_layer(5)):
            back = apply_layer(layer, 0.8, apply_layer(layer, -0.8, state))
            np.testing.assert_allclose(back.amplitudes, state.amplitudes, atol=1e-12)

    def test_norm_preserved_along_chain(self):
        rng = make_rng(4)
        state = plus_state(6)
        layers = [zz_ring_layer(6), x_layer(6), z_layer(6)]
        for _step in range(10):
            for layer in layers:
                state = apply_layer(layer, rng.uniform(-np.pi, np.pi), state)
        self.assertLess(abs(state.norm() - 1.0), 1e-10)

    def test_term_order_does_not_matter(self):
        n = 6
        strings = [zxz_string(n, i) for i in range(n)]
        forward = LayerSpec("zxz", PauliSum.from_terms(n, [(1.0, s) for s in strings]))
        backward = LayerSpec(
            "zxz", PauliSum.from_terms(n, [(1.0, s) for s in reversed(strings)])
        )
        state = random_state(n, 5)
        np.testing.assert_allclose(
            apply_layer(forward, 0.43, state).amplitudes,
            apply_layer(backward, 0.43, state).amplitudes,
            atol=1e-12,
        )

    def test_diagonal_fast_path_matches_rotations(self):
        state = random_state(5, 6)
        for layer in (zz_ring_layer(5), z_layer(5)):
            self.assertTrue(layer.is_diagonal)
            np.testing.assert_allclose(
                apply_layer(layer, 1.3, state).amplitudes,
                apply_layer(layer, 1.3, state, fast_path=False).amplitudes,
                atol=1e-12,
            )

    def test_dense_exponential_oracle(self):
        for n in range(2, 6):
            state = random_state(n, n)
            for layer in (zz_ring_layer(n), x_layer(n), z_layer(n)):
                unitary = la.expm(-1j * 0.77 * to_dense(layer.generator))
                np.testing.assert_allclose(
                    apply_layer(layer, 0.77, state).amplitudes,
                    unitary @ state.amplitudes,
                    atol=1e-10,
                )

    def test_tagged_layers_conserve_parity(self):
        n = 6
        parity = x_product(n, range(n))
        layers = [zz_ring_layer(n, (parity,)), x_layer(n, (parity,))]
        observable = PauliSum.from_terms(n, [(1.0, parity)])
        state = random_state(n, 7)
        before = expectation(observable, state)
        rng = make_rng(8)
        for _step in range(5):
            for layer in layers:
                state = apply_layer(layer, rng.uniform(-2, 2), state)
        self.assertAlmostEqual(expectation(observable, state), before, delta=1e-10)


class LayerSpecTestCase(SimpleTestCase):
    def test_rejects_noncommuting_generator(self):
        generator = PauliSum.from_terms(
            1, [(1.0, PauliString(1, ((0, "X"),))), (1.0, PauliString(1, ((0, "Z"),)))]
        )
        with self.assertRaises(ValidationError):
            LayerSpec("bad", generator)

    def test_rejects_tag_that_does_not_commute(self):
        with self.assertRaises(ValidationError):
            LayerSpec(
                "z",
                PauliSum.from_terms(3, [(1.0, PauliString(3, ((0, "Z"),)))]),
                (x_product(3, range(3)),),
            )


class InnerTestCase(SimpleTestCase):
    def test_normalized_state(self):
        state = random_state(3, 9)
        self.assertAlmostEqual(inner(state, state), 1.0, places=12)

    def test_orthogonal_basis_states(self):
        self.assertEqual(inner(basis_state(1, 0), basis_state(1, 1)), 0)

    def test_plus_overlap(self):
        self.assertAlmostEqual(inner(plus_state(1), basis_state(1, 0)), 2**-0.5, places=15)

    def test_conjugates_left_argument(self):
        a = Statevector(1, [1j, 0])
        b = basis_state(1, 0)
        self.assertEqual(inner(a, b), -1j)
