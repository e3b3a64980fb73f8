import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from ansatz.circuits import (
    AnsatzFamily,
    AnsatzSpec,
    InitKind,
    InitStrategy,
    InsertPosition,
    NewBlock,
    build_ansatz,
    build_family,
    cluster_open_bare,
    family_for,
    init_params,
    insert_block,
    prepare_state,
    qaoa_tfi,
    sb_cluster_open,
    sb_tfc,
    sb_tfi,
    tfc_bare,
    x_layer,
)
from core.utils import make_rng
from hamiltonians.builders import ModelSpec, build_tfi, parity_ops
from pauli.operators import PauliSum, expectation
from statevector.engine import plus_state


def parity_values(spec, state):
    model = "tfi" if spec.family in (AnsatzFamily.QAOA_TFI, AnsatzFamily.SB_TFI) else "tfc"
    return [
        expectation(PauliSum.from_terms(spec.n_qubits, [(1.0, p)]), state)
        for p in parity_ops(ModelSpec(model, spec.n_qubits))
    ]


def shifted(index, n, s):
    return ((index << s) | (index >> (n - s))) & (2**n - 1)


class AnsatzSpecTestCase(SimpleTestCase):
    def test_param_counts(self):
        cases = [
            (qaoa_tfi, 3),
            (sb_tfi, 3),
            (tfc_bare, 2),
            (sb_tfc, 4),
            (sb_cluster_open, 4),
            (cluster_open_bare, 2),
        ]
        for builder, width in cases:
            for depth in (1, 2, 5):
                self.assertEqual(builder(6, depth).n_params, width * depth)

    def test_odd_sizes_rejected(self):
        for builder in (qaoa_tfi, tfc_bare, sb_tfc, sb_cluster_open, cluster_open_bare):
            with self.assertRaises(ValidationError):
                builder(5, 1)

    def test_sb_tfi_accepts_odd_sizes(self):
        self.assertEqual(sb_tfi(5, 2).n_params, 6)

    def test_invalid_depth(self):
        with self.assertRaises(ValidationError):
            sb_tfi(4, 0)

    def test_layer_size_mismatch(self):
        with self.assertRaises(ValidationError):
            AnsatzSpec(4, 1, (x_layer(3),))

    def test_layout_is_block_major(self):
        spec = sb_tfc(6, 3)
        self.assertEqual(sorted(spec.param_layout.values()), list(range(spec.n_params)))
        self.assertEqual(spec.param_index(1, 2), 6)
        self.assertEqual(spec.param_index(2, 0), 8)
        self.assertEqual([layer.label for layer in spec.layers()[:5]], ["zxz", "x", "z_odd", "z_even", "zxz"])

    def test_symmetry_breaking_indices(self):
        self.assertEqual(sb_tfi(4, 3).symmetry_breaking_indices(), [2, 5, 8])
        self.assertEqual(sb_tfc(4, 2).symmetry_breaking_indices(), [2, 3, 6, 7])
        self.assertEqual(qaoa_tfi(4, 3).symmetry_breaking_indices(), [])

    def test_conserved_parities(self):
        self.assertEqual([p.label() for p in qaoa_tfi(4, 1).conserved_parities()], ["X0 X1 X2 X3"])
        self.assertEqual(len(tfc_bare(6, 1).conserved_parities()), 2)
        self.assertEqual(sb_tfi(4, 1).conserved_parities(), [])
        self.assertEqual(sb_tfc(6, 1).conserved_parities(), [])

    def test_check_params(self):
        with self.assertRaises(ValidationError):
            sb_tfi(4, 2).check_params(np.zeros(5))

    def test_with_depth(self):
        spec = sb_tfc(6, 2).with_depth(5)
        self.assertEqual((spec.depth, spec.n_params, spec.family), (5, 20, AnsatzFamily.SB_TFC))


class FamilyLookupTestCase(SimpleTestCase):
    def test_circuit_choices(self):
        self.assertEqual(family_for("tfi", "qaoa"), AnsatzFamily.QAOA_TFI)
        self.assertEqual(family_for("tfi", "bare"), AnsatzFamily.QAOA_TFI)
        self.assertEqual(family_for("tfi", "sb"), AnsatzFamily.SB_TFI)
        self.assertEqual(family_for("tfc", "bare"), AnsatzFamily.TFC_BARE)
        self.assertEqual(family_for("cluster", "sb"), AnsatzFamily.SB_CLUSTER_OPEN)

    def test_unknown_combinations(self):
        for model, circuit in [("ising", "qaoa"), ("tfi", "hea")]:
            with self.assertRaises(ValidationError):
                family_for(model, circuit)

    def test_build(self):
        self.assertEqual(build_ansatz("tfc", "sb", 6, 2).family, AnsatzFamily.SB_TFC)
        with self.assertRaises(ValidationError):
            build_family("custom", 4, 1)


class PrepareStateTestCase(SimpleTestCase):
    def test_zero_parameters_give_plus_state(self):
        for spec in (qaoa_tfi(4, 2), sb_tfi(5, 3), sb_tfc(6, 2), sb_cluster_open(6, 1)):
            np.testing.assert_allclose(
                prepare_state(spec, np.zeros(spec.n_params)).amplitudes,
                plus_state(spec.n_qubits).amplitudes,
                atol=1e-15,
            )

    def test_qaoa_conserves_parity(self):
        spec = qaoa_tfi(10, 2)
        rng = make_rng(0)
        for _point in range(20):
            state = prepare_state(spec, rng.uniform(-math.pi, math.pi, spec.n_params))
            self.assertAlmostEqual(parity_values(spec, state)[0], 1.0, delta=1e-10)

    def test_tfc_bare_conserves_both_sublattice_parities(self):
        spec = tfc_bare(8, 3)
        rng = make_rng(1)
        for _point in range(10):
            state = prepare_state(spec, rng.uniform(-math.pi, math.pi, spec.n_params))
            for value in parity_values(spec, state):
                self.assertAlmostEqual(value, 1.0, delta=1e-10)

    def test_sb_tfi_breaks_parity(self):
        state = prepare_state(sb_tfi(4, 1), [0.0, 0.0, math.pi / 4])
        self.assertAlmostEqual(parity_values(sb_tfi(4, 1), state)[0], 0.0, delta=1e-12)

    def test_sb_tfc_reduces_to_bare_circuit(self):
        rng = make_rng(2)
        bare = rng.uniform(-1, 1, (3, 2))
        full = np.hstack([bare, np.zeros((3, 2))]).ravel()
        np.testing.assert_allclose(
            prepare_state(sb_tfc(6, 3), full).amplitudes,
            prepare_state(tfc_bare(6, 3), bare.ravel()).amplitudes,
            atol=1e-12,
        )

    def test_translation_invariance(self):
        rng = make_rng(3)
        for spec, step in [(sb_tfi(6, 2), 1), (sb_tfc(6, 2), 2), (qaoa_tfi(6, 2), 2)]:
            amplitudes = prepare_state(
                spec, rng.uniform(-1, 1, spec.n_params)
            ).amplitudes
            moved = [amplitudes[shifted(index, 6, step)] for index in range(64)]
            np.testing.assert_allclose(moved, amplitudes, atol=1e-12)

    def test_norm_preserved(self):
        spec = sb_cluster_open(8, 4)
        state = prepare_state(spec, make_rng(4).uniform(-3, 3, spec.n_params))
        self.assertAlmostEqual(state.norm(), 1.0, places=10)


class InitStrategyTestCase(SimpleTestCase):
    def test_parse(self):
        strategy = InitStrategy.parse("sboffset:0.01", seed=4)
        self.assertEqual(strategy.kind, InitKind.SB_OFFSET)
        self.assertEqual(strategy.sigma, 0.01)
        self.assertEqual(strategy.seed, 4)
        self.assertEqual(InitStrategy.parse("Normal").sigma, 0.001)
        self.assertEqual(strategy.label(), "sboffset:0.01")

    def test_parse_errors(self):
        for text in ("uniform:0.1", "normal:abc", "normal:-1", "normal:0"):
            with self.assertRaises(ValidationError):
                InitStrategy.parse(text)

    def test_same_seed_same_parameters(self):
        spec = sb_tfi(6, 3)
        first = init_params(spec, InitStrategy(sigma=0.1, seed=7))
        second = init_params(spec, InitStrategy(sigma=0.1, seed=7))
        other = init_params(spec, InitStrategy(sigma=0.1, seed=8))
        np.testing.assert_array_equal(first, second)
        self.assertFalse(np.array_equal(first, other))

    def test_normal_width(self):
        params = init_params(sb_tfi(4, 200), InitStrategy(sigma=0.5, seed=1))
        self.assertEqual(params.shape, (600,))
        self.assertLess(abs(params.std() - 0.5), 0.1)
        self.assertLess(abs(params.mean()), 0.1)

    def test_sb_offset(self):
        spec = sb_tfi(4, 3)
        params = init_params(spec, InitStrategy(InitKind.SB_OFFSET, 1e-9, 0))
        np.testing.assert_allclose(params[[2, 5, 8]], 2 * math.pi / 3, atol=1e-7)
        np.testing.assert_allclose(params[[0, 1, 3, 4, 6, 7]], 0.0, atol=1e-7)

    def test_explicit_offset(self):
        spec = sb_tfc(4, 2)
        params = init_params(spec, InitStrategy(InitKind.SB_OFFSET, 1e-9, 0, offset=0.25))
        np.testing.assert_allclose(params[spec.symmetry_breaking_indices()], 0.25, atol=1e-7)

    def test_offset_without_symmetry_breaking_layers(self):
        spec = qaoa_tfi(4, 2)
        with self.assertLogs("ansatz.circuits", level="WARNING"):
            params = init_params(spec, InitStrategy(InitKind.SB_OFFSET, 1e-9, 0))
        np.testing.assert_allclose(params, 0.0, atol=1e-7)

    def test_with_seed(self):
        self.assertEqual(InitStrategy(sigma=0.2).with_seed(5), InitStrategy(sigma=0.2, seed=5))


class InsertBlockTestCase(SimpleTestCase):
    def test_grows_by_one_block(self):
        spec = sb_tfi(18, 3)
        grown, params = insert_block(spec, np.zeros(9), rng=make_rng(0))
        self.assertEqual(grown.depth, 4)
        self.assertEqual(params.shape, (12,))

    def test_positions(self):
        spec = sb_tfi(4, 3)
        params = np.arange(1.0, 10.0)
        rows = {}
        for position in InsertPosition:
            grown, new = insert_block(
                spec, params, perturb_sigma=0, position=position, new_block=NewBlock.ZERO
            )
            rows[position] = new.reshape(4, 3)
        np.testing.assert_array_equal(rows[InsertPosition.FLOOR][1], [0, 0, 0])
        np.testing.assert_array_equal(rows[InsertPosition.FLOOR][2], [4, 5, 6])
        np.testing.assert_array_equal(rows[InsertPosition.CEIL][2], [0, 0, 0])
        np.testing.assert_array_equal(rows[InsertPosition.CEIL][1], [4, 5, 6])

    def test_even_depth_positions_agree(self):
        spec = sb_tfi(4, 2)
        params = np.arange(6.0)
        floor = insert_block(spec, params, 0, position="floor", new_block="zero")[1]
        ceil = insert_block(spec, params, 0, position="ceil", new_block="zero")[1]
        np.testing.assert_array_equal(floor, ceil)

    def test_zero_insertion_keeps_energy(self):
        spec = sb_tfi(6, 3)
        params = make_rng(5).uniform(-1, 1, spec.n_params)
        h = build_tfi(6, 0.5)
        grown, new = insert_block(spec, params, perturb_sigma=0, new_block=NewBlock.ZERO)
        self.assertAlmostEqual(
            expectation(h, prepare_state(grown, new)),
            expectation(h, prepare_state(spec, params)),
            places=12,
        )

    def test_perturbation_is_seeded(self):
        spec = sb_tfc(6, 2)
        params = np.zeros(spec.n_params)
        first = insert_block(spec, params, 0.01, make_rng(3))[1]
        second = insert_block(spec, params, 0.01, make_rng(3))[1]
        np.testing.assert_array_equal(first, second)
        self.assertGreater(np.abs(first).max(), 0)
        self.assertLess(np.abs(first).max(), 0.1)

    def test_length_mismatch(self):
        with self.assertRaises(ValidationError):
            insert_block(sb_tfi(4, 2), np.zeros(5))
