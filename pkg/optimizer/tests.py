import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from ansatz.circuits import (
    AnsatzSpec,
    InitStrategy,
    init_params,
    prepare_state,
    qaoa_tfi,
    sb_cluster_open,
    sb_tfi,
    x_layer,
)
from core.exceptions import StepSolveError
from derivatives.fisher import FisherMatrix, FisherVariant
from exact.solvers import dense_ground
from hamiltonians.builders import (
    ModelSpec,
    build_cluster_open,
    build_tfi,
    parity_ops,
    single_site,
    x_product,
)
from optimizer.qng import (
    OptimizerConfig,
    RunRecord,
    lambda_schedule,
    minimize,
    natural_gradient_step,
    penalty_objective,
    penalty_sector,
)
from pauli.operators import PauliSum, expectation
from statevector.states import basis_state


def quick_config(**changes):
    values = {"eta": 0.05, "lambda0": 1.0, "max_epochs": 30, "stop_window": 50}
    values.update(changes)
    return OptimizerConfig(**values)


class OptimizerConfigTestCase(SimpleTestCase):
    def test_defaults(self):
        cfg = OptimizerConfig()
        self.assertEqual(
            cfg.as_dict(),
            {
                "eta": 0.01,
                "lambda0": 100.0,
                "lambda_decay": 0.9,
                "lambda_floor": 1e-3,
                "max_epochs": 2000,
                "stop_window": 50,
                "stop_tol": 1e-12,
                "fisher_variant": "centered",
            },
        )

    def test_invalid_values(self):
        for changes in (
            {"eta": 0.0},
            {"lambda_decay": 1.0},
            {"lambda_decay": 0.0},
            {"lambda_floor": -1.0},
            {"max_epochs": 0},
            {"stop_window": 0},
        ):
            with self.assertRaises(ValidationError, msg=str(changes)):
                OptimizerConfig(**changes)

    def test_unknown_variant(self):
        with self.assertRaises(ValueError):
            OptimizerConfig(fisher_variant="diagonal")

    def test_variant_coerced(self):
        self.assertIs(
            OptimizerConfig(fisher_variant="uncentered").fisher_variant,
            FisherVariant.UNCENTERED,
        )


class LambdaScheduleTestCase(SimpleTestCase):
    def test_geometric_decay_with_floor(self):
        cfg = OptimizerConfig()
        self.assertEqual(lambda_schedule(cfg, 0), 100.0)
        self.assertAlmostEqual(lambda_schedule(cfg, 1), 90.0, places=12)
        self.assertAlmostEqual(lambda_schedule(cfg, 10), 100 * 0.9**10, places=12)
        self.assertEqual(lambda_schedule(cfg, 500), 1e-3)

    def test_nonincreasing(self):
        cfg = OptimizerConfig(lambda0=5.0, lambda_decay=0.5, lambda_floor=0.01)
        values = [lambda_schedule(cfg, t) for t in range(20)]
        self.assertEqual(values, sorted(values, reverse=True))
        self.assertEqual(values[-1], 0.01)


class NaturalGradientStepTestCase(SimpleTestCase):
    def test_identity_metric(self):
        new = natural_gradient_step([0.0, 0.0], [2.0, 4.0], np.eye(2), 0.5, 1.0)
        np.testing.assert_allclose(new, [-0.5, -1.0])

    def test_accepts_fisher_matrix(self):
        fisher = FisherMatrix(np.diag([1.0, 3.0]))
        new = natural_gradient_step([1.0, 1.0], [1.0, 1.0], fisher, 1.0, 1.0)
        np.testing.assert_allclose(new, [0.5, 0.75])

    def test_regularized_solve(self):
        fisher = np.array([[2.0, 0.5], [0.5, 1.0]])
        grad = np.array([0.3, -0.7])
        new = natural_gradient_step(np.zeros(2), grad, fisher, 0.1, 0.01)
        expected = -0.1 * np.linalg.solve(fisher + 0.01 * np.eye(2), grad)
        np.testing.assert_allclose(new, expected, atol=1e-14)

    def test_least_squares_fallback(self):
        with self.assertLogs("optimizer.qng", level="WARNING"):
            new = natural_gradient_step([0.0, 0.0], [1.0, -2.0], -2 * np.eye(2), 0.1, 1.0)
        np.testing.assert_allclose(new, [0.1, -0.2], atol=1e-14)

    def test_unsolvable_system(self):
        with self.assertLogs("optimizer.qng", level="WARNING"):
            with self.assertRaises(StepSolveError):
                natural_gradient_step([0.0, 0.0], [1.0, 1.0], -np.eye(2), 0.1, 1.0)

    def test_size_mismatch(self):
        with self.assertRaises(ValidationError):
            natural_gradient_step([0.0, 0.0], [1.0, 1.0], np.eye(3), 0.1, 1.0)


class PenaltyTestCase(SimpleTestCase):
    def test_sector(self):
        self.assertEqual(penalty_sector(2.0), -1.0)
        self.assertEqual(penalty_sector(-0.5), 1.0)

    def test_zero_weights_add_nothing(self):
        h = build_cluster_open(6)
        p1, p2 = parity_ops(ModelSpec("cluster", 6))
        self.assertEqual(penalty_objective(h, [(0.0, p1), (0.0, p2)]).terms, h.terms)

    def test_five_site_ground_sector(self):
        h = build_cluster_open(5)
        p1, p2 = x_product(5, [1, 3]), x_product(5, [0, 2, 4])
        objective = penalty_objective(h, [(2.0, p1), (2.0, p2)])
        self.assertEqual(len(objective), 5)
        truth = dense_ground(objective, keep_state=True)
        self.assertAlmostEqual(truth.energy, -7.0, places=10)
        self.assertEqual(truth.degeneracy, 1)
        for parity in (p1, p2):
            value = expectation(PauliSum.from_terms(5, [(1.0, parity)]), truth.state)
            self.assertAlmostEqual(value, -1.0, places=10)
        self.assertAlmostEqual(expectation(h, truth.state), -3.0, places=10)

    def test_size_mismatch(self):
        with self.assertRaises(ValidationError):
            penalty_objective(build_cluster_open(5), [(1.0, x_product(4, [1, 3]))])


class MinimizeTestCase(SimpleTestCase):
    def test_energy_decreases(self):
        spec = sb_tfi(4, 2)
        h = build_tfi(4, 1.0)
        e_gs = dense_ground(h).energy
        init = init_params(spec, InitStrategy(sigma=0.5, seed=0))
        record = minimize(h, spec, init, quick_config(), reference_energy=e_gs, seed=0)
        energies = record.energies()
        self.assertEqual(record.epochs_run, 30)
        self.assertLess(energies[-1], energies[0] - 1e-3)
        self.assertTrue(np.all(energies >= e_gs - 1e-9))
        best = [row.best_energy for row in record.rows]
        np.testing.assert_allclose(best, np.minimum.accumulate(energies))
        self.assertEqual([row.epoch for row in record.rows], list(range(30)))
        self.assertFalse(record.converged)
        self.assertEqual(record.seed, 0)

    def test_final_params_belong_to_last_row(self):
        spec = sb_tfi(4, 1)
        h = build_tfi(4, 0.5)
        record = minimize(h, spec, [0.1, 0.2, 0.3], quick_config(max_epochs=5))
        state_energy = expectation(h, prepare_state(spec, record.final_params))
        self.assertEqual(state_energy, record.final_energy)

    def test_stationary_point_converges(self):
        spec = AnsatzSpec(1, 1, (x_layer(1),), initial_state=basis_state(1, 0))
        h = PauliSum.from_terms(1, [(1.0, single_site(1, 0, "Z"))])
        record = minimize(h, spec, [math.pi / 2], quick_config(stop_window=5))
        self.assertTrue(record.converged)
        self.assertEqual(record.epochs_run, 5)
        self.assertAlmostEqual(record.final_energy, -1.0, places=12)

    def test_ground_state_parameters_do_not_drift(self):
        # block 1 turns |+> into |+i>, block 2 rotates it onto |0>
        spec = sb_tfi(4, 2)
        h = build_tfi(4, 0.0)
        converged = np.array([0.0, 0.0, math.pi / 4, 0.0, math.pi / 4, 0.0])
        self.assertAlmostEqual(expectation(h, prepare_state(spec, converged)), -4.0, places=12)
        record = minimize(h, spec, converged, quick_config(max_epochs=100, stop_window=100))
        self.assertEqual(record.epochs_run, 100)
        energies = record.energies()
        self.assertLess(np.abs(energies - energies[0]).max(), 1e-9)
        self.assertAlmostEqual(record.final_energy, -4.0, delta=1e-9)

    def test_single_epoch_does_not_step(self):
        spec = sb_tfi(4, 1)
        init = np.array([0.1, 0.2, 0.3])
        record = minimize(build_tfi(4, 1.0), spec, init, quick_config(max_epochs=1))
        self.assertEqual(record.epochs_run, 1)
        np.testing.assert_array_equal(record.final_params, init)

    def test_first_row_independent_of_variant(self):
        spec = sb_tfi(4, 2)
        h = build_tfi(4, 1.0)
        init = init_params(spec, InitStrategy(sigma=0.3, seed=2))
        rows = [
            minimize(h, spec, init, quick_config(max_epochs=3, fisher_variant=variant)).rows[0]
            for variant in FisherVariant
        ]
        self.assertEqual(rows[0], rows[1])

    def test_same_inputs_same_record(self):
        spec = sb_tfi(4, 2)
        h = build_tfi(4, 1.0)
        init = init_params(spec, InitStrategy(sigma=0.3, seed=3))
        first = minimize(h, spec, init, quick_config(max_epochs=10))
        second = minimize(h, spec, init, quick_config(max_epochs=10))
        self.assertEqual(first.rows, second.rows)
        np.testing.assert_array_equal(first.final_params, second.final_params)

    def test_non_finite_start_aborts(self):
        spec = sb_tfi(4, 1)
        with self.assertLogs("optimizer.qng", level="ERROR"):
            record = minimize(build_tfi(4, 1.0), spec, [math.nan, 0.0, 0.0], quick_config())
        self.assertTrue(record.aborted)
        self.assertEqual(record.epochs_run, 0)
        self.assertIn("non-finite", record.message)
        self.assertTrue(math.isnan(record.final_energy))

    def test_tracked_parity_is_conserved(self):
        spec = qaoa_tfi(4, 2)
        (parity,) = parity_ops(ModelSpec("tfi", 4))
        init = init_params(spec, InitStrategy(sigma=0.5, seed=4))
        record = minimize(
            build_tfi(4, 1.0), spec, init, quick_config(max_epochs=10), track=[parity]
        )
        for row in record.rows:
            self.assertEqual(len(row.parities), 1)
            self.assertAlmostEqual(row.parities[0], 1.0, delta=1e-10)
        self.assertEqual(record.final_parities, record.rows[-1].parities)

    def test_penalty_objective_and_energy_columns(self):
        spec = sb_cluster_open(6, 1)
        h = build_cluster_open(6)
        parities = parity_ops(ModelSpec("cluster", 6))
        objective = penalty_objective(h, [(2.0, p) for p in parities])
        init = init_params(spec, InitStrategy(sigma=0.5, seed=5))
        record = minimize(
            objective, spec, init, quick_config(max_epochs=5), track=parities, hamiltonian=h
        )
        for row in record.rows:
            self.assertAlmostEqual(
                row.objective - row.energy, 2.0 * sum(row.parities), delta=1e-10
            )

    def test_warns_below_reference_energy(self):
        spec = sb_tfi(4, 1)
        with self.assertLogs("optimizer.qng", level="WARNING"):
            minimize(
                build_tfi(4, 1.0),
                spec,
                np.zeros(3),
                quick_config(max_epochs=1),
                reference_energy=0.0,
            )


class RunRecordTestCase(SimpleTestCase):
    def test_empty_record(self):
        record = RunRecord()
        self.assertEqual(record.epochs_run, 0)
        self.assertTrue(math.isnan(record.final_energy))
        self.assertEqual(record.final_parities, ())

    def test_normalized(self):
        spec = sb_tfi(4, 1)
        h = build_tfi(4, 1.0)
        record = minimize(h, spec, np.zeros(3), quick_config(max_epochs=1))
        # |+>^4 has energy -4
        self.assertAlmostEqual(record.normalized(-5.0), 0.2, places=12)
