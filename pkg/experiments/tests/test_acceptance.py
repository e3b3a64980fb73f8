"""
End-to-end convergence checks on reduced grids. They take minutes to hours and
only run with RUN_SLOW_TESTS=True:

    RUN_SLOW_TESTS=True python manage.py test --tag=slow
"""

import tempfile
from dataclasses import replace
from pathlib import Path
from unittest import skipUnless

from django.conf import settings
from django.test import SimpleTestCase, tag

from exact.solvers import normalized_energy
from experiments.config import load_experiment_config
from experiments.runner import ReplicaResult
from experiments.services import (
    cmd_penalty,
    cmd_solve,
    cmd_sweep_setups,
    cmd_transfer,
    in_target_sector,
)
from experiments.storage import CHECKPOINT_FILE, CURVE_FILE, Checkpoint, read_learning_curve

slow = skipUnless(settings.RUN_SLOW_TESTS, "set RUN_SLOW_TESTS=True to run")


@tag("slow")
@slow
class ConvergenceTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)

    def config(self, out, **overrides):
        values = {"out": str(self.root / out), "jobs": str(settings.VQE_JOBS)}
        values.update({key: str(value) for key, value in overrides.items()})
        return load_experiment_config(overrides=values)

    def best(self, outcome, depth=None):
        rows = [row for row in outcome.rows if depth is None or row["depth"] == depth]
        return min(row["best_normalized"] for row in rows)

    def test_qaoa_depth_threshold(self):
        config = self.config("qaoa", model="tfi", n=8, h=0.5, ansatz="qaoa", depth="2,4")
        outcome = cmd_solve(config)
        self.assertLess(self.best(outcome, 4), 1e-7)
        self.assertGreater(self.best(outcome, 2), 1e-3)

        rerun = cmd_solve(replace(config, out_dir=self.root / "rerun"))
        self.assertEqual(rerun.rows, outcome.rows)
        self.assertEqual(
            (self.root / "qaoa" / "summary.csv").read_bytes(),
            (self.root / "rerun" / "summary.csv").read_bytes(),
        )

    def test_symmetry_breaking_constant_depth(self):
        outcome = cmd_solve(self.config("sb12", model="tfi", n=12, h=0.5, ansatz="sb", depth=9))
        self.assertLessEqual(self.best(outcome), 1e-7)

    def test_offset_initialization_beats_normal(self):
        outcome = cmd_sweep_setups(
            self.config("grid", model="tfi", n=12, h=0.5, ansatz="sb", depth=3)
        )
        by_init = {}
        for row in outcome.rows:
            kind = row["init"].split(":")[0]
            by_init[kind] = min(by_init.get(kind, float("inf")), row["best_normalized"])
        self.assertLess(by_init["sboffset"] * 10, by_init["normal"])

    def test_transfer_improves_on_source(self):
        source = cmd_solve(self.config("d3", model="tfi", n=10, h=0.5, ansatz="sb", depth=3))
        outcome = cmd_transfer(
            self.config(
                "d4", model="tfi", n=10, h=0.5, ansatz="sb", source=self.root / "d3"
            )
        )
        self.assertLess(self.best(outcome), self.best(source))

    def test_tfc_threshold(self):
        outcome = cmd_solve(self.config("tfc", model="tfc", n=12, h=0.5, ansatz="bare", depth=3))
        self.assertLessEqual(self.best(outcome), 1e-7)

    def test_penalty_selects_odd_sector(self):
        outcome = cmd_penalty(
            self.config(
                "penalty",
                model="cluster",
                n=10,
                ansatz="sb",
                depth=14,
                eta=0.025,
                alpha=2.0,
                replicas=8,
            )
        )
        selected = 0
        for k in range(8):
            replica = self.root / "penalty" / "n10_d14" / f"replica_{k:02d}"
            last = read_learning_curve(replica / CURVE_FILE)[-1]
            checkpoint = Checkpoint.load(replica / CHECKPOINT_FILE)
            result = ReplicaResult(k, replica, parities=(float(last["p1"]), float(last["p2"])))
            error = normalized_energy(checkpoint.final_energy, checkpoint.e_gs)
            if in_target_sector(result, (2.0, 2.0)) and error <= 1e-6:
                selected += 1
        self.assertGreaterEqual(selected, 6)
        self.assertLessEqual(self.best(outcome), 1e-6)
