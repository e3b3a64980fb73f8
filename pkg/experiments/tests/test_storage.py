import json
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from ansatz.circuits import prepare_state, sb_tfi
from core.exceptions import IncompatibleCheckpointError
from experiments.storage import (
    CHECKPOINT_FILE,
    CURVE_COLUMNS,
    Checkpoint,
    best_checkpoint,
    find_checkpoints,
    read_learning_curve,
    write_column_hints,
    write_json,
    write_learning_curve,
    write_table,
)
from hamiltonians.builders import ModelSpec, build_tfi
from optimizer.qng import EpochRow, RunRecord
from pauli.operators import expectation


def make_checkpoint(seed=3, params=(0.1, -0.2, 0.3, 0.05, 0.0, -0.4)):
    spec = sb_tfi(4, 2)
    energy = expectation(build_tfi(4, 1.0), prepare_state(spec, np.array(params)))
    return Checkpoint(
        model=ModelSpec("tfi", 4, 1.0).as_dict(),
        family=spec.family.value,
        n_qubits=4,
        depth=2,
        params=list(params),
        final_energy=energy,
        e_gs=-5.226251859505504,
        seed=seed,
        epochs=10,
    )


class TempDirMixin:
    def setUp(self):
        super().setUp()
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)


class LearningCurveTestCase(TempDirMixin, SimpleTestCase):
    def test_rows_and_padding(self):
        record = RunRecord(
            rows=[
                EpochRow(0, -1.5, -1.5, 0.25, (1.0,), -1.5),
                EpochRow(1, -1.75, -1.75, 0.1, (0.9999999999999998,), -1.75),
            ]
        )
        path = write_learning_curve(self.root / "run" / "learning_curve.csv", record)
        lines = path.read_text(encoding="utf-8").splitlines()
        self.assertEqual(lines[0], ",".join(CURVE_COLUMNS))
        self.assertEqual(lines[1], "0,-1.5,-1.5,0.25,1.0,")
        self.assertEqual(lines[2], "1,-1.75,-1.75,0.1,0.9999999999999998,")
        self.assertEqual(read_learning_curve(path)[1]["p1"], "0.9999999999999998")
        self.assertEqual(sorted(p.name for p in path.parent.iterdir()), ["learning_curve.csv"])

    def test_two_parities(self):
        record = RunRecord(rows=[EpochRow(0, 1.0, -3.0, 0.0, (-1.0, -1.0), -3.0)])
        path = write_learning_curve(self.root / "curve.csv", record)
        self.assertEqual(read_learning_curve(path)[0]["p2"], "-1.0")

    def test_empty_record_writes_header(self):
        path = write_learning_curve(self.root / "curve.csv", RunRecord())
        self.assertEqual(path.read_text(encoding="utf-8"), ",".join(CURVE_COLUMNS) + "\n")


class TableTestCase(TempDirMixin, SimpleTestCase):
    def test_table_cells(self):
        rows = [{"n": 4, "e_gs": -4.758770483143634, "best_seed": None}]
        path = write_table(self.root / "summary.csv", rows, ["n", "e_gs", "best_seed", "missing"])
        self.assertEqual(
            path.read_text(encoding="utf-8"),
            "n,e_gs,best_seed,missing\n4,-4.758770483143634,,\n",
        )

    def test_json(self):
        path = write_json(self.root / "summary.json", {"cells": [{"x": 0.1}], "errors": []})
        self.assertEqual(json.loads(path.read_text(encoding="utf-8"))["cells"][0]["x"], 0.1)

    def test_column_hints(self):
        path = write_column_hints(self.root)
        self.assertEqual(path.name, "columns.txt")
        self.assertIn("grad_norm", path.read_text(encoding="utf-8"))


class CheckpointTestCase(TempDirMixin, SimpleTestCase):
    def test_round_trip(self):
        checkpoint = make_checkpoint()
        path = checkpoint.save(self.root / CHECKPOINT_FILE)
        self.assertEqual(json.loads(path.read_text())["checkpoint_id"], "sb_tfi-n4-d2-s3")
        loaded = Checkpoint.load(path)
        self.assertEqual(loaded, checkpoint)
        self.assertEqual(loaded.model_spec(), ModelSpec("tfi", 4, 1.0))

    def test_reevaluation_reproduces_energy(self):
        checkpoint = make_checkpoint()
        loaded = Checkpoint.load(checkpoint.save(self.root / CHECKPOINT_FILE))
        self.assertAlmostEqual(loaded.evaluate(), checkpoint.final_energy, delta=1e-10)

    def test_rejects_other_format_version(self):
        path = replace(make_checkpoint(), format_version=99).save(self.root / "c.json")
        with self.assertRaises(IncompatibleCheckpointError):
            Checkpoint.load(path)

    def test_rejects_other_layout(self):
        path = replace(make_checkpoint(), layout_id="layer-major").save(self.root / "c.json")
        with self.assertRaises(IncompatibleCheckpointError):
            Checkpoint.load(path)

    def test_rejects_wrong_parameter_count(self):
        path = replace(make_checkpoint(), params=[0.0] * 5).save(self.root / "c.json")
        with self.assertRaises(ValidationError):
            Checkpoint.load(path)

    def test_best_checkpoint(self):
        good = replace(make_checkpoint(seed=1), final_energy=-5.0)
        bad = make_checkpoint(seed=2)
        good.save(self.root / "replica_00" / CHECKPOINT_FILE)
        bad.save(self.root / "replica_01" / CHECKPOINT_FILE)
        self.assertEqual(len(find_checkpoints(self.root)), 2)
        self.assertEqual(best_checkpoint(self.root).seed, 1)
        self.assertEqual(best_checkpoint(self.root / "replica_01" / CHECKPOINT_FILE).seed, 2)

    def test_missing_checkpoint(self):
        with self.assertRaises(IncompatibleCheckpointError):
            best_checkpoint(self.root / "nothing-here")
