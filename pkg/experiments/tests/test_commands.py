import csv
import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from experiments.storage import CHECKPOINT_FILE, CURVE_FILE, Checkpoint, read_learning_curve

QUICK = {
    "model": "tfi",
    "n": "4",
    "h": "1.0",
    "ansatz": "sb",
    "depth": "1",
    "init": "normal:0.3",
    "eta": "0.05",
    "lambda0": "1.0",
    "epochs": "5",
    "replicas": "2",
    "seed": "0",
    "jobs": "1",
}


def read_csv(path):
    with Path(path).open(encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)

    def call(self, name, out, **options):
        stdout = StringIO()
        merged = {**QUICK, **options}
        call_command(name, out=str(self.root / out), stdout=stdout, **merged)
        return stdout.getvalue()


class ExactCommandTestCase(CommandTestCase):
    def test_prints_one_json_line_per_size(self):
        output = self.call("exact", "exact", n="3,4", h="0.0")
        first, second = [json.loads(line) for line in output.splitlines()]
        self.assertEqual((first["model"], first["n"], first["h"]), ("tfi", 3, 0.0))
        self.assertAlmostEqual(first["energy"], -3.0, places=12)
        self.assertEqual(first["degeneracy"], 2)
        self.assertEqual(second["method"], "dense")
        self.assertFalse((self.root / "exact").exists())

    def test_cluster_omits_field(self):
        output = self.call("exact", "exact", model="cluster", n="5")
        entry = json.loads(output)
        self.assertNotIn("h", entry)
        self.assertEqual(entry["degeneracy"], 4)

    def test_lanczos(self):
        entry = json.loads(self.call("exact", "exact", n="6", method="lanczos"))
        self.assertEqual(entry["method"], "lanczos")
        self.assertIn("iterations", entry)

    def test_invalid_size(self):
        with self.assertRaises(CommandError):
            self.call("exact", "exact", model="tfc", n="5")


class SolveCommandTestCase(CommandTestCase):
    def test_outputs(self):
        output = self.call("solve", "solve", depth="1,2")
        out = self.root / "solve"
        self.assertIn("Results written", output)
        for name in ("effective_config.ini", "summary.json", "summary.csv"):
            self.assertTrue((out / name).is_file(), name)
        self.assertFalse((out / "columns.txt").exists())
        for depth in (1, 2):
            for k in (0, 1):
                replica = out / f"n4_d{depth}" / f"replica_{k:02d}"
                self.assertEqual(len(read_learning_curve(replica / CURVE_FILE)), 5)
                checkpoint = Checkpoint.load(replica / CHECKPOINT_FILE)
                self.assertEqual((checkpoint.depth, checkpoint.seed), (depth, k))

        summary = json.loads((out / "summary.json").read_text())
        self.assertEqual(summary["command"], "solve")
        self.assertEqual(summary["errors"], [])
        rows = read_csv(out / "summary.csv")
        self.assertEqual([row["depth"] for row in rows], ["1", "2"])
        for cell in summary["cells"]:
            self.assertEqual(cell["completed"], 2)
            self.assertGreaterEqual(cell["best_normalized"], -1e-9)
            self.assertIn(cell["best_seed"], (0, 1))

    def test_best_replica_matches_its_checkpoint(self):
        self.call("solve", "solve")
        out = self.root / "solve"
        cell = json.loads((out / "summary.json").read_text())["cells"][0]
        replica = out / "n4_d1" / f"replica_{cell['best_seed']:02d}"
        self.assertEqual(Checkpoint.load(replica / CHECKPOINT_FILE).final_energy, cell["best_energy"])

    def test_same_seed_same_bytes(self):
        self.call("solve", "first")
        self.call("solve", "second")
        for name in ("summary.csv", f"n4_d1/replica_01/{CURVE_FILE}", f"n4_d1/replica_01/{CHECKPOINT_FILE}"):
            self.assertEqual(
                (self.root / "first" / name).read_bytes(),
                (self.root / "second" / name).read_bytes(),
                name,
            )

    def test_parallel_replicas_match_serial(self):
        self.call("solve", "serial")
        self.call("solve", "parallel", jobs="2")
        self.assertEqual(
            (self.root / "serial" / "summary.csv").read_bytes(),
            (self.root / "parallel" / "summary.csv").read_bytes(),
        )

    def test_gnuplot_hints(self):
        self.call("solve", "hints", gnuplot_hints=True)
        self.assertTrue((self.root / "hints" / "columns.txt").is_file())

    def test_config_file(self):
        path = self.root / "experiment.ini"
        path.write_text("[run]\nreplicas = 1\n\n[optimizer]\nepochs = 3\n", encoding="utf-8")
        stdout = StringIO()
        call_command(
            "solve", config=str(path), n="4", h="1.0", depth="1",
            out=str(self.root / "from-file"), stdout=stdout,
        )
        rows = read_learning_curve(self.root / "from-file" / "n4_d1" / "replica_00" / CURVE_FILE)
        self.assertEqual(len(rows), 3)
        self.assertFalse((self.root / "from-file" / "n4_d1" / "replica_01").exists())

    def test_invalid_config(self):
        with self.assertRaisesMessage(CommandError, "Invalid configuration"):
            self.call("solve", "bad", n="four")

    def test_invalid_grid_fails_before_running(self):
        with self.assertRaises(CommandError):
            self.call("solve", "odd", ansatz="qaoa", n="5")
        self.assertFalse((self.root / "odd").exists())

    def test_failed_replica(self):
        with mock.patch("experiments.runner.minimize", side_effect=RuntimeError("boom")):
            with self.assertLogs("experiments.runner", level="ERROR"):
                with self.assertRaisesMessage(CommandError, "2 run(s) failed"):
                    self.call("solve", "failing")
        summary = json.loads((self.root / "failing" / "summary.json").read_text())
        self.assertEqual(len(summary["errors"]), 2)
        self.assertEqual(summary["errors"][0]["error"], "RuntimeError: boom")
        self.assertEqual(summary["cells"][0]["completed"], 0)
        self.assertIsNone(summary["cells"][0]["best_normalized"])


class PenaltyCommandTestCase(CommandTestCase):
    CLUSTER = {"model": "cluster", "n": "6", "depth": "1", "epochs": "3", "replicas": "1"}

    def test_single_cell(self):
        self.call("penalty", "penalty", alpha="2", **self.CLUSTER)
        out = self.root / "penalty"
        (row,) = read_csv(out / "summary.csv")
        self.assertEqual((row["alpha1"], row["alpha2"]), ("2.0", "2.0"))
        self.assertIn(row["target_sector"], ("0", "1"))
        curve = read_learning_curve(out / "n6_d1" / "replica_00" / CURVE_FILE)
        for epoch in curve:
            self.assertNotEqual(epoch["p2"], "")
            self.assertAlmostEqual(
                float(epoch["objective"]) - float(epoch["energy"]),
                2.0 * (float(epoch["p1"]) + float(epoch["p2"])),
                delta=1e-10,
            )

    def test_scan(self):
        self.call("penalty", "scan", alpha_scan="0,2", eta_scan="0.05,0.1", **self.CLUSTER)
        out = self.root / "scan"
        rows = read_csv(out / "summary.csv")
        self.assertEqual(len(rows), 4)
        self.assertEqual({(row["eta"], row["alpha1"]) for row in rows}, {
            ("0.05", "0.0"), ("0.05", "2.0"), ("0.1", "0.0"), ("0.1", "2.0"),
        })
        self.assertEqual({row["target_sector"] for row in rows if row["alpha1"] == "0.0"}, {""})
        self.assertTrue((out / "eta0.1_alpha2.0" / "n6_d1" / "replica_00" / CHECKPOINT_FILE).is_file())

    def test_requires_open_cluster(self):
        with self.assertRaisesMessage(CommandError, "open cluster"):
            self.call("penalty", "tfi-penalty")

    def test_weight_count(self):
        with self.assertRaises(CommandError):
            self.call("penalty", "three", alpha="1,2,3", **self.CLUSTER)


class SweepSetupsCommandTestCase(CommandTestCase):
    def test_grid(self):
        self.call("sweep_setups", "grid", epochs="2", replicas="1")
        out = self.root / "grid"
        rows = read_csv(out / "grid_summary.csv")
        self.assertEqual(
            {(row["fisher"], row["init"]) for row in rows},
            {
                ("centered", "normal:0.3"),
                ("centered", "sboffset:0.3"),
                ("uncentered", "normal:0.3"),
                ("uncentered", "sboffset:0.3"),
            },
        )
        for cell in ("centered_normal", "centered_sboffset", "uncentered_normal", "uncentered_sboffset"):
            self.assertTrue((out / cell / "summary.csv").is_file(), cell)

    def test_needs_symmetry_breaking_layers(self):
        with self.assertRaisesMessage(CommandError, "symmetry-breaking"):
            self.call("sweep_setups", "qaoa-grid", ansatz="qaoa")


class TransferCommandTestCase(CommandTestCase):
    def setUp(self):
        super().setUp()
        self.call("solve", "source")
        self.source = self.root / "source"

    def best_source(self):
        cell = json.loads((self.source / "summary.json").read_text())["cells"][0]
        return Checkpoint.load(
            self.source / "n4_d1" / f"replica_{cell['best_seed']:02d}" / CHECKPOINT_FILE
        )

    def test_zero_noise_transfer_starts_at_source_energy(self):
        self.call(
            "transfer", "grown", source=str(self.source), perturb="0", new_block="zero", epochs="3"
        )
        source = self.best_source()
        for k in (0, 1):
            replica = self.root / "grown" / "n4_d2" / f"replica_{k:02d}"
            first = read_learning_curve(replica / CURVE_FILE)[0]
            self.assertAlmostEqual(float(first["energy"]), source.final_energy, delta=1e-10)
            checkpoint = Checkpoint.load(replica / CHECKPOINT_FILE)
            self.assertEqual(checkpoint.depth, 2)
            self.assertEqual(checkpoint.source_id, source.checkpoint_id)
        (row,) = read_csv(self.root / "grown" / "summary.csv")
        self.assertEqual(row["source_id"], source.checkpoint_id)

    def test_chain(self):
        self.call("transfer", "chain", source=str(self.source), chain="2", epochs="3")
        rows = read_csv(self.root / "chain" / "summary.csv")
        self.assertEqual([row["depth"] for row in rows], ["2", "3"])
        self.assertNotEqual(rows[0]["source_id"], rows[1]["source_id"])
        self.assertTrue((self.root / "chain" / "n4_d3" / "replica_01" / CHECKPOINT_FILE).is_file())

    def test_each_size_grows_its_own_checkpoint(self):
        self.call("solve", "sizes", n="4,6")
        sizes = self.root / "sizes"
        self.call("transfer", "small", source=str(sizes), n="4", epochs="2")
        self.assertTrue((self.root / "small" / "n4_d2" / "replica_00" / CHECKPOINT_FILE).is_file())
        self.assertFalse((self.root / "small" / "n6_d2").exists())

        self.call("transfer", "both", source=str(sizes), n="4,6", epochs="2")
        for n in (4, 6):
            checkpoint = Checkpoint.load(
                self.root / "both" / f"n{n}_d2" / "replica_01" / CHECKPOINT_FILE
            )
            self.assertEqual((checkpoint.n_qubits, checkpoint.depth), (n, 2))
            self.assertTrue(checkpoint.source_id.startswith(f"sb_tfi-n{n}-d1-"))
        rows = read_csv(self.root / "both" / "summary.csv")
        self.assertEqual([row["n"] for row in rows], ["4", "6"])

    def test_missing_size_fails_before_running(self):
        with self.assertRaisesMessage(CommandError, "n=6"):
            self.call("transfer", "partial", source=str(self.source), n="4,6")
        self.assertFalse((self.root / "partial").exists())

    def test_incompatible_source(self):
        with self.assertRaises(CommandError):
            self.call("transfer", "wrong-model", source=str(self.source), model="tfc")
        with self.assertRaises(CommandError):
            self.call("transfer", "wrong-size", source=str(self.source), n="6")
        with self.assertRaises(CommandError):
            self.call("transfer", "wrong-ansatz", source=str(self.source), ansatz="qaoa")

    def test_missing_source(self):
        with self.assertRaises(CommandError):
            self.call("transfer", "no-source")
        with self.assertRaises(CommandError):
            self.call("transfer", "empty", source=str(self.root / "nowhere"))
