import tempfile
from pathlib import Path

from django.conf import settings
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from ansatz.circuits import AnsatzFamily, InitKind, InsertPosition, NewBlock
from derivatives.fisher import FisherVariant
from exact.solvers import SolverMethod
from experiments.config import load_experiment_config, write_effective_config
from experiments.forms import ExperimentForm
from experiments.tests.factories import ExperimentConfigFactory
from hamiltonians.builders import ModelKind
from optimizer.qng import OptimizerConfig

CONFIG_TEXT = """\
[model]
model = tfc
n = 4, 6
h = 0.25

[ansatz]
ansatz = bare
depth = 2
init = sboffset:0.01

[optimizer]
eta = 0.02
epochs = 40

[run]
replicas = 3
seed = 11
"""


class ConfigFileMixin:
    def setUp(self):
        super().setUp()
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.path = Path(self.tmp.name) / "experiment.ini"
        self.path.write_text(CONFIG_TEXT, encoding="utf-8")


class DefaultsTestCase(SimpleTestCase):
    def test_defaults(self):
        config = load_experiment_config()
        self.assertEqual(config.model, ModelKind.TFI)
        self.assertEqual(config.n_values, (8,))
        self.assertEqual(config.h, 0.5)
        self.assertEqual(config.depths, (3,))
        self.assertEqual(config.family, AnsatzFamily.SB_TFI)
        self.assertEqual(config.replicas, settings.DEFAULT_REPLICAS)
        self.assertEqual(config.base_seed, 0)
        self.assertEqual(config.method, SolverMethod.AUTO)
        self.assertEqual((config.init.kind, config.init.sigma), (InitKind.NORMAL_ZERO, 0.001))
        self.assertEqual(config.optimizer, OptimizerConfig())
        self.assertEqual(config.out_dir, Path(settings.VQE_OUTPUT_DIR))
        self.assertFalse(config.gnuplot_hints)
        self.assertEqual(config.insert_position, InsertPosition.FLOOR)
        self.assertEqual(config.new_block, NewBlock.NORMAL)

    def test_overrides(self):
        config = load_experiment_config(
            overrides={"n": "4,6,8", "fisher": "uncentered", "eta": "0.1", "h": None}
        )
        self.assertEqual(config.n_values, (4, 6, 8))
        self.assertEqual(config.optimizer.fisher_variant, FisherVariant.UNCENTERED)
        self.assertEqual(config.optimizer.eta, 0.1)
        self.assertEqual(config.h, 0.5)


class ConfigFileTestCase(ConfigFileMixin, SimpleTestCase):
    def test_file_values(self):
        config = load_experiment_config(self.path)
        self.assertEqual(config.model, ModelKind.TFC)
        self.assertEqual(config.n_values, (4, 6))
        self.assertEqual(config.h, 0.25)
        self.assertEqual(config.family, AnsatzFamily.TFC_BARE)
        self.assertEqual(config.init.kind, InitKind.SB_OFFSET)
        self.assertEqual(config.optimizer.max_epochs, 40)
        self.assertEqual(config.replica_seeds(), [11, 12, 13])
        # untouched keys keep their defaults
        self.assertEqual(config.optimizer.lambda0, 100.0)

    def test_overrides_beat_file(self):
        config = load_experiment_config(self.path, {"eta": "0.3", "seed": "2"})
        self.assertEqual(config.optimizer.eta, 0.3)
        self.assertEqual(config.base_seed, 2)
        self.assertEqual(config.n_values, (4, 6))

    def test_missing_file(self):
        with self.assertRaises(ValidationError) as caught:
            load_experiment_config(Path(self.tmp.name) / "absent.ini")
        self.assertEqual(caught.exception.code, "missing_config")

    def test_effective_config_reloads_to_the_same_config(self):
        config = load_experiment_config(
            self.path, {"alpha": "1.5,-0.5", "out": self.tmp.name, "gnuplot_hints": "true"}
        )
        path = write_effective_config(config, self.tmp.name)
        self.assertEqual(path.name, "effective_config.ini")
        self.assertEqual(load_experiment_config(path), config)


class InvalidConfigTestCase(SimpleTestCase):
    def assertInvalid(self, overrides, field):
        with self.assertRaises(ValidationError) as caught:
            load_experiment_config(overrides=overrides)
        self.assertTrue(
            any(message.startswith(f"{field}:") for message in caught.exception.messages),
            caught.exception.messages,
        )

    def test_field_errors(self):
        self.assertInvalid({"n": "4,x"}, "n")
        self.assertInvalid({"n": ""}, "n")
        self.assertInvalid({"depth": "0"}, "depth")
        self.assertInvalid({"model": "heisenberg"}, "model")
        self.assertInvalid({"ansatz": "hea"}, "ansatz")
        self.assertInvalid({"init": "uniform:1"}, "init")
        self.assertInvalid({"fisher": "diagonal"}, "fisher")
        self.assertInvalid({"epochs": "0"}, "epochs")
        self.assertInvalid({"eta_scan": "0.1,-1"}, "eta_scan")
        self.assertInvalid({"alpha": "a,b"}, "alpha")
        self.assertInvalid({"insert_position": "middle"}, "insert_position")

    def test_optimizer_errors(self):
        self.assertInvalid({"lambda_decay": "1.5"}, "__all__")
        self.assertInvalid({"eta": "0"}, "__all__")

    def test_form_collects_every_error(self):
        form = ExperimentForm(data={"model": "tfi"})
        self.assertFalse(form.is_valid())
        self.assertIn("n", form.errors)
        self.assertIn("eta", form.errors)


class ExperimentConfigTestCase(SimpleTestCase):
    def test_replica_seeds(self):
        self.assertEqual(ExperimentConfigFactory(base_seed=5, replicas=3).replica_seeds(), [5, 6, 7])

    def test_factory_leaves_no_directories(self):
        first, second = ExperimentConfigFactory(), ExperimentConfigFactory()
        self.assertNotEqual(first.out_dir, second.out_dir)
        self.assertFalse(Path(first.out_dir).exists())
        self.assertFalse(Path(second.out_dir).exists())

    def test_with_optimizer(self):
        config = ExperimentConfigFactory()
        changed = config.with_optimizer(eta=0.2)
        self.assertEqual(changed.optimizer.eta, 0.2)
        self.assertEqual(changed.optimizer.max_epochs, config.optimizer.max_epochs)
        self.assertEqual(config.optimizer.eta, 0.05)

    def test_model_and_ansatz(self):
        config = ExperimentConfigFactory(model=ModelKind.CLUSTER_OPEN, n_values=(6,))
        self.assertEqual(config.model_spec(6).boundary, "open")
        self.assertEqual(config.ansatz(6, 2).family, AnsatzFamily.SB_CLUSTER_OPEN)
        self.assertEqual(config.ansatz(6, 2).n_params, 8)

    def test_sections_cover_every_form_field(self):
        sections = ExperimentConfigFactory().as_sections()
        keys = {key for values in sections.values() for key in values}
        self.assertEqual(keys, set(ExperimentForm.base_fields))
