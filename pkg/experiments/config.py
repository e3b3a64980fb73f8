"""
Experiment configuration: an INI file with one section per concern, CLI
overrides on top, validated by ``ExperimentForm``.
"""

import configparser
import logging
from dataclasses import dataclass, replace
from pathlib import Path

from decouple import Config, RepositoryIni
from django.conf import settings
from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _

from ansatz.circuits import InsertPosition, NewBlock, build_family, family_for
from derivatives.fisher import FisherVariant
from exact.solvers import SolverMethod
from hamiltonians.builders import ModelKind, ModelSpec
from optimizer.qng import OptimizerConfig

from .forms import ExperimentForm

logger = logging.getLogger(__name__)

SECTIONS = {
    "model": ("model", "n", "h", "method"),
    "ansatz": ("ansatz", "depth", "init"),
    "optimizer": (
        "fisher",
        "eta",
        "lambda0",
        "lambda_decay",
        "lambda_floor",
        "epochs",
        "stop_window",
        "stop_tol",
    ),
    "run": ("replicas", "seed", "jobs", "out", "gnuplot_hints"),
    "penalty": ("alpha", "alpha_scan", "eta_scan"),
    "transfer": (
        "source",
        "perturb",
        "chain",
        "insert_position",
        "new_block",
        "new_block_sigma",
    ),
}


def default_values():
    optimizer = OptimizerConfig()
    return {
        "model": ModelKind.TFI,
        "n": "8",
        "h": "0.5",
        "method": SolverMethod.AUTO,
        "ansatz": "sb",
        "depth": "3",
        "init": "normal:0.001",
        "fisher": optimizer.fisher_variant,
        "eta": repr(optimizer.eta),
        "lambda0": repr(optimizer.lambda0),
        "lambda_decay": repr(optimizer.lambda_decay),
        "lambda_floor": repr(optimizer.lambda_floor),
        "epochs": str(optimizer.max_epochs),
        "stop_window": str(optimizer.stop_window),
        "stop_tol": repr(optimizer.stop_tol),
        "replicas": str(settings.DEFAULT_REPLICAS),
        "seed": "0",
        "jobs": str(settings.VQE_JOBS),
        "out": str(settings.VQE_OUTPUT_DIR),
        "gnuplot_hints": "false",
        "alpha": "",
        "alpha_scan": "",
        "eta_scan": "",
        "source": "",
        "perturb": "0.01",
        "chain": "1",
        "insert_position": InsertPosition.FLOOR,
        "new_block": NewBlock.NORMAL,
        "new_block_sigma": "0.001",
    }


class SectionIni(RepositoryIni):
    """decouple INI repository bound to one section of the experiment file."""

    def __init__(self, source, section):
        super().__init__(source)
        self.SECTION = section


def read_config_file(path):
    if not Path(path).is_file():
        raise ValidationError(
            _("Config file %(path)s does not exist."),
            code="missing_config",
            params={"path": path},
        )
    values = {}
    for section, keys in SECTIONS.items():
        section_config = Config(SectionIni(str(path), section))
        for key in keys:
            value = section_config(key, default=None)
            if value is not None:
                values[key] = value
    return values


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    n_values: tuple
    h: float
    circuit: str
    depths: tuple
    init: object
    optimizer: OptimizerConfig
    replicas: int
    base_seed: int
    jobs: int
    out_dir: Path
    method: str = SolverMethod.AUTO
    gnuplot_hints: bool = False
    alpha: tuple = ()
    alpha_scan: tuple = ()
    eta_scan: tuple = ()
    source: str = ""
    perturb: float = 0.01
    chain: int = 1
    insert_position: str = InsertPosition.FLOOR
    new_block: str = NewBlock.NORMAL
    new_block_sigma: float = 0.001

    @classmethod
    def from_cleaned_data(cls, data):
        return cls(
            model=ModelKind(data["model"]),
            n_values=data["n"],
            h=data["h"],
            circuit=data["ansatz"],
            depths=data["depth"],
            init=data["init"],
            optimizer=data["optimizer"],
            replicas=data["replicas"],
            base_seed=data["seed"],
            jobs=data["jobs"],
            out_dir=Path(data["out"]),
            method=SolverMethod(data["method"]),
            gnuplot_hints=data["gnuplot_hints"],
            alpha=data["alpha"],
            alpha_scan=data["alpha_scan"],
            eta_scan=data["eta_scan"],
            source=data["source"],
            perturb=data["perturb"],
            chain=data["chain"],
            insert_position=InsertPosition(data["insert_position"]),
            new_block=NewBlock(data["new_block"]),
            new_block_sigma=data["new_block_sigma"],
        )

    @property
    def family(self):
        return family_for(self.model, self.circuit)

    def model_spec(self, n):
        return ModelSpec(self.model, n, self.h)

    def ansatz(self, n, depth):
        return build_family(self.family, n, depth)

    def replica_seeds(self):
        """Replica k runs with seed base_seed + k."""
        return [self.base_seed + k for k in range(self.replicas)]

    def with_optimizer(self, **changes):
        return replace(self, optimizer=replace(self.optimizer, **changes))

    def as_sections(self):
        opt = self.optimizer
        return {
            "model": {
                "model": self.model.value,
                "n": ",".join(str(n) for n in self.n_values),
                "h": repr(self.h),
                "method": SolverMethod(self.method).value,
            },
            "ansatz": {
                "ansatz": str(self.circuit),
                "depth": ",".join(str(d) for d in self.depths),
                "init": self.init.label(),
            },
            "optimizer": {
                "fisher": FisherVariant(opt.fisher_variant).value,
                "eta": repr(opt.eta),
                "lambda0": repr(opt.lambda0),
                "lambda_decay": repr(opt.lambda_decay),
                "lambda_floor": repr(opt.lambda_floor),
                "epochs": str(opt.max_epochs),
                "stop_window": str(opt.stop_window),
                "stop_tol": repr(opt.stop_tol),
            },
            "run": {
                "replicas": str(self.replicas),
                "seed": str(self.base_seed),
                "jobs": str(self.jobs),
                "out": str(self.out_dir),
                "gnuplot_hints": str(self.gnuplot_hints).lower(),
            },
            "penalty": {
                "alpha": ",".join(repr(a) for a in self.alpha),
                "alpha_scan": ",".join(repr(a) for a in self.alpha_scan),
                "eta_scan": ",".join(repr(e) for e in self.eta_scan),
            },
            "transfer": {
                "source": self.source,
                "perturb": repr(self.perturb),
                "chain": str(self.chain),
                "insert_position": InsertPosition(self.insert_position).value,
                "new_block": NewBlock(self.new_block).value,
                "new_block_sigma": repr(self.new_block_sigma),
            },
        }


def load_experiment_config(path=None, overrides=None):
    """
    Defaults, then the config file, then CLI overrides (``None`` values are
    ignored). Raises ValidationError listing every invalid field.
    """
    data = default_values()
    if path:
        data.update(read_config_file(path))
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    form = ExperimentForm(data=data)
    if not form.is_valid():
        messages = [
            f"{field}: {message}"
            for field, errors in form.errors.items()
            for message in errors
        ]
        raise ValidationError(messages, code="invalid_config")
    return ExperimentConfig.from_cleaned_data(form.cleaned_data)


def write_effective_config(config, out_dir=None):
    out_dir = Path(out_dir or config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    parser = configparser.ConfigParser(interpolation=None)
    parser.read_dict(config.as_sections())
    path = out_dir / "effective_config.ini"
    with path.open("w", encoding="utf-8") as handle:
        parser.write(handle)
    logger.info("Wrote %s", path)
    return path
