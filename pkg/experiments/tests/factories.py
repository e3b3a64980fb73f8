import tempfile
from pathlib import Path

import factory

from ansatz.circuits import CircuitChoice, InitKind, InitStrategy
from derivatives.fisher import FisherVariant
from experiments.config import ExperimentConfig
from hamiltonians.builders import ModelKind
from optimizer.qng import OptimizerConfig


class OptimizerConfigFactory(factory.Factory):
    """
    Short, lightly regularized runs that finish in well under a second on
    four qubits.
    """

    class Meta:
        model = OptimizerConfig

    eta = 0.05
    lambda0 = 1.0
    lambda_decay = 0.9
    lambda_floor = 1e-3
    max_epochs = 5
    stop_window = 50
    stop_tol = 1e-12
    fisher_variant = FisherVariant.CENTERED


class InitStrategyFactory(factory.Factory):
    class Meta:
        model = InitStrategy

    kind = InitKind.NORMAL_ZERO
    sigma = 0.3
    seed = 0


class ExperimentConfigFactory(factory.Factory):
    """
    The output directory is a unique path that is never created here; tests
    that run the config pass their own temporary ``out_dir``.
    """

    class Meta:
        model = ExperimentConfig

    model = ModelKind.TFI
    n_values = (4,)
    h = 1.0
    circuit = CircuitChoice.SB
    depths = (1,)
    init = factory.SubFactory(InitStrategyFactory)
    optimizer = factory.SubFactory(OptimizerConfigFactory)
    replicas = 2
    base_seed = 0
    jobs = 1
    out_dir = factory.Sequence(lambda k: Path(tempfile.gettempdir()) / f"vqe-factory-{k}")
