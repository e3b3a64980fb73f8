"""
Replica execution. Each replica is an independent ``minimize`` run that writes
its own learning curve and checkpoint; the caller summarizes after all
replicas have joined.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import django
import numpy as np

from ansatz.circuits import build_family, init_params
from exact.solvers import normalized_energy
from hamiltonians.builders import build_hamiltonian, parity_ops
from optimizer.qng import minimize, penalty_objective

from .storage import CHECKPOINT_FILE, CURVE_FILE, Checkpoint, write_learning_curve

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReplicaTask:
    model_spec: object
    family: str
    depth: int
    seed: int
    init: object
    optimizer: object
    e_gs: float
    out_dir: Path
    # explicit starting parameters (transfer); overrides ``init``
    init_params: np.ndarray = None
    alpha: tuple = ()
    source_id: str = ""

    @property
    def n_qubits(self):
        return self.model_spec.n_qubits


@dataclass
class ReplicaResult:
    seed: int
    out_dir: Path
    final_energy: float = math.nan
    best_energy: float = math.nan
    normalized: float = math.nan
    parities: tuple = ()
    epochs: int = 0
    converged: bool = False
    aborted: bool = False
    error: str = ""
    final_params: list = field(default_factory=list)

    @property
    def completed(self):
        return not (self.error or self.aborted)


def _init_worker():
    django.setup()


def run_replica(task):
    result = ReplicaResult(task.seed, Path(task.out_dir))
    try:
        spec = build_family(task.family, task.n_qubits, task.depth)
        hamiltonian = build_hamiltonian(task.model_spec)
        parities = parity_ops(task.model_spec)
        objective = hamiltonian
        if any(task.alpha):
            objective = penalty_objective(hamiltonian, zip(task.alpha, parities))
        if task.init_params is None:
            start = init_params(spec, task.init.with_seed(task.seed))
        else:
            start = task.init_params
        record = minimize(
            objective,
            spec,
            start,
            task.optimizer,
            track=parities,
            hamiltonian=hamiltonian,
            reference_energy=task.e_gs,
            seed=task.seed,
        )
        write_learning_curve(result.out_dir / CURVE_FILE, record)
        result.final_energy = record.final_energy
        result.best_energy = record.best_energy
        result.parities = record.final_parities
        result.epochs = record.epochs_run
        result.converged = record.converged
        result.aborted = record.aborted
        result.error = record.message if record.aborted else ""
        result.final_params = [float(p) for p in record.final_params]
        if record.rows:
            result.normalized = normalized_energy(record.final_energy, task.e_gs)
            Checkpoint(
                model=task.model_spec.as_dict(),
                family=spec.family.value,
                n_qubits=spec.n_qubits,
                depth=spec.depth,
                params=result.final_params,
                final_energy=record.final_energy,
                e_gs=task.e_gs,
                seed=task.seed,
                epochs=record.epochs_run,
                source_id=task.source_id,
            ).save(result.out_dir / CHECKPOINT_FILE)
        logger.info(
            "Replica seed=%d n=%d depth=%d: energy=%.12f normalized=%.3e",
            task.seed,
            task.n_qubits,
            task.depth,
            result.final_energy,
            result.normalized,
        )
    except Exception as exc:
        logger.exception("Replica seed=%d in %s failed", task.seed, task.out_dir)
        result.error = f"{type(exc).__name__}: {exc}"
    return result


def run_replicas(tasks, jobs=1):
    """Run tasks with at most ``jobs`` worker processes; results keep task order."""
    tasks = list(tasks)
    if jobs <= 1 or len(tasks) <= 1:
        return [run_replica(task) for task in tasks]
    with ProcessPoolExecutor(
        max_workers=min(jobs, len(tasks)), initializer=_init_worker
    ) as executor:
        return list(executor.map(run_replica, tasks))
