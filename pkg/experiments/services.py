"""
Experiment protocols behind the management commands: (N, D) sweeps with
seeded replicas, transfer-learning chains, penalty runs, the Fisher x init
setup grid and exact ground energies.
"""

import logging
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path

from django.conf import settings
from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _

from ansatz.circuits import InitKind, insert_block
from core.exceptions import IncompatibleCheckpointError
from core.utils import make_rng
from derivatives.fisher import FisherVariant
from exact.solvers import ground_truth, normalized_energy
from hamiltonians.builders import ModelKind, build_hamiltonian, parity_ops
from optimizer.qng import penalty_sector

from .config import write_effective_config
from .runner import ReplicaTask, run_replicas
from .storage import (
    CHECKPOINT_FILE,
    Checkpoint,
    best_checkpoint,
    write_column_hints,
    write_json,
    write_table,
)

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = [
    "model",
    "n",
    "depth",
    "family",
    "fisher",
    "init",
    "eta",
    "e_gs",
    "best_normalized",
    "best_energy",
    "best_seed",
    "replicas",
    "completed",
    "failed",
]
PENALTY_COLUMNS = SUMMARY_COLUMNS + ["alpha1", "alpha2", "target_sector"]
TRANSFER_COLUMNS = SUMMARY_COLUMNS + ["source_id", "source_normalized"]

DEFAULT_PENALTY = 2.0
SECTOR_TOL = 1e-6


@dataclass
class SweepOutcome:
    out_dir: Path
    rows: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    @property
    def failed(self):
        return len(self.errors)

    def extend(self, other):
        self.rows.extend(other.rows)
        self.errors.extend(other.errors)


def cell_dir(base, n, depth):
    return Path(base) / f"n{n}_d{depth}"


def replica_dir(base, n, depth, k):
    return cell_dir(base, n, depth) / f"replica_{k:02d}"


def _ground_truths(config):
    truths = {}
    for n in config.n_values:
        h = build_hamiltonian(config.model_spec(n))
        truths[n] = ground_truth(h, config.method)
        logger.info("E_GS(%s, n=%d, h=%r) = %.15f", config.model, n, config.h, truths[n].energy)
    return truths


def _validate_grid(config):
    """Build every model and ansatz once so bad sizes fail before any run."""
    for n in config.n_values:
        config.model_spec(n)
        for depth in config.depths:
            config.ansatz(n, depth)


def summarize_cell(config, n, depth, results, e_gs, alpha=()):
    """One summary row; best_normalized is the minimum over completed replicas."""
    completed = [result for result in results if result.completed]
    best = min(completed, key=lambda result: result.normalized, default=None)
    row = {
        "model": ModelKind(config.model).value,
        "n": n,
        "depth": depth,
        "family": config.family.value,
        "fisher": FisherVariant(config.optimizer.fisher_variant).value,
        "init": config.init.label(),
        "eta": config.optimizer.eta,
        "e_gs": e_gs,
        "best_normalized": best.normalized if best else None,
        "best_energy": best.final_energy if best else None,
        "best_seed": best.seed if best else None,
        "replicas": len(results),
        "completed": len(completed),
        "failed": len(results) - len(completed),
    }
    if alpha:
        row["alpha1"] = alpha[0]
        row["alpha2"] = alpha[1] if len(alpha) > 1 else None
        row["target_sector"] = (
            sum(1 for result in completed if in_target_sector(result, alpha))
            if any(alpha)
            else None
        )
    return row


def in_target_sector(result, alpha):
    return all(
        abs(value - penalty_sector(weight)) < SECTOR_TOL
        for weight, value in zip(alpha, result.parities)
        if weight != 0
    )


def _errors(results, n, depth):
    return [
        {"n": n, "depth": depth, "seed": result.seed, "error": result.error}
        for result in results
        if not result.completed
    ]


def _run_grid(config, base_dir, truths, alpha=()):
    outcome = SweepOutcome(Path(base_dir))
    for n in config.n_values:
        model_spec = config.model_spec(n)
        e_gs = truths[n].energy
        for depth in config.depths:
            tasks = [
                ReplicaTask(
                    model_spec=model_spec,
                    family=config.family,
                    depth=depth,
                    seed=seed,
                    init=config.init,
                    optimizer=config.optimizer,
                    e_gs=e_gs,
                    out_dir=replica_dir(base_dir, n, depth, k),
                    alpha=alpha,
                )
                for k, seed in enumerate(config.replica_seeds())
            ]
            logger.info("Running %d replicas for n=%d depth=%d", len(tasks), n, depth)
            results = run_replicas(tasks, config.jobs)
            outcome.rows.append(summarize_cell(config, n, depth, results, e_gs, alpha))
            outcome.errors.extend(_errors(results, n, depth))
    return outcome


def write_summary(outcome, command, columns, name="summary"):
    out_dir = outcome.out_dir
    write_json(
        out_dir / f"{name}.json",
        {
            "format_version": settings.FORMAT_VERSION,
            "command": command,
            "cells": outcome.rows,
            "errors": outcome.errors,
        },
    )
    write_table(out_dir / f"{name}.csv", outcome.rows, columns)
    logger.info("Wrote %s summary to %s", command, out_dir)


def _prepare_output(config):
    out_dir = Path(config.out_dir)
    write_effective_config(config, out_dir)
    if config.gnuplot_hints:
        write_column_hints(out_dir)
    return out_dir


def cmd_solve(config):
    _validate_grid(config)
    out_dir = _prepare_output(config)
    outcome = _run_grid(config, out_dir, _ground_truths(config))
    write_summary(outcome, "solve", SUMMARY_COLUMNS)
    return outcome


def penalty_cells(config, n_parities):
    """(eta, weights) pairs: the eta x alpha scan, or the single configured cell."""
    etas = config.eta_scan or (config.optimizer.eta,)
    if config.alpha_scan:
        weight_sets = [(alpha,) * n_parities for alpha in config.alpha_scan]
    elif config.alpha:
        alpha = config.alpha * n_parities if len(config.alpha) == 1 else config.alpha
        weight_sets = [tuple(alpha)]
    else:
        weight_sets = [(DEFAULT_PENALTY,) * n_parities]
    for weights in weight_sets:
        if len(weights) != n_parities:
            raise ValidationError(
                _("Expected %(n)d penalty weights, got %(m)d."),
                code="invalid_alpha",
                params={"n": n_parities, "m": len(weights)},
            )
    return [(eta, weights) for eta in etas for weights in weight_sets]


def cmd_penalty(config):
    if config.model != ModelKind.CLUSTER_OPEN:
        raise ValidationError(
            _("Penalty runs are defined for the open cluster model only."),
            code="penalty_model",
        )
    _validate_grid(config)
    n_parities = len(parity_ops(config.model_spec(config.n_values[0])))
    cells = penalty_cells(config, n_parities)
    out_dir = _prepare_output(config)
    truths = _ground_truths(config)
    scanning = len(cells) > 1
    outcome = SweepOutcome(out_dir)
    for eta, weights in cells:
        cell_config = config.with_optimizer(eta=eta)
        base = out_dir / f"eta{eta!r}_alpha{weights[0]!r}" if scanning else out_dir
        outcome.extend(_run_grid(cell_config, base, truths, alpha=weights))
    write_summary(outcome, "penalty", PENALTY_COLUMNS)
    return outcome


def cmd_sweep_setups(config):
    """The {centered, uncentered} x {normal, sboffset} grid, one summary per cell."""
    _validate_grid(config)
    for n in config.n_values:
        if not config.ansatz(n, config.depths[0]).symmetry_breaking_indices():
            raise ValidationError(
                _("The setup grid needs an ansatz with symmetry-breaking layers."),
                code="no_symmetry_breaking",
            )
    out_dir = _prepare_output(config)
    truths = _ground_truths(config)
    grid = SweepOutcome(out_dir)
    for variant in FisherVariant:
        for kind in InitKind:
            cell_config = replace(
                config.with_optimizer(fisher_variant=variant),
                init=replace(config.init, kind=kind),
            )
            cell = _run_grid(cell_config, out_dir / f"{variant.value}_{kind.value}", truths)
            write_summary(cell, "sweep_setups", SUMMARY_COLUMNS)
            grid.extend(cell)
    write_table(out_dir / "grid_summary.csv", grid.rows, SUMMARY_COLUMNS)
    return grid


def matches_target(config, n, checkpoint):
    return (
        checkpoint.model["model"] == ModelKind(config.model).value
        and checkpoint.family == config.family.value
        and checkpoint.n_qubits == n
    )


def transfer_sources(config):
    """The best matching source checkpoint for every requested N."""
    sources = {
        n: best_checkpoint(config.source, partial(matches_target, config, n))
        for n in config.n_values
    }
    missing = [n for n, checkpoint in sources.items() if checkpoint is None]
    if missing:
        raise IncompatibleCheckpointError(
            _("No %(model)s %(family)s checkpoint for n=%(sizes)s under %(source)s."),
            code="incompatible_checkpoint",
            params={
                "model": ModelKind(config.model).value,
                "family": config.family.value,
                "sizes": ",".join(str(n) for n in missing),
                "source": config.source,
            },
        )
    return sources


def cmd_transfer(config):
    """
    For every requested N, grow the best source checkpoint of that size by
    one block per chain stage. Replica k of every stage inserts with rng
    seed base_seed + k; the next stage starts from the best replica of the
    previous one.
    """
    if not config.source:
        raise ValidationError(
            _("Transfer runs need a source checkpoint or directory."),
            code="missing_source",
        )
    sources = transfer_sources(config)
    out_dir = _prepare_output(config)
    outcome = SweepOutcome(out_dir)
    for source in sources.values():
        _transfer_chain(config, source, outcome)
    write_summary(outcome, "transfer", TRANSFER_COLUMNS)
    return outcome


def _transfer_chain(config, source, outcome):
    out_dir = outcome.out_dir
    model_spec = source.model_spec()
    e_gs = ground_truth(build_hamiltonian(model_spec), config.method).energy
    n = source.n_qubits
    spec, params = source.ansatz(), source.parameters()
    source_id = source.checkpoint_id
    source_normalized = normalized_energy(source.final_energy, e_gs)

    for stage in range(config.chain):
        depth = spec.depth + 1
        tasks = []
        for k, seed in enumerate(config.replica_seeds()):
            grown, start = insert_block(
                spec,
                params,
                perturb_sigma=config.perturb,
                rng=make_rng(seed),
                position=config.insert_position,
                new_block=config.new_block,
                new_block_sigma=config.new_block_sigma,
            )
            tasks.append(
                ReplicaTask(
                    model_spec=model_spec,
                    family=source.family,
                    depth=depth,
                    seed=seed,
                    init=config.init,
                    optimizer=config.optimizer,
                    e_gs=e_gs,
                    out_dir=replica_dir(out_dir, n, depth, k),
                    init_params=start,
                    source_id=source_id,
                )
            )
        logger.info(
            "Transfer stage %d: %s -> depth %d, %d replicas",
            stage + 1,
            source_id,
            depth,
            len(tasks),
        )
        results = run_replicas(tasks, config.jobs)
        row = summarize_cell(config, n, depth, results, e_gs)
        row["source_id"] = source_id
        row["source_normalized"] = source_normalized
        outcome.rows.append(row)
        outcome.errors.extend(_errors(results, n, depth))

        completed = [result for result in results if result.completed]
        if not completed:
            logger.error("Transfer stage %d produced no completed replica", stage + 1)
            break
        best = min(completed, key=lambda result: result.normalized)
        checkpoint = Checkpoint.load(best.out_dir / CHECKPOINT_FILE)
        spec, params = checkpoint.ansatz(), checkpoint.parameters()
        source_id = checkpoint.checkpoint_id
        source_normalized = best.normalized


def cmd_exact(config):
    results = []
    for n in config.n_values:
        spec = config.model_spec(n)
        truth = ground_truth(build_hamiltonian(spec), config.method)
        entry = {"model": spec.model.value, "n": n}
        if spec.model != ModelKind.CLUSTER_OPEN:
            entry["h"] = spec.h
        entry.update(truth.as_dict())
        results.append(entry)
    return results
