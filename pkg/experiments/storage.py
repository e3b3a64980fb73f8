"""
Run artifacts: learning-curve CSVs, checkpoints and summary tables.

Every float is written with ``repr`` so identical runs produce identical
bytes. Files are written to a ``.new`` sibling and renamed into place.
"""

import csv
import json
import logging
import os
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.serializers.json import DjangoJSONEncoder
from django.utils.translation import gettext_lazy as _

from ansatz.circuits import build_family, prepare_state
from core.exceptions import IncompatibleCheckpointError
from core.utils import float_repr, run_slug
from hamiltonians.builders import ModelSpec, build_hamiltonian
from pauli.operators import expectation

logger = logging.getLogger(__name__)

CURVE_COLUMNS = ["epoch", "objective", "energy", "grad_norm", "p1", "p2"]
CURVE_FILE = "learning_curve.csv"
CHECKPOINT_FILE = "checkpoint.json"

COLUMN_HINTS = """\
learning_curve.csv (one row per epoch, comma separated, header on line 1)
  1 epoch      epoch index t, starting at 0
  2 objective  <O> minimized by the optimizer (equals energy unless penalised)
  3 energy     <H> of the physical Hamiltonian
  4 grad_norm  2-norm of the objective gradient
  5 p1         <P> (TFI) or <P1> (TFC, cluster); empty when untracked
  6 p2         <P2> (TFC, cluster); empty when untracked
gnuplot: set datafile separator ','; plot 'learning_curve.csv' using 1:3 every ::1

summary.csv / grid_summary.csv
  one row per (N, D) cell; best_normalized is the minimum of the replicas'
  normalized energies (E - E_GS) / |E_GS|
"""


def _replace_atomically(path, write):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    staging = path.with_name(path.name + ".new")
    with staging.open("w", encoding="utf-8", newline="") as handle:
        write(handle)
    os.replace(staging, path)
    return path


def write_learning_curve(path, record):
    def write(handle):
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CURVE_COLUMNS)
        for row in record.rows:
            parities = [float_repr(p) for p in row.parities[:2]]
            parities += [""] * (2 - len(parities))
            writer.writerow(
                [
                    row.epoch,
                    float_repr(row.objective),
                    float_repr(row.energy),
                    float_repr(row.grad_norm),
                    *parities,
                ]
            )

    return _replace_atomically(path, write)


def read_learning_curve(path):
    with Path(path).open(encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))


def write_json(path, data):
    def write(handle):
        json.dump(data, handle, cls=DjangoJSONEncoder, indent=2)
        handle.write("\n")

    return _replace_atomically(path, write)


def write_table(path, rows, columns):
    def write(handle):
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(
                [
                    float_repr(row.get(c)) if isinstance(row.get(c), float) else row.get(c, "")
                    for c in columns
                ]
            )

    return _replace_atomically(path, write)


def write_column_hints(out_dir):
    path = Path(out_dir) / "columns.txt"
    return _replace_atomically(path, lambda handle: handle.write(COLUMN_HINTS))


@dataclass(frozen=True)
class Checkpoint:
    model: dict
    family: str
    n_qubits: int
    depth: int
    params: list
    final_energy: float
    e_gs: float
    seed: int
    epochs: int
    source_id: str = ""
    layout_id: str = settings.LAYOUT_ID
    format_version: int = settings.FORMAT_VERSION

    @property
    def checkpoint_id(self):
        return run_slug(self.family, f"n{self.n_qubits}", f"d{self.depth}", f"s{self.seed}")

    def model_spec(self):
        return ModelSpec(self.model["model"], self.model["n_qubits"], self.model["h"])

    def ansatz(self):
        return build_family(self.family, self.n_qubits, self.depth)

    def parameters(self):
        return np.asarray(self.params, dtype=np.float64)

    def evaluate(self):
        """Energy of the stored parameters under the stored Hamiltonian."""
        state = prepare_state(self.ansatz(), self.parameters())
        return expectation(build_hamiltonian(self.model_spec()), state)

    def save(self, path):
        data = asdict(self)
        data["params"] = [float(p) for p in self.params]
        data["checkpoint_id"] = self.checkpoint_id
        path = write_json(path, data)
        logger.debug("Saved checkpoint %s to %s", self.checkpoint_id, path)
        return path

    @classmethod
    def load(cls, path):
        with Path(path).open(encoding="utf-8") as handle:
            data = json.load(handle)
        data.pop("checkpoint_id", None)
        if data.get("format_version") != settings.FORMAT_VERSION:
            raise IncompatibleCheckpointError(
                _("Checkpoint %(path)s has format version %(found)s, expected %(expected)s."),
                code="format_version",
                params={
                    "path": path,
                    "found": data.get("format_version"),
                    "expected": settings.FORMAT_VERSION,
                },
            )
        if data.get("layout_id") != settings.LAYOUT_ID:
            raise IncompatibleCheckpointError(
                _("Checkpoint %(path)s uses parameter layout %(found)s."),
                code="layout",
                params={"path": path, "found": data.get("layout_id")},
            )
        checkpoint = cls(**data)
        checkpoint.ansatz().check_params(checkpoint.params)
        return checkpoint


def find_checkpoints(source):
    source = Path(source)
    if source.is_file():
        return [source]
    if source.is_dir():
        return sorted(source.rglob(CHECKPOINT_FILE))
    return []


def best_checkpoint(source, match=None):
    """
    The lowest-energy checkpoint at or beneath ``source``. With ``match``,
    only checkpoints accepted by it compete, and None is returned when
    there are none.
    """
    paths = find_checkpoints(source)
    if not paths:
        raise IncompatibleCheckpointError(
            _("No checkpoint found at %(source)s."),
            code="missing_checkpoint",
            params={"source": source},
        )
    loaded = [(Checkpoint.load(path), path) for path in paths]
    if match is not None:
        loaded = [item for item in loaded if match(item[0])]
        if not loaded:
            return None
    checkpoint, path = min(loaded, key=lambda item: item[0].final_energy)
    logger.info("Using checkpoint %s (%s)", checkpoint.checkpoint_id, path)
    return checkpoint
