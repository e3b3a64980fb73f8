"""
Statevector value type.

Basis-state indexing convention used throughout the project: qubit ``i`` is
bit ``i`` of the amplitude index, so site 0 is the least significant bit.
``|q_{N-1} ... q_1 q_0>`` has index ``sum_i q_i * 2**i``.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _


@lru_cache(maxsize=8)
def basis_indices(n_qubits):
    """Read-only ``arange(2**n)`` shared by all operators on ``n_qubits``."""
    indices = np.arange(2**n_qubits, dtype=np.int64)
    indices.flags.writeable = False
    return indices


@dataclass(frozen=True, eq=False)
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValidationError(
                _("A statevector needs at least one qubit."), code="invalid_size"
            )
        amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if amplitudes.shape != (2**self.n_qubits,):
            raise ValidationError(
                _("Expected %(dim)d amplitudes, got shape %(shape)s."),
                code="size_mismatch",
                params={"dim": 2**self.n_qubits, "shape": amplitudes.shape},
            )
        object.__setattr__(self, "amplitudes", amplitudes)

    def __len__(self):
        return self.amplitudes.shape[0]

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def with_amplitudes(self, amplitudes):
        return Statevector(self.n_qubits, amplitudes)


def check_same_size(n_qubits, state):
    if state.n_qubits != n_qubits:
        raise ValidationError(
            _("Operator acts on %(op)d qubits but the state has %(state)d."),
            code="size_mismatch",
            params={"op": n_qubits, "state": state.n_qubits},
        )


def basis_state(n_qubits, index):
    amplitudes = np.zeros(2**n_qubits, dtype=np.complex128)
    amplitudes[index] = 1.0
    return Statevector(n_qubits, amplitudes)
