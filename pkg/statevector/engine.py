"""
Parameterized layers exp(-i theta G) for generators G made of mutually
commuting Pauli strings.

Because the strings commute, the layer exponential is exactly the ordered
product of single-string rotations exp(-i theta c_k P_k); no Trotter error and
no dense exponentials are involved. All-Z generators take a phase-only path.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _

from pauli.operators import (
    PauliSum,
    apply_string,
    diagonal_values,
    strings_commute,
)
from statevector.states import Statevector, check_same_size


@dataclass(frozen=True, eq=False)
class LayerSpec:
    label: str
    generator: PauliSum
    symmetry_tags: tuple = ()
    symmetry_breaking: bool = False

    def __post_init__(self):
        object.__setattr__(self, "symmetry_tags", tuple(self.symmetry_tags))
        strings = self.generator.strings
        for i, first in enumerate(strings):
            for second in strings[i + 1 :]:
                if not strings_commute(first, second):
                    raise ValidationError(
                        _("Layer %(label)s: %(a)s and %(b)s do not commute."),
                        code="noncommuting_generator",
                        params={"label": self.label, "a": first, "b": second},
                    )
        for tag in self.symmetry_tags:
            if tag.n_qubits != self.generator.n_qubits:
                raise ValidationError(
                    _("Layer %(label)s: symmetry tag %(tag)s has the wrong size."),
                    code="size_mismatch",
                    params={"label": self.label, "tag": tag},
                )
            for string in strings:
                if not strings_commute(tag, string):
                    raise ValidationError(
                        _("Layer %(label)s: %(term)s does not commute with %(tag)s."),
                        code="broken_symmetry_tag",
                        params={"label": self.label, "term": string, "tag": tag},
                    )

    @property
    def n_qubits(self):
        return self.generator.n_qubits

    @property
    def is_diagonal(self):
        return self.generator.is_diagonal

    @cached_property
    def diagonal(self):
        return diagonal_values(self.generator)

    def commutes_with(self, parity):
        return parity in self.symmetry_tags


def plus_state(n_qubits):
    """|+>^N: every amplitude equals 2**(-N/2)."""
    if not 1 <= n_qubits <= settings.VQE_MAX_QUBITS:
        raise ValidationError(
            _("plus_state supports 1 to %(max)d qubits, got %(n)s."),
            code="invalid_size",
            params={"max": settings.VQE_MAX_QUBITS, "n": n_qubits},
        )
    dim = 2**n_qubits
    return Statevector(n_qubits, np.full(dim, dim**-0.5, dtype=np.complex128))


def apply_rotation(p, theta, state):
    """exp(-i theta P)|psi> = cos(theta)|psi> - i sin(theta) P|psi>."""
    flipped = apply_string(p, state).amplitudes
    return state.with_amplitudes(
        np.cos(theta) * state.amplitudes - 1j * np.sin(theta) * flipped
    )


def apply_layer(layer, theta, state, fast_path=True):
    check_same_size(layer.n_qubits, state)
    if fast_path and layer.is_diagonal:
        return state.with_amplitudes(
            np.exp(-1j * theta * layer.diagonal) * state.amplitudes
        )
    for coefficient, string in layer.generator.terms:
        state = apply_rotation(string, theta * coefficient, state)
    return state


def inner(a, b):
    """<a|b>, conjugating ``a``."""
    check_same_size(a.n_qubits, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))
