"""
Sparse Pauli strings and real-weighted sums of them, applied matrix-free to
statevectors.

A string acting on basis state ``|b>`` is stored as two bit masks: ``x_mask``
(sites carrying X or Y, which flip) and ``z_mask`` (sites carrying Z or Y,
which contribute a sign). With ``Y = i X Z`` on every site,

    P |b> = i**n_y * (-1)**popcount(b & z_mask) |b ^ x_mask>

so ``(P psi)[c] = i**n_y * sign(c ^ x_mask) * psi[c ^ x_mask]``.
"""

import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from numbers import Complex, Real

import numpy as np
from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _

from statevector.states import basis_indices, check_same_size

logger = logging.getLogger(__name__)

AXES = ("X", "Y", "Z")

# i**n_y for n_y mod 4
_Y_PHASES = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


@dataclass(frozen=True)
class PauliString:
    n_qubits: int
    factors: tuple = ()

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValidationError(
                _("A Pauli string needs at least one qubit."), code="invalid_size"
            )
        factors = tuple((int(site), str(axis).upper()) for site, axis in self.factors)
        previous = -1
        for site, axis in factors:
            if axis not in AXES:
                raise ValidationError(
                    _("Unknown Pauli axis %(axis)s."),
                    code="invalid_axis",
                    params={"axis": axis},
                )
            if site <= previous or site >= self.n_qubits:
                raise ValidationError(
                    _(
                        "Sites must be strictly increasing and below %(n)d, "
                        "got %(factors)s."
                    ),
                    code="invalid_sites",
                    params={"n": self.n_qubits, "factors": factors},
                )
            previous = site
        object.__setattr__(self, "factors", factors)

    @classmethod
    def from_sites(cls, n_qubits, axes_by_site):
        """Build from a ``{site: axis}`` mapping in any order."""
        return cls(n_qubits, tuple(sorted(axes_by_site.items())))

    @classmethod
    def identity(cls, n_qubits):
        return cls(n_qubits, ())

    @cached_property
    def x_mask(self):
        return sum(1 << site for site, axis in self.factors if axis in ("X", "Y"))

    @cached_property
    def z_mask(self):
        return sum(1 << site for site, axis in self.factors if axis in ("Z", "Y"))

    @cached_property
    def y_count(self):
        return sum(1 for _site, axis in self.factors if axis == "Y")

    @property
    def is_diagonal(self):
        return self.x_mask == 0

    def label(self):
        if not self.factors:
            return "I"
        return " ".join(f"{axis}{site}" for site, axis in self.factors)

    def __str__(self):
        return self.label()


@lru_cache(maxsize=128)
def _signs(n_qubits, z_mask):
    """
    Read-only (-1)**popcount(b & z_mask) for every basis index b. Stored as
    int8 so the cache stays at one byte per amplitude.
    """
    if z_mask == 0:
        signs = np.ones(2**n_qubits, dtype=np.int8)
    else:
        parity = (np.bitwise_count(basis_indices(n_qubits) & z_mask) & 1).astype(np.int8)
        signs = 1 - 2 * parity
    signs.flags.writeable = False
    return signs


def _apply_masks(n_qubits, x_mask, weights, amplitudes):
    """Return ``out[c] = (weights * amplitudes)[c ^ x_mask]``."""
    weighted = weights * amplitudes
    if x_mask == 0:
        return weighted
    return weighted[basis_indices(n_qubits) ^ x_mask]


@dataclass(frozen=True)
class PauliSum:
    n_qubits: int
    terms: tuple = ()

    def __post_init__(self):
        merged = {}
        for coefficient, string in self.terms:
            if isinstance(coefficient, Complex) and not isinstance(coefficient, Real):
                raise ValidationError(
                    _("Pauli sums take real coefficients, got %(c)s."),
                    code="complex_coefficient",
                    params={"c": coefficient},
                )
            if string.n_qubits != self.n_qubits:
                raise ValidationError(
                    _("Term %(term)s acts on %(m)d qubits, expected %(n)d."),
                    code="size_mismatch",
                    params={"term": string, "m": string.n_qubits, "n": self.n_qubits},
                )
            # dicts keep first-insertion order
            merged[string] = merged.get(string, 0.0) + float(coefficient)
        object.__setattr__(
            self, "terms", tuple((value, string) for string, value in merged.items())
        )

    @classmethod
    def from_terms(cls, n_qubits, terms):
        return cls(n_qubits, tuple(terms))

    def extend(self, terms):
        return PauliSum(self.n_qubits, self.terms + tuple(terms))

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    @property
    def strings(self):
        return [string for _coefficient, string in self.terms]

    @property
    def is_diagonal(self):
        return all(string.is_diagonal for _coefficient, string in self.terms)

    @property
    def has_y(self):
        return any(string.y_count for _coefficient, string in self.terms)


def apply_string(p, state):
    """Return ``P|psi>`` as a new statevector."""
    check_same_size(p.n_qubits, state)
    weights = _Y_PHASES[p.y_count % 4] * _signs(p.n_qubits, p.z_mask)
    return state.with_amplitudes(
        _apply_masks(p.n_qubits, p.x_mask, weights, state.amplitudes)
    )


def _grouped_weights(h):
    """
    Combine terms sharing an X mask into one diagonal weight (vector or scalar) per mask,
    in first-appearance order of the masks.
    """
    groups = {}
    for coefficient, string in h.terms:
        weights = coefficient * _Y_PHASES[string.y_count % 4]
        # sign-free terms stay scalar
        if string.z_mask:
            weights = weights * _signs(h.n_qubits, string.z_mask)
        if string.x_mask in groups:
            groups[string.x_mask] = groups[string.x_mask] + weights
        else:
            groups[string.x_mask] = weights
    return groups


def apply_sum(h, state):
    """Return ``sum_k c_k P_k |psi>`` (generally unnormalized)."""
    check_same_size(h.n_qubits, state)
    out = np.zeros_like(state.amplitudes)
    for x_mask, weights in _grouped_weights(h).items():
        out += _apply_masks(h.n_qubits, x_mask, weights, state.amplitudes)
    return state.with_amplitudes(out)


def expectation(h, state):
    """Re<psi|H|psi>; ``state`` is assumed normalized."""
    value = np.vdot(state.amplitudes, apply_sum(h, state).amplitudes)
    if abs(value.imag) > 1e-10 * max(1.0, abs(value.real)):
        logger.warning(
            "Expectation has imaginary residual %.3e; is the operator Hermitian?",
            value.imag,
        )
    return float(value.real)


def strings_commute(a, b):
    """True iff the two strings differ in non-identity axis on an even number of sites."""
    clashes = (a.x_mask & b.z_mask) ^ (a.z_mask & b.x_mask)
    return clashes.bit_count() % 2 == 0


def diagonal_values(h):
    """Real eigenvalue of an all-Z sum on every basis state."""
    if not h.is_diagonal:
        raise ValidationError(
            _("Only all-Z sums have a diagonal representation."),
            code="not_diagonal",
        )
    values = np.zeros(2**h.n_qubits)
    for coefficient, string in h.terms:
        values += coefficient * _signs(h.n_qubits, string.z_mask)
    return values


def to_dense(h):
    """Dense 2**N x 2**N matrix of ``h``; real dtype unless a Y factor is present."""
    dim = 2**h.n_qubits
    dtype = np.complex128 if h.has_y else np.float64
    matrix = np.zeros((dim, dim), dtype=dtype)
    columns = basis_indices(h.n_qubits)
    for x_mask, weights in _grouped_weights(h).items():
        # column b maps to row b ^ x_mask with weight sign(b)
        values = weights if dtype is np.complex128 else weights.real
        matrix[columns ^ x_mask, columns] += values
    return matrix
