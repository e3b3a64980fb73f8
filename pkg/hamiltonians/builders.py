"""
Builders for the transverse-field Ising (TFI), transverse-field cluster (TFC)
and open-boundary cluster Hamiltonians, and their X-parity symmetries.

Sites are 0-based internally. The usual 1-based sublattice names map as:

    1-based even sites 2, 4, ..., N  ->  internal odd bits 1, 3, ..., N-1
    1-based odd sites  1, 3, ..., N-1 ->  internal even bits 0, 2, ..., N-2

so P1 (X on 1-based even sites) is X on the odd bits and P2 (X on 1-based odd
sites) is X on the even bits.
"""

from dataclasses import dataclass

from django.core.exceptions import ValidationError
from django.db import models
from django.utils.translation import gettext_lazy as _

from pauli.operators import PauliString, PauliSum


class ModelKind(models.TextChoices):
    TFI = "tfi", _("Transverse-field Ising (periodic)")
    TFC = "tfc", _("Transverse-field cluster (periodic)")
    CLUSTER_OPEN = "cluster", _("Cluster (open boundary)")


PERIODIC = "periodic"
OPEN = "open"


@dataclass(frozen=True)
class ModelSpec:
    model: str
    n_qubits: int
    h: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "model", ModelKind(self.model))
        n = self.n_qubits
        if self.model == ModelKind.TFI and n < 2:
            raise ValidationError(
                _("The TFI model needs at least 2 qubits."), code="invalid_size"
            )
        if self.model == ModelKind.TFC and (n < 4 or n % 2):
            raise ValidationError(
                _("The TFC model needs an even number of at least 4 qubits."),
                code="odd_qubits",
            )
        if self.model == ModelKind.CLUSTER_OPEN and n < 3:
            raise ValidationError(
                _("The open cluster model needs at least 3 qubits."),
                code="invalid_size",
            )

    @property
    def boundary(self):
        return OPEN if self.model == ModelKind.CLUSTER_OPEN else PERIODIC

    def as_dict(self):
        return {
            "model": self.model.value,
            "n_qubits": self.n_qubits,
            "h": self.h,
            "boundary": self.boundary,
        }


def zz_bond(n, i, j):
    return PauliString.from_sites(n, {i % n: "Z", j % n: "Z"})


def zxz_string(n, i):
    return PauliString.from_sites(n, {i % n: "Z", (i + 1) % n: "X", (i + 2) % n: "Z"})


def single_site(n, site, axis):
    return PauliString(n, ((site, axis),))


def x_product(n, sites):
    return PauliString(n, tuple((site, "X") for site in sorted(sites)))


def transverse_field(n, h):
    return [(-h, single_site(n, i, "X")) for i in range(n)]


def build_tfi(n, h):
    """H = -sum_i Z_i Z_{i+1} - h sum_i X_i with Z_N = Z_0."""
    if n < 2:
        raise ValidationError(
            _("The TFI model needs at least 2 qubits."), code="invalid_size"
        )
    bonds = [(-1.0, zz_bond(n, i, i + 1)) for i in range(n)]
    return PauliSum.from_terms(n, bonds + transverse_field(n, h))


def build_tfc(n, h):
    """H = -sum_i Z_i X_{i+1} Z_{i+2} - h sum_i X_i, periodic."""
    if n < 3 or n % 2:
        raise ValidationError(
            _("The TFC model needs an even number of at least 4 qubits."),
            code="odd_qubits",
        )
    stabilizers = [(-1.0, zxz_string(n, i)) for i in range(n)]
    return PauliSum.from_terms(n, stabilizers + transverse_field(n, h))


def build_cluster_open(n):
    """H = -sum_{i=0}^{N-3} Z_i X_{i+1} Z_{i+2}."""
    if n < 3:
        raise ValidationError(
            _("The open cluster model needs at least 3 qubits."),
            code="invalid_size",
        )
    return PauliSum.from_terms(n, [(-1.0, zxz_string(n, i)) for i in range(n - 2)])


def build_hamiltonian(spec):
    if spec.model == ModelKind.TFI:
        return build_tfi(spec.n_qubits, spec.h)
    if spec.model == ModelKind.TFC:
        return build_tfc(spec.n_qubits, spec.h)
    return build_cluster_open(spec.n_qubits)


def odd_sites(n):
    return range(1, n, 2)


def even_sites(n):
    return range(0, n, 2)


def parity_ops(spec):
    """
    TFI: [P] with X on every site. TFC and open cluster: [P1, P2] with
    P1 on the odd bits and P2 on the even bits (see module docstring).
    """
    n = spec.n_qubits
    if spec.model == ModelKind.TFI:
        return [x_product(n, range(n))]
    if n % 2:
        raise ValidationError(
            _("Sublattice parities are only defined for an even number of qubits."),
            code="odd_qubits",
        )
    return [x_product(n, odd_sites(n)), x_product(n, even_sites(n))]
