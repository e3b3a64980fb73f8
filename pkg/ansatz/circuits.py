"""
Layered ansaetze: a block of parameterized layers repeated ``depth`` times on
top of |+>^N, with one parameter per layer instance.

Operator products such as ``prod_{j=D}^{1} L_z(phi_j) L_x(kappa_j) L_zz(theta_j)``
are read right to left: the rightmost layer hits the state first, and block
j = 1 is applied before block j = D. Blocks below are listed in application
order. Parameters are flattened block-major, layer-minor:
``index = block_index * len(block) + layer_index``.
"""

import logging
import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from django.core.exceptions import ValidationError
from django.db import models
from django.utils.translation import gettext_lazy as _

from core.utils import make_rng
from hamiltonians.builders import (
    ModelKind,
    ModelSpec,
    even_sites,
    odd_sites,
    parity_ops,
    single_site,
    zxz_string,
    zz_bond,
)
from pauli.operators import PauliSum
from statevector.engine import LayerSpec, apply_layer, plus_state

logger = logging.getLogger(__name__)


class AnsatzFamily(models.TextChoices):
    QAOA_TFI = "qaoa_tfi", _("QAOA for TFI")
    SB_TFI = "sb_tfi", _("Symmetry-breaking TFI")
    TFC_BARE = "tfc_bare", _("TFC without symmetry-breaking layers")
    SB_TFC = "sb_tfc", _("Symmetry-breaking TFC")
    SB_CLUSTER_OPEN = "sb_cluster_open", _("Symmetry-breaking open cluster")
    CLUSTER_OPEN_BARE = "cluster_open_bare", _("Open cluster without symmetry breaking")
    CUSTOM = "custom", _("Custom")


class CircuitChoice(models.TextChoices):
    QAOA = "qaoa", _("Hamiltonian-term layers only")
    BARE = "bare", _("Alias of qaoa")
    SB = "sb", _("With symmetry-breaking layers")


class InitKind(models.TextChoices):
    NORMAL_ZERO = "normal", _("N(0, sigma^2)")
    SB_OFFSET = "sboffset", _("N(0, sigma^2) plus 2pi/D on symmetry-breaking layers")


class InsertPosition(models.TextChoices):
    FLOOR = "floor", _("floor(D/2)")
    CEIL = "ceil", _("ceil(D/2)")


class NewBlock(models.TextChoices):
    NORMAL = "normal", _("N(0, sigma^2)")
    ZERO = "zero", _("zeros")


@dataclass(frozen=True, eq=False)
class AnsatzSpec:
    n_qubits: int
    depth: int
    block: tuple
    family: str = AnsatzFamily.CUSTOM
    initial_state: object = None

    def __post_init__(self):
        object.__setattr__(self, "block", tuple(self.block))
        if self.depth < 1:
            raise ValidationError(
                _("Circuit depth must be at least 1, got %(depth)s."),
                code="invalid_depth",
                params={"depth": self.depth},
            )
        if not self.block:
            raise ValidationError(_("A block needs at least one layer."), code="empty")
        for layer in self.block:
            if layer.n_qubits != self.n_qubits:
                raise ValidationError(
                    _("Layer %(label)s acts on %(m)d qubits, expected %(n)d."),
                    code="size_mismatch",
                    params={"label": layer.label, "m": layer.n_qubits, "n": self.n_qubits},
                )

    @property
    def n_params(self):
        return self.depth * len(self.block)

    @cached_property
    def param_layout(self):
        width = len(self.block)
        return {
            (b, l): b * width + l
            for b in range(self.depth)
            for l in range(width)
        }

    def param_index(self, block_index, layer_index):
        return self.param_layout[(block_index, layer_index)]

    def layers(self):
        """Layer instances in application order, one per flat parameter."""
        return [layer for _b in range(self.depth) for layer in self.block]

    def symmetry_breaking_indices(self):
        return [
            index
            for index, layer in enumerate(self.layers())
            if layer.symmetry_breaking
        ]

    def conserved_parities(self):
        """Parities every layer commutes with."""
        tags = list(self.block[0].symmetry_tags)
        return [tag for tag in tags if all(layer.commutes_with(tag) for layer in self.block)]

    def with_depth(self, depth):
        return replace(self, depth=depth)

    def check_params(self, params):
        params = np.asarray(params, dtype=np.float64)
        if params.shape != (self.n_params,):
            raise ValidationError(
                _("Expected %(p)d parameters, got shape %(shape)s."),
                code="size_mismatch",
                params={"p": self.n_params, "shape": params.shape},
            )
        return params


def reference_state(spec):
    return plus_state(spec.n_qubits) if spec.initial_state is None else spec.initial_state


def prepare_state(spec, params):
    params = spec.check_params(params)
    state = reference_state(spec)
    for theta, layer in zip(params, spec.layers()):
        state = apply_layer(layer, theta, state)
    return state


# ---------------------------------------------------------------------------
# Layers


def _layer(label, n, strings, tags=(), symmetry_breaking=False):
    generator = PauliSum.from_terms(n, [(1.0, string) for string in strings])
    return LayerSpec(label, generator, tuple(tags), symmetry_breaking)


def zz_ring_layer(n, tags=()):
    return _layer("zz", n, [zz_bond(n, i, i + 1) for i in range(n)], tags)


def zz_even_layer(n, tags=()):
    """Bonds Z_{2i}Z_{2i+1} in 1-based numbering, i.e. internal (1,2), (3,4), ..., (N-1,0)."""
    return _layer("zz_even", n, [zz_bond(n, i, i + 1) for i in odd_sites(n)], tags)


def zz_odd_layer(n, tags=()):
    """Bonds Z_{2i-1}Z_{2i} in 1-based numbering, i.e. internal (0,1), (2,3), ..."""
    return _layer("zz_odd", n, [zz_bond(n, i, i + 1) for i in even_sites(n)], tags)


def x_layer(n, tags=()):
    return _layer("x", n, [single_site(n, i, "X") for i in range(n)], tags)


def z_layer(n):
    return _layer("z", n, [single_site(n, i, "Z") for i in range(n)], symmetry_breaking=True)


def z_even_layer(n, tags=()):
    """Z on 1-based even sites, i.e. the internal odd bits."""
    strings = [single_site(n, i, "Z") for i in odd_sites(n)]
    return _layer("z_even", n, strings, tags, symmetry_breaking=True)


def z_odd_layer(n, tags=()):
    """Z on 1-based odd sites, i.e. the internal even bits."""
    strings = [single_site(n, i, "Z") for i in even_sites(n)]
    return _layer("z_odd", n, strings, tags, symmetry_breaking=True)


def zxz_layer(n, periodic=True, tags=()):
    count = n if periodic else n - 2
    return _layer("zxz", n, [zxz_string(n, i) for i in range(count)], tags)


def _require_even(n):
    if n % 2:
        raise ValidationError(
            _("This ansatz needs an even number of qubits, got %(n)d."),
            code="odd_qubits",
            params={"n": n},
        )


# ---------------------------------------------------------------------------
# Families


def qaoa_tfi(n, depth):
    """prod_k L_x(phi_k) L_zz^odd(kappa_k) L_zz^even(theta_k) |+>."""
    _require_even(n)
    (parity,) = parity_ops(ModelSpec(ModelKind.TFI, n))
    tags = (parity,)
    block = (zz_even_layer(n, tags), zz_odd_layer(n, tags), x_layer(n, tags))
    return AnsatzSpec(n, depth, block, AnsatzFamily.QAOA_TFI)


def sb_tfi(n, depth):
    """prod_j L_z(phi_j) L_x(kappa_j) L_zz(theta_j) |+>; L_z breaks P."""
    (parity,) = parity_ops(ModelSpec(ModelKind.TFI, n))
    tags = (parity,)
    block = (zz_ring_layer(n, tags), x_layer(n, tags), z_layer(n))
    return AnsatzSpec(n, depth, block, AnsatzFamily.SB_TFI)


def _sublattice_parities(model, n):
    _require_even(n)
    return parity_ops(ModelSpec(model, n))


def tfc_bare(n, depth):
    p1, p2 = _sublattice_parities(ModelKind.TFC, n)
    tags = (p1, p2)
    block = (zxz_layer(n, True, tags), x_layer(n, tags))
    return AnsatzSpec(n, depth, block, AnsatzFamily.TFC_BARE)


def _sb_cluster_block(n, periodic, model):
    p1, p2 = _sublattice_parities(model, n)
    tags = (p1, p2)
    # Z on the even bits commutes with P1 only, Z on the odd bits with P2 only.
    return (
        zxz_layer(n, periodic, tags),
        x_layer(n, tags),
        z_odd_layer(n, (p1,)),
        z_even_layer(n, (p2,)),
    )


def sb_tfc(n, depth):
    """prod_j L_z^even(phi_j) L_z^odd(chi_j) L_x(kappa_j) L_zxz(theta_j) |+>."""
    block = _sb_cluster_block(n, True, ModelKind.TFC)
    return AnsatzSpec(n, depth, block, AnsatzFamily.SB_TFC)


def sb_cluster_open(n, depth):
    block = _sb_cluster_block(n, False, ModelKind.CLUSTER_OPEN)
    return AnsatzSpec(n, depth, block, AnsatzFamily.SB_CLUSTER_OPEN)


def cluster_open_bare(n, depth):
    p1, p2 = _sublattice_parities(ModelKind.CLUSTER_OPEN, n)
    tags = (p1, p2)
    block = (zxz_layer(n, False, tags), x_layer(n, tags))
    return AnsatzSpec(n, depth, block, AnsatzFamily.CLUSTER_OPEN_BARE)


FAMILY_BUILDERS = {
    AnsatzFamily.QAOA_TFI: qaoa_tfi,
    AnsatzFamily.SB_TFI: sb_tfi,
    AnsatzFamily.TFC_BARE: tfc_bare,
    AnsatzFamily.SB_TFC: sb_tfc,
    AnsatzFamily.SB_CLUSTER_OPEN: sb_cluster_open,
    AnsatzFamily.CLUSTER_OPEN_BARE: cluster_open_bare,
}

CIRCUIT_FAMILIES = {
    (ModelKind.TFI, CircuitChoice.QAOA): AnsatzFamily.QAOA_TFI,
    (ModelKind.TFI, CircuitChoice.BARE): AnsatzFamily.QAOA_TFI,
    (ModelKind.TFI, CircuitChoice.SB): AnsatzFamily.SB_TFI,
    (ModelKind.TFC, CircuitChoice.QAOA): AnsatzFamily.TFC_BARE,
    (ModelKind.TFC, CircuitChoice.BARE): AnsatzFamily.TFC_BARE,
    (ModelKind.TFC, CircuitChoice.SB): AnsatzFamily.SB_TFC,
    (ModelKind.CLUSTER_OPEN, CircuitChoice.QAOA): AnsatzFamily.CLUSTER_OPEN_BARE,
    (ModelKind.CLUSTER_OPEN, CircuitChoice.BARE): AnsatzFamily.CLUSTER_OPEN_BARE,
    (ModelKind.CLUSTER_OPEN, CircuitChoice.SB): AnsatzFamily.SB_CLUSTER_OPEN,
}


def family_for(model, circuit):
    try:
        return CIRCUIT_FAMILIES[(ModelKind(model), CircuitChoice(circuit))]
    except (KeyError, ValueError):
        raise ValidationError(
            _("No %(circuit)s ansatz is defined for the %(model)s model."),
            code="unknown_family",
            params={"circuit": circuit, "model": model},
        )


def build_family(family, n, depth):
    try:
        builder = FAMILY_BUILDERS[AnsatzFamily(family)]
    except (KeyError, ValueError):
        raise ValidationError(
            _("Unknown ansatz family %(family)s."),
            code="unknown_family",
            params={"family": family},
        )
    return builder(n, depth)


def build_ansatz(model, circuit, n, depth):
    return build_family(family_for(model, circuit), n, depth)


# ---------------------------------------------------------------------------
# Parameters


@dataclass(frozen=True)
class InitStrategy:
    kind: str = InitKind.NORMAL_ZERO
    sigma: float = 0.001
    seed: int = 0
    # None means 2pi/D for the circuit being initialized
    offset: float = None

    def __post_init__(self):
        object.__setattr__(self, "kind", InitKind(self.kind))
        if not self.sigma > 0:
            raise ValidationError(
                _("The initialization width must be positive, got %(sigma)s."),
                code="invalid_sigma",
                params={"sigma": self.sigma},
            )

    @classmethod
    def parse(cls, text, seed=0):
        """Parse ``normal:SIGMA`` or ``sboffset:SIGMA``."""
        kind, _sep, sigma = str(text).partition(":")
        try:
            return cls(kind.strip().lower(), float(sigma) if sigma else 0.001, seed)
        except ValueError:
            raise ValidationError(
                _("Cannot parse init strategy %(text)s; use normal:SIGMA or sboffset:SIGMA."),
                code="invalid_init",
                params={"text": text},
            )

    def with_seed(self, seed):
        return replace(self, seed=seed)

    def label(self):
        return f"{self.kind.value}:{self.sigma!r}"


def init_params(spec, strategy):
    rng = make_rng(strategy.seed)
    params = rng.normal(0.0, strategy.sigma, spec.n_params)
    if strategy.kind == InitKind.SB_OFFSET:
        if not spec.symmetry_breaking_indices():
            logger.warning("%s has no symmetry-breaking layers; offset ignored", spec.family)
        offset = 2 * math.pi / spec.depth if strategy.offset is None else strategy.offset
        params[spec.symmetry_breaking_indices()] += offset
    return params


def insert_block(
    spec,
    params,
    perturb_sigma=0.01,
    rng=None,
    position=InsertPosition.FLOOR,
    new_block=NewBlock.NORMAL,
    new_block_sigma=0.001,
):
    """
    Insert one block into a converged circuit and perturb every parameter.

    The new block goes to position floor(D/2) (or ceil(D/2)) counted in
    application order, with parameters drawn from N(0, new_block_sigma^2)
    (or zeros); then all parameters receive N(0, perturb_sigma^2) noise.
    """
    params = spec.check_params(params)
    rng = make_rng(None) if rng is None else rng
    width = len(spec.block)
    depth = spec.depth
    at = depth // 2 if InsertPosition(position) == InsertPosition.FLOOR else (depth + 1) // 2

    if NewBlock(new_block) == NewBlock.ZERO or new_block_sigma == 0:
        fresh = np.zeros(width)
    else:
        fresh = rng.normal(0.0, new_block_sigma, width)
    grown = np.insert(params.reshape(depth, width), at, fresh, axis=0).ravel()
    if perturb_sigma > 0:
        grown = grown + rng.normal(0.0, perturb_sigma, grown.shape[0])
    return spec.with_depth(depth + 1), grown
