"""
Exact derivative states, energy gradients and quantum Fisher matrices.

For the k-th layer instance L_k = exp(-i theta_k G_k),

    |d_k psi> = U_{>k} (-i G_k) U_{<=k} |psi_0>,

where U_{<=k} includes L_k itself (G_k commutes with its own exponential).
"""

import logging
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from django.db import models
from django.utils.translation import gettext_lazy as _

from ansatz.circuits import prepare_state, reference_state
from pauli.operators import apply_sum
from statevector.engine import apply_layer
from statevector.states import check_same_size

logger = logging.getLogger(__name__)


class FisherVariant(models.TextChoices):
    CENTERED = "centered", _("Centered (Fubini-Study)")
    UNCENTERED = "uncentered", _("Uncentered")


@dataclass(frozen=True, eq=False)
class FisherMatrix:
    entries: np.ndarray
    variant: str = FisherVariant.CENTERED

    @property
    def dim(self):
        return self.entries.shape[0]

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.entries)

    def regularized(self, lam):
        return self.entries + lam * np.eye(self.dim)


def _kick(layer, state):
    """-i G |state>."""
    return state.with_amplitudes(-1j * apply_sum(layer.generator, state).amplitudes)


def derivative_states(spec, params):
    """|d_k psi> for every flat parameter index k (unnormalized)."""
    params = spec.check_params(params)
    state = reference_state(spec)
    derivatives = []
    for theta, layer in zip(params, spec.layers()):
        state = apply_layer(layer, theta, state)
        derivatives = [apply_layer(layer, theta, d) for d in derivatives]
        derivatives.append(_kick(layer, state))
    return derivatives


def energy_gradient(h, spec, params):
    """
    g_k = 2 Re <d_k psi|H|psi>, by a reverse sweep that un-applies one layer at
    a time from both |psi> and H|psi>.
    """
    params = spec.check_params(params)
    state = prepare_state(spec, params)
    check_same_size(h.n_qubits, state)
    adjoint = apply_sum(h, state)
    layers = spec.layers()
    gradient = np.empty(spec.n_params)
    for k in reversed(range(spec.n_params)):
        layer, theta = layers[k], params[k]
        gradient[k] = 2.0 * np.vdot(_kick(layer, state).amplitudes, adjoint.amplitudes).real
        state = apply_layer(layer, -theta, state)
        adjoint = apply_layer(layer, -theta, adjoint)
    return gradient


def _stored_overlaps(spec, params):
    derivatives = derivative_states(spec, params)
    state = prepare_state(spec, params)
    stacked = np.array([d.amplitudes for d in derivatives])
    gram = stacked.conj() @ stacked.T
    connection = stacked @ state.amplitudes.conj()
    return gram, connection


def _streamed_overlaps(spec, params):
    """
    Same overlaps holding only four statevectors: U_{>j} cancels in
    <d_i psi|d_j psi>, so the i-th kick is propagated up to layer j and
    contracted with the j-th kick directly.
    """
    layers = spec.layers()
    size = spec.n_params
    gram = np.empty((size, size), dtype=np.complex128)
    connection = np.empty(size, dtype=np.complex128)
    base = reference_state(spec)
    for i in range(size):
        base = apply_layer(layers[i], params[i], base)
        carried = _kick(layers[i], base)
        gram[i, i] = np.vdot(carried.amplitudes, carried.amplitudes)
        connection[i] = np.vdot(base.amplitudes, carried.amplitudes)
        current = base
        for j in range(i + 1, size):
            current = apply_layer(layers[j], params[j], current)
            carried = apply_layer(layers[j], params[j], carried)
            gram[i, j] = np.vdot(carried.amplitudes, _kick(layers[j], current).amplitudes)
            gram[j, i] = np.conj(gram[i, j])
    return gram, connection


def should_stream(spec):
    return spec.n_params * 2**spec.n_qubits * 16 > settings.FISHER_STREAM_BYTES


def derivative_overlaps(spec, params, stream=None):
    """Gram matrix <d_i psi|d_j psi> and connection <psi|d_k psi>."""
    params = spec.check_params(params)
    if stream is None:
        stream = should_stream(spec)
    if stream:
        logger.debug("Streaming derivative overlaps for %d parameters", spec.n_params)
        return _streamed_overlaps(spec, params)
    return _stored_overlaps(spec, params)


def berry_connection(spec, params, stream=None):
    """beta_k = Im <psi|d_k psi>; the real part vanishes for normalized states."""
    _gram, connection = derivative_overlaps(spec, params, stream)
    return connection.imag


def fisher_from_overlaps(gram, connection, variant):
    variant = FisherVariant(variant)
    entries = gram.real.copy()
    if variant == FisherVariant.CENTERED:
        entries -= np.outer(connection.conj(), connection).real
    return FisherMatrix(0.5 * (entries + entries.T), variant)


def fisher_matrix(spec, params, variant=FisherVariant.CENTERED, stream=None):
    gram, connection = derivative_overlaps(spec, params, stream)
    return fisher_from_overlaps(gram, connection, variant)
