"""
Ground-truth energies: dense diagonalization for small registers and Lanczos
with full reorthogonalization on the matrix-free Hamiltonian for larger ones.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
from django.conf import settings
from django.core.exceptions import ValidationError
from django.db import models
from django.utils.translation import gettext_lazy as _

from core.exceptions import NotConvergedError
from core.utils import make_rng
from pauli.operators import apply_sum, to_dense
from statevector.states import Statevector

logger = logging.getLogger(__name__)

# Lanczos residual bound; the Ritz-value error scales with its square.
RESIDUAL_TOL = 1e-8
BREAKDOWN_TOL = 1e-12
# Lanczos vectors are allocated this many at a time.
BASIS_BLOCK_ROWS = 32


class SolverMethod(models.TextChoices):
    AUTO = "auto", _("Dense up to DENSE_MAX_QUBITS, Lanczos beyond")
    DENSE = "dense", _("Dense diagonalization")
    LANCZOS = "lanczos", _("Lanczos")


@dataclass(frozen=True, eq=False)
class GroundTruth:
    energy: float
    method: str
    # dense path only
    degeneracy: int = None
    state: Statevector = None
    iterations: int = None

    def as_dict(self):
        data = {"energy": self.energy, "method": SolverMethod(self.method).value}
        if self.degeneracy is not None:
            data["degeneracy"] = self.degeneracy
        if self.iterations is not None:
            data["iterations"] = self.iterations
        return data


def dense_ground(h, keep_state=False):
    if h.n_qubits > settings.DENSE_MAX_QUBITS:
        raise ValidationError(
            _("Dense diagonalization is limited to %(max)d qubits, got %(n)d."),
            code="too_large",
            params={"max": settings.DENSE_MAX_QUBITS, "n": h.n_qubits},
        )
    matrix = to_dense(h)
    if keep_state:
        values, vectors = la.eigh(matrix)
    else:
        values = la.eigh(matrix, eigvals_only=True)
    energy = float(values[0])
    degeneracy = int(np.count_nonzero(values <= energy + settings.DEGENERACY_TOL))
    state = Statevector(h.n_qubits, vectors[:, 0]) if keep_state else None
    return GroundTruth(energy, SolverMethod.DENSE, degeneracy=degeneracy, state=state)


class KrylovBasis:
    """
    Orthonormal Lanczos vectors kept in preallocated row blocks, so growing
    the basis never copies earlier vectors and projections work on views.
    """

    def __init__(self, dim, block_rows=BASIS_BLOCK_ROWS):
        self.dim = dim
        self.block_rows = block_rows
        self.blocks = []
        self.size = 0

    def append(self, vector):
        row = self.size % self.block_rows
        if row == 0:
            self.blocks.append(np.empty((self.block_rows, self.dim), dtype=np.complex128))
        self.blocks[-1][row] = vector
        self.size += 1

    def last(self):
        return self.blocks[-1][(self.size - 1) % self.block_rows]

    def filled(self):
        for index, block in enumerate(self.blocks):
            rows = min(self.block_rows, self.size - index * self.block_rows)
            yield block[:rows]

    def orthogonalize(self, w):
        """Remove the span of the basis from ``w`` in place."""
        for block in self.filled():
            coefficients = np.conj(block @ w.conj())
            w -= coefficients @ block
        return w


def _lanczos_pass(h, start, tol, max_iter):
    """One Lanczos run; returns (lowest Ritz value, iterations)."""
    dim = start.shape[0]
    basis = KrylovBasis(dim)
    basis.append(start / np.linalg.norm(start))
    alphas, betas = [], []
    previous = None
    for iteration in range(1, min(max_iter, dim) + 1):
        v = basis.last()
        w = apply_sum(h, Statevector(h.n_qubits, v)).amplitudes
        alphas.append(np.vdot(v, w).real)
        # full reorthogonalization, twice is enough
        for _repeat in range(2):
            basis.orthogonalize(w)
        beta = np.linalg.norm(w)

        if len(alphas) == 1:
            value, last = alphas[0], 1.0
        else:
            ritz, vectors = la.eigh_tridiagonal(
                np.array(alphas),
                np.array(betas),
                select="i",
                select_range=(0, 0),
            )
            value, last = float(ritz[0]), vectors[-1, 0]
        residual = beta * abs(last)
        logger.debug(
            "Lanczos iteration %d: ritz=%.15f residual=%.3e", iteration, value, residual
        )
        if beta < BREAKDOWN_TOL or iteration == dim:
            return value, iteration
        if previous is not None and abs(previous - value) < tol and residual < RESIDUAL_TOL:
            return value, iteration
        previous = value
        betas.append(beta)
        w /= beta
        basis.append(w)
    raise NotConvergedError(
        f"Lanczos did not converge within {max_iter} iterations "
        f"(last Ritz value {previous!r})."
    )


def lanczos_start_vectors(n_qubits):
    """
    The normalized all-ones vector, followed by the documented fallback: the
    all-ones vector plus a seeded perturbation. All-ones lies in the +1 sector
    of every X-parity, so on its own it cannot see a ground space elsewhere.
    """
    dim = 2**n_qubits
    ones = np.ones(dim, dtype=np.complex128)
    rng = make_rng(settings.LANCZOS_FALLBACK_SEED)
    perturbed = ones + 0.5 * rng.standard_normal(dim)
    return [ones, perturbed]


def lanczos_ground(h, tol=None, max_iter=None):
    tol = settings.LANCZOS_TOL if tol is None else tol
    max_iter = settings.LANCZOS_MAX_ITER if max_iter is None else max_iter
    if h.n_qubits > settings.VQE_MAX_QUBITS:
        raise ValidationError(
            _("Lanczos is limited to %(max)d qubits, got %(n)d."),
            code="too_large",
            params={"max": settings.VQE_MAX_QUBITS, "n": h.n_qubits},
        )
    primary, fallback = lanczos_start_vectors(h.n_qubits)
    energy, iterations = _lanczos_pass(h, primary, tol, max_iter)
    other, more = _lanczos_pass(h, fallback, tol, max_iter)
    if other < energy - 1e-10:
        logger.warning(
            "Perturbed Lanczos restart found a lower energy (%.12f < %.12f); "
            "the ground space is orthogonal to the all-ones vector.",
            other,
            energy,
        )
    return GroundTruth(
        min(energy, other), SolverMethod.LANCZOS, iterations=iterations + more
    )


def ground_truth(h, method=SolverMethod.AUTO):
    method = SolverMethod(method)
    if method == SolverMethod.AUTO:
        method = (
            SolverMethod.DENSE
            if h.n_qubits <= settings.DENSE_MAX_QUBITS
            else SolverMethod.LANCZOS
        )
    if method == SolverMethod.DENSE:
        return dense_ground(h)
    return lanczos_ground(h)


def normalized_energy(e_vqe, e_gs):
    """(E_VQE - E_GS) / |E_GS|, nonnegative for variational energies."""
    if e_gs == 0:
        raise ValidationError(
            _("The normalized energy is undefined for a zero ground energy."),
            code="zero_ground_energy",
        )
    return (e_vqe - e_gs) / abs(e_gs)
