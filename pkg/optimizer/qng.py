"""
Quantum natural gradient descent:

    theta_{t+1} = theta_t - eta (F + lambda_t 1)^{-1} grad <H>,
    lambda_t = max(lambda0 * lambda_decay**t, lambda_floor).
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _

from ansatz.circuits import prepare_state
from core.exceptions import StepSolveError
from derivatives.fisher import FisherVariant, energy_gradient, fisher_matrix
from exact.solvers import normalized_energy
from pauli.operators import PauliSum, expectation

logger = logging.getLogger(__name__)

SOLVE_RESIDUAL_TOL = 1e-10
VARIATIONAL_TOL = 1e-9


@dataclass(frozen=True)
class OptimizerConfig:
    eta: float = 0.01
    lambda0: float = 100.0
    lambda_decay: float = 0.9
    lambda_floor: float = 1e-3
    max_epochs: int = 2000
    stop_window: int = 50
    stop_tol: float = 1e-12
    fisher_variant: str = FisherVariant.CENTERED

    def __post_init__(self):
        object.__setattr__(self, "fisher_variant", FisherVariant(self.fisher_variant))
        errors = []
        if not self.eta > 0:
            errors.append(_("eta must be positive."))
        if not 0 < self.lambda_decay < 1:
            errors.append(_("lambda_decay must lie strictly between 0 and 1."))
        if not self.lambda_floor > 0:
            errors.append(_("lambda_floor must be positive."))
        if self.max_epochs < 1 or self.stop_window < 1:
            errors.append(_("max_epochs and stop_window must be at least 1."))
        if errors:
            raise ValidationError(errors, code="invalid_optimizer")

    def as_dict(self):
        return {
            "eta": self.eta,
            "lambda0": self.lambda0,
            "lambda_decay": self.lambda_decay,
            "lambda_floor": self.lambda_floor,
            "max_epochs": self.max_epochs,
            "stop_window": self.stop_window,
            "stop_tol": self.stop_tol,
            "fisher_variant": self.fisher_variant.value,
        }


@dataclass(frozen=True)
class EpochRow:
    epoch: int
    objective: float
    energy: float
    grad_norm: float
    parities: tuple
    # running minimum of ``energy``
    best_energy: float


@dataclass
class RunRecord:
    rows: list = field(default_factory=list)
    final_params: np.ndarray = None
    converged: bool = False
    aborted: bool = False
    message: str = ""
    seed: int = None

    @property
    def epochs_run(self):
        return len(self.rows)

    @property
    def final_energy(self):
        return self.rows[-1].energy if self.rows else math.nan

    @property
    def final_objective(self):
        return self.rows[-1].objective if self.rows else math.nan

    @property
    def final_parities(self):
        return self.rows[-1].parities if self.rows else ()

    @property
    def best_energy(self):
        return self.rows[-1].best_energy if self.rows else math.nan

    def energies(self):
        return np.array([row.energy for row in self.rows])

    def normalized(self, e_gs):
        return normalized_energy(self.final_energy, e_gs)


def lambda_schedule(cfg, t):
    return max(cfg.lambda0 * cfg.lambda_decay**t, cfg.lambda_floor)


def natural_gradient_step(params, grad, fisher, eta, lam):
    """
    params - eta * x with (F + lam 1) x = grad, via a Cholesky solve and a
    least-squares fallback if the factorization breaks down numerically.
    """
    params = np.asarray(params, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    entries = getattr(fisher, "entries", fisher)
    if entries.shape != (grad.shape[0], grad.shape[0]) or params.shape != grad.shape:
        raise ValidationError(
            _("Fisher matrix, gradient and parameters have inconsistent sizes."),
            code="size_mismatch",
        )
    system = entries + lam * np.eye(grad.shape[0])
    try:
        direction = la.cho_solve(la.cho_factor(system), grad)
    except la.LinAlgError:
        logger.warning("Cholesky factorization failed at lambda=%g; using lstsq", lam)
        try:
            direction = la.lstsq(system, grad)[0]
        except (la.LinAlgError, ValueError) as exc:
            raise StepSolveError(f"Regularized solve failed: {exc}") from exc
    residual = np.linalg.norm(system @ direction - grad)
    if not residual <= SOLVE_RESIDUAL_TOL * np.linalg.norm(grad):
        raise StepSolveError(
            f"Regularized solve residual {residual:.3e} exceeds tolerance."
        )
    return params - eta * direction


def penalty_sector(alpha):
    """Parity eigenvalue favoured by a penalty alpha * P: -sign(alpha)."""
    return -float(np.sign(alpha))


def penalty_objective(h, penalties):
    """O = H + sum_k alpha_k P_k; zero weights add no term."""
    terms = []
    for alpha, parity in penalties:
        if parity.n_qubits != h.n_qubits:
            raise ValidationError(
                _("Penalty %(parity)s acts on %(m)d qubits, expected %(n)d."),
                code="size_mismatch",
                params={"parity": parity, "m": parity.n_qubits, "n": h.n_qubits},
            )
        if alpha != 0:
            terms.append((float(alpha), parity))
    return h.extend(terms)


def _stagnated(objectives, cfg):
    if len(objectives) < cfg.stop_window:
        return False
    window = objectives[-cfg.stop_window :]
    return max(window) - min(window) < cfg.stop_tol


def minimize(
    objective,
    spec,
    init,
    cfg,
    track=(),
    hamiltonian=None,
    reference_energy=None,
    seed=None,
):
    """
    Single natural-gradient run. Epoch t records the state at the current
    parameters and then steps with lambda_schedule(t); the last epoch does not
    step, so ``final_params`` are exactly the parameters of the last row.

    ``hamiltonian`` (default: the objective) feeds the energy column;
    ``reference_energy`` is its exact ground energy, checked against every row.
    """
    hamiltonian = objective if hamiltonian is None else hamiltonian
    params = spec.check_params(init).copy()
    tracked = [PauliSum.from_terms(spec.n_qubits, [(1.0, p)]) for p in track]
    record = RunRecord(seed=seed)
    objectives = []
    best = math.inf
    logger.info(
        "Starting %s run: n=%d depth=%d params=%d seed=%s",
        spec.family,
        spec.n_qubits,
        spec.depth,
        spec.n_params,
        seed,
    )
    for t in range(cfg.max_epochs):
        state = prepare_state(spec, params)
        value = expectation(objective, state)
        energy = value if hamiltonian is objective else expectation(hamiltonian, state)
        grad = energy_gradient(objective, spec, params)
        grad_norm = float(np.linalg.norm(grad))
        parities = tuple(expectation(p, state) for p in tracked)
        if not (np.isfinite(value) and np.isfinite(energy) and np.all(np.isfinite(grad))):
            record.aborted = True
            record.message = f"non-finite objective or gradient at epoch {t}"
            logger.error("Run aborted (seed=%s): %s", seed, record.message)
            break
        if reference_energy is not None and energy < reference_energy - VARIATIONAL_TOL:
            logger.warning(
                "Epoch %d energy %.15f is below the exact ground energy %.15f",
                t,
                energy,
                reference_energy,
            )
        best = min(best, energy)
        record.rows.append(EpochRow(t, value, energy, grad_norm, parities, best))
        objectives.append(value)
        logger.debug(
            "epoch=%d objective=%.15f energy=%.15f |g|=%.3e", t, value, energy, grad_norm
        )
        record.final_params = params.copy()
        if _stagnated(objectives, cfg):
            record.converged = True
            break
        if t == cfg.max_epochs - 1:
            break
        fisher = fisher_matrix(spec, params, cfg.fisher_variant)
        params = natural_gradient_step(
            params, grad, fisher, cfg.eta, lambda_schedule(cfg, t)
        )

    if record.final_params is None:
        record.final_params = params.copy()
    logger.info(
        "Finished run seed=%s after %d epochs: energy=%.12f converged=%s",
        seed,
        record.epochs_run,
        record.final_energy,
        record.converged,
    )
    return record
