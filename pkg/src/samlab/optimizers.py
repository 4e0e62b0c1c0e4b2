"""The SAM optimizer family and its SGD baseline.

Three perturbation strategies share one outer step:

* first-order: epsilon = rho * g / ||g||, the closed-form maximizer of the
  linearized inner problem;
* gradient ascent: N normalized ascent sub-steps of length rho/N each, with
  the gradient re-evaluated at every iterate;
* random: a uniform unit direction scaled by rho, resampled every step.

The outer step evaluates the gradient at the perturbed point w + epsilon and
applies a plain SGD-with-momentum update to the ORIGINAL w. The perturbation
and the perturbed gradient always use the same minibatch: mixing batches
would change the estimator being optimized.

Weight decay is decoupled from the perturbation: epsilon is computed from the
pure loss gradient, and decay enters only the outer update.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import network
from .errors import ConfigError
from .vecops import sample_unit_direction

FIRST_ORDER = "first_order"
GRADIENT_ASCENT = "gradient_ascent"
RANDOM = "random"

SGD = "sgd"
SAM = "sam"
SAM_GA = "sam_ga"
RAND_SAM = "rand_sam"

OPTIMIZER_KINDS = (SGD, SAM, SAM_GA, RAND_SAM)

# Gradient norms below this are treated as exactly flat (zero-gradient fallback).
ZERO_GRAD_EPS = 1e-12


@dataclass
class Perturbation:
    """A parameter-space displacement epsilon with its provenance.

    `zero_gradient` marks the fallback where a flat batch made the ascent
    direction undefined: epsilon is all zeros and the step degrades to SGD.
    For gradient ascent it also marks an early stop at a flat iterate.
    """

    epsilon: np.ndarray
    rho: float
    strategy: str
    steps_used: int = 0
    zero_gradient: bool = False

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.epsilon))


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str
    learning_rate: float
    momentum: float = 0.0
    weight_decay: float = 0.0
    rho: float = 0.05
    ga_steps: int = 1

    def __post_init__(self):
        if self.kind not in OPTIMIZER_KINDS:
            raise ConfigError(f"unknown optimizer kind {self.kind!r}, expected one of {OPTIMIZER_KINDS}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.kind != SGD and self.rho <= 0:
            raise ConfigError(f"rho must be > 0 for SAM variants, got {self.rho}")
        if self.ga_steps < 1:
            raise ConfigError(f"ga_steps must be >= 1, got {self.ga_steps}")

    @property
    def label(self) -> str:
        if self.kind == SAM_GA:
            return f"sam_ga{self.ga_steps}"
        return self.kind


@dataclass
class OptimizerState:
    """Per-run mutable state: momentum buffer, counters, direction sampler."""

    momentum_buffer: np.ndarray
    step_count: int = 0
    grad_evals: int = 0
    rng: Optional[np.random.Generator] = None


def init_state(config: OptimizerConfig, param_len: int, direction_seed: Optional[int] = None) -> OptimizerState:
    rng = None
    if config.kind == RAND_SAM:
        if direction_seed is None:
            raise ConfigError("rand_sam requires a direction seed")
        rng = np.random.default_rng(direction_seed & 0xFFFFFFFFFFFFFFFF)
    return OptimizerState(momentum_buffer=np.zeros(param_len, dtype=np.float64), rng=rng)


@dataclass
class StepReport:
    """Observability record for one optimizer step."""

    loss: float
    perturbed_loss: Optional[float]
    epsilon_norm: float
    zero_gradient: bool = False
    grad_evals: int = 1


def epsilon_first_order(gradient: np.ndarray, rho: float) -> Perturbation:
    """epsilon = rho * gradient / ||gradient||.

    Falls back to epsilon = 0 (flagged) when the gradient norm vanishes;
    flat-region batches occur legitimately late in training and should not
    abort a run.
    """
    if rho <= 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    gradient = np.asarray(gradient, dtype=np.float64)
    norm = float(np.linalg.norm(gradient))
    if norm < ZERO_GRAD_EPS:
        return Perturbation(np.zeros_like(gradient), rho, FIRST_ORDER,
                            steps_used=0, zero_gradient=True)
    return Perturbation(rho * gradient / norm, rho, FIRST_ORDER, steps_used=1)


def epsilon_gradient_ascent(loss_and_grad_fn: Callable, w: np.ndarray,
                            rho: float, n_steps: int) -> Perturbation:
    """N normalized ascent sub-steps of length rho/N from w; returns w^N - w.

    `loss_and_grad_fn(p) -> (loss, grad)` is re-evaluated at every iterate.
    The accumulated displacement is NOT projected back to norm rho: the
    sub-steps need not be collinear, so ||epsilon|| can end up below rho.
    Stops early (flagged) if a flat iterate is hit.
    """
    if rho <= 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    w = np.asarray(w, dtype=np.float64)
    current = w.copy()
    step_len = rho / n_steps
    for step in range(n_steps):
        _, grad = loss_and_grad_fn(current)
        norm = float(np.linalg.norm(grad))
        if norm < ZERO_GRAD_EPS:
            return Perturbation(current - w, rho, GRADIENT_ASCENT,
                                steps_used=step, zero_gradient=True)
        current = current + step_len * (grad / norm)
    return Perturbation(current - w, rho, GRADIENT_ASCENT, steps_used=n_steps)


def epsilon_random(param_len: int, rho: float, rng: np.random.Generator) -> Perturbation:
    """A fresh uniform unit direction scaled by rho; independent per call."""
    if rho <= 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    direction = sample_unit_direction(param_len, rng)
    return Perturbation(rho * direction, rho, RANDOM, steps_used=1)


def _apply_update(params: np.ndarray, grad: np.ndarray, config: OptimizerConfig,
                  state: OptimizerState) -> np.ndarray:
    # Update order is fixed: buffer <- mu * buffer + g; w <- w - lr * (buffer + wd * w)
    state.momentum_buffer = config.momentum * state.momentum_buffer + grad
    new_params = params - config.learning_rate * (state.momentum_buffer + config.weight_decay * params)
    state.step_count += 1
    return new_params


def sgd_step(model_spec, params: np.ndarray, batch, config: OptimizerConfig,
             state: OptimizerState):
    """One SGD-with-momentum step; the baseline every SAM variant reduces to."""
    params = np.asarray(params, dtype=np.float64)
    evals_before = state.grad_evals
    value, grad = _counted_loss_and_grad(model_spec, params, batch, state)
    new_params = _apply_update(params, grad, config, state)
    report = StepReport(loss=value, perturbed_loss=None, epsilon_norm=0.0,
                        grad_evals=state.grad_evals - evals_before)
    return new_params, report


def sam_step(model_spec, params: np.ndarray, batch, config: OptimizerConfig,
             state: OptimizerState):
    """One sharpness-aware step with the configured perturbation strategy.

    (1) compute epsilon on this batch, (2) evaluate the gradient at
    w + epsilon on the same batch, (3) descend from the original w using that
    gradient. Uses exactly 2 gradient evaluations for the first-order and
    random strategies and N+1 for N-step gradient ascent.
    """
    if config.kind not in (SAM, SAM_GA, RAND_SAM):
        raise ConfigError(f"sam_step needs a SAM variant, got kind {config.kind!r}")
    params = np.asarray(params, dtype=np.float64)
    evals_before = state.grad_evals

    if config.kind == SAM:
        base_value, base_grad = _counted_loss_and_grad(model_spec, params, batch, state)
        perturbation = epsilon_first_order(base_grad, config.rho)
    elif config.kind == RAND_SAM:
        # The base evaluation's gradient is unused (the direction is random),
        # but the loss at w is still wanted for reporting and the evaluation
        # keeps the 2x-per-batch gradient budget uniform across variants.
        base_value, _ = _counted_loss_and_grad(model_spec, params, batch, state)
        perturbation = epsilon_random(params.shape[0], config.rho, state.rng)
    else:
        first_value = []

        def fn(p):
            value, grad = _counted_loss_and_grad(model_spec, p, batch, state)
            if not first_value:
                first_value.append(value)
            return value, grad

        perturbation = epsilon_gradient_ascent(fn, params, config.rho, config.ga_steps)
        base_value = first_value[0]

    perturbed_value, perturbed_grad = _counted_loss_and_grad(
        model_spec, params + perturbation.epsilon, batch, state)
    new_params = _apply_update(params, perturbed_grad, config, state)
    report = StepReport(loss=base_value, perturbed_loss=perturbed_value,
                        epsilon_norm=perturbation.norm,
                        zero_gradient=perturbation.zero_gradient,
                        grad_evals=state.grad_evals - evals_before)
    return new_params, report


def step(model_spec, params: np.ndarray, batch, config: OptimizerConfig,
         state: OptimizerState):
    """Dispatch to sgd_step or sam_step based on the configured kind."""
    if config.kind == SGD:
        return sgd_step(model_spec, params, batch, config, state)
    return sam_step(model_spec, params, batch, config, state)


def _counted_loss_and_grad(model_spec, params, batch, state: OptimizerState):
    state.grad_evals += 1
    result = network.loss_and_grad(model_spec, params, batch)
    return result.value, result.gradient
