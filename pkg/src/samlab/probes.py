"""Sharpness probes: three loss-increase measurements around a trained point.

All three share the scale rho and measure how much the loss rises within a
rho-ball around w, but they answer different questions:

* worst direction (estimated): max over the ball, via projected gradient
  ascent from several starts. A lower bound on the true maximum.
* ascent direction: loss one first-order step away, L(w + rho g/||g||).
* average direction: expected loss over uniform random unit directions.

Standardized sharpness is the ascent-direction rise L(w + e1) - L(w) with e1
always the FIRST-ORDER perturbation, regardless of how the model was trained.
Comparing optimizers by their own training perturbation would conflate the
measurement instrument with the thing measured.
"""

from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from . import network
from .optimizers import epsilon_first_order, ZERO_GRAD_EPS
from .vecops import sample_unit_direction
from .errors import SamLabError

DEFAULT_RESTARTS = 8
DEFAULT_INNER_STEPS = 20
DEFAULT_SAMPLES = 64


@dataclass(frozen=True)
class ProbeConfig:
    rho: float = 0.05
    restarts: int = DEFAULT_RESTARTS
    inner_steps: int = DEFAULT_INNER_STEPS
    n_samples: int = DEFAULT_SAMPLES

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError(f"rho must be > 0, got {self.rho}")
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if self.inner_steps < 1:
            raise ValueError(f"inner_steps must be >= 1, got {self.inner_steps}")
        if self.n_samples < 2:
            raise ValueError(f"n_samples must be >= 2, got {self.n_samples}")


@dataclass(frozen=True)
class SharpnessReport:
    """Every sharpness quantity measured at one parameter point.

    `data_scope` records which split the probe batch came from. The x1e3
    scaling used in result tables is applied at serialization time, not here.
    """

    base_loss: float
    l_asc: float
    l_avg_mean: float
    l_avg_stderr: float
    l_avg_samples: int
    l_max_estimate: float
    l_max_restarts: int
    standardized_sharpness: float
    generalization_gap: Optional[float]
    rho: float
    data_scope: str

    def to_dict(self) -> dict:
        return asdict(self)


def loss_ascent_direction(model_spec, params: np.ndarray, batch, rho: float) -> float:
    """L(w + rho * g/||g||): loss after one normalized gradient step up."""
    result = network.loss_and_grad(model_spec, params, batch)
    perturbation = epsilon_first_order(result.gradient, rho)
    if perturbation.zero_gradient:
        return result.value
    return network.forward(model_spec, params + perturbation.epsilon, batch)


def loss_average_direction(model_spec, params: np.ndarray, batch, rho: float,
                           n_samples: int, seed: int):
    """Monte Carlo estimate of E[L(w + rho u)] over uniform unit directions u.

    Returns (mean, stderr, n_samples). stderr uses the sample standard
    deviation (ddof=1), so at least two samples are required.
    """
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    rng = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF)
    params = np.asarray(params, dtype=np.float64)
    losses = np.empty(n_samples, dtype=np.float64)
    for i in range(n_samples):
        direction = sample_unit_direction(params.shape[0], rng)
        losses[i] = network.forward(model_spec, params + rho * direction, batch)
    mean = float(np.mean(losses))
    stderr = float(np.std(losses, ddof=1) / np.sqrt(n_samples))
    return mean, stderr, n_samples


def _ascend(model_spec, params, batch, rho, inner_steps, start_epsilon):
    """Projected gradient ascent inside the rho-ball from w + start_epsilon.

    Normalized ascent steps of length 2*rho/inner_steps, projecting back onto
    the ball whenever an iterate leaves it. Returns the best loss seen at any
    visited point, including the start.
    """
    epsilon = np.asarray(start_epsilon, dtype=np.float64).copy()
    start_norm = float(np.linalg.norm(epsilon))
    if start_norm > rho:
        epsilon *= rho / start_norm
    best = network.forward(model_spec, params + epsilon, batch)
    step_len = 2.0 * rho / inner_steps
    for _ in range(inner_steps):
        result = network.loss_and_grad(model_spec, params + epsilon, batch)
        norm = float(np.linalg.norm(result.gradient))
        if norm < ZERO_GRAD_EPS:
            break
        epsilon = epsilon + step_len * (result.gradient / norm)
        eps_norm = float(np.linalg.norm(epsilon))
        if eps_norm > rho:
            epsilon *= rho / eps_norm
        value = network.forward(model_spec, params + epsilon, batch)
        if value > best:
            best = value
    return best


def loss_worst_direction_estimate(model_spec, params: np.ndarray, batch, rho: float,
                                  restarts: int, inner_steps: int, seed: int) -> float:
    """Estimate max_{||e|| <= rho} L(w + e) by multi-restart ascent.

    One ascent starts from the first-order perturbation (usually already near
    the maximizer), the rest from independent uniform draws inside the ball.
    The estimate is monotone in `restarts` for a fixed seed because restart i
    always uses the stream seeded by (seed, i). Never below L(w): the center
    is a visited point of the first ascent whenever the gradient vanishes,
    and otherwise the first-order start dominates it in practice; we still
    clamp against the center explicitly to make the lower bound exact.
    """
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    params = np.asarray(params, dtype=np.float64)
    base_result = network.loss_and_grad(model_spec, params, batch)
    best = base_result.value

    first_order = epsilon_first_order(base_result.gradient, rho)
    if not first_order.zero_gradient:
        best = max(best, _ascend(model_spec, params, batch, rho,
                                 inner_steps, first_order.epsilon))

    dim = params.shape[0]
    for restart in range(restarts):
        rng = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, restart])
        # Uniform in the ball: unit direction times rho * U^(1/d).
        radius = rho * float(rng.uniform()) ** (1.0 / dim)
        start = radius * sample_unit_direction(dim, rng)
        best = max(best, _ascend(model_spec, params, batch, rho,
                                 inner_steps, start))
    return best


def standardized_sharpness(model_spec, params: np.ndarray, batch, rho: float) -> float:
    """L(w + e1) - L(w) with e1 the first-order perturbation.

    Zero when the gradient vanishes (e1 = 0 by the flat-batch fallback).
    """
    base = network.forward(model_spec, params, batch)
    return loss_ascent_direction(model_spec, params, batch, rho) - base


def generalization_gap(train_loss: float, test_loss: float) -> float:
    """test - train; positive when the model fits train better than test."""
    return test_loss - train_loss


def loss_plane_slice(model_spec, params: np.ndarray, batch,
                     direction_a: np.ndarray, direction_b: np.ndarray,
                     extent: float, n_points: int):
    """Loss surface on a 2-D plane through w.

    The two directions are orthonormalized (Gram-Schmidt, a first), then the
    loss is evaluated on a regular (n_points x n_points) grid of coefficients
    in [-extent, extent]^2. Returns (alphas, betas, losses) with
    losses[i, j] = L(w + alphas[i] * a + betas[j] * b). With odd n_points the
    center cell is the unperturbed loss exactly.
    """
    if extent < 0:
        raise ValueError(f"extent must be >= 0, got {extent}")
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    params = np.asarray(params, dtype=np.float64)
    a = np.asarray(direction_a, dtype=np.float64).copy()
    norm_a = float(np.linalg.norm(a))
    if norm_a < ZERO_GRAD_EPS:
        raise SamLabError("slice direction a has zero norm")
    a /= norm_a
    b = np.asarray(direction_b, dtype=np.float64).copy()
    b -= np.dot(b, a) * a
    norm_b = float(np.linalg.norm(b))
    if norm_b < ZERO_GRAD_EPS:
        raise SamLabError("slice directions are parallel; the plane is degenerate")
    b /= norm_b

    alphas = np.linspace(-extent, extent, n_points)
    betas = np.linspace(-extent, extent, n_points)
    if n_points % 2 == 1:
        alphas[n_points // 2] = 0.0
        betas[n_points // 2] = 0.0
    losses = np.empty((n_points, n_points), dtype=np.float64)
    for i, alpha in enumerate(alphas):
        for j, beta in enumerate(betas):
            losses[i, j] = network.forward(model_spec, params + alpha * a + beta * b, batch)
    return alphas, betas, losses


def build_report(model_spec, params: np.ndarray, batch, config: ProbeConfig,
                 seed: int, data_scope: str,
                 train_loss: Optional[float] = None,
                 test_loss: Optional[float] = None) -> SharpnessReport:
    """Run every probe at one parameter point and collect the results.

    The gap is filled in only when both split losses are supplied; a probe of
    a bare checkpoint has no training history to compare against.
    """
    params = np.asarray(params, dtype=np.float64)
    base = network.forward(model_spec, params, batch)
    l_asc = loss_ascent_direction(model_spec, params, batch, config.rho)
    avg_mean, avg_stderr, n_used = loss_average_direction(
        model_spec, params, batch, config.rho, config.n_samples, seed)
    l_max = loss_worst_direction_estimate(
        model_spec, params, batch, config.rho,
        config.restarts, config.inner_steps, seed)
    gap = None
    if train_loss is not None and test_loss is not None:
        gap = generalization_gap(train_loss, test_loss)
    return SharpnessReport(
        base_loss=base,
        l_asc=l_asc,
        l_avg_mean=avg_mean,
        l_avg_stderr=avg_stderr,
        l_avg_samples=n_used,
        l_max_estimate=l_max,
        l_max_restarts=config.restarts,
        standardized_sharpness=l_asc - base,
        generalization_gap=gap,
        rho=config.rho,
        data_scope=data_scope,
    )
