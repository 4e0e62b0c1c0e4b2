"""Model specifications and loss/gradient evaluation.

Two model families are supported:

* `MlpSpec` — a dense multilayer perceptron (affine layers with relu or tanh
  activations) under a softmax-cross-entropy or mean-squared-error head.
* `QuadraticSpec` — a data-free diagonal quadratic bowl over its own
  parameters, used as an analytically tractable test surface for optimizers
  and sharpness probes.

`loss_and_grad` is a pure function of (spec, flat params, batch): the autodiff
graph is rebuilt on every call and no state leaks between evaluations.
"""

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from . import autodiff as ad
from .errors import LayoutError, NumericError, ShapeError
from .params import LayoutEntry, ParameterVector


class Batch(NamedTuple):
    """A slice of a dataset: float features (n, d) and integer labels (n,)."""

    features: np.ndarray
    labels: np.ndarray


class LossGradient(NamedTuple):
    """Scalar loss plus its exact reverse-mode gradient (flat, float64)."""

    value: float
    gradient: np.ndarray


@dataclass(frozen=True)
class MlpSpec:
    """Dense MLP: in_width -> hidden... -> out_width with the given head."""

    in_width: int
    hidden: tuple = ()
    out_width: int = 2
    activation: str = "relu"   # relu | tanh
    head: str = "softmax_ce"   # softmax_ce | mse

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.in_width < 1 or self.out_width < 1 or any(h < 1 for h in self.hidden):
            raise ValueError("all layer widths must be >= 1")
        if self.activation not in ("relu", "tanh"):
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.head not in ("softmax_ce", "mse"):
            raise ValueError(f"unknown head {self.head!r}")

    @property
    def widths(self) -> tuple:
        return (self.in_width,) + self.hidden + (self.out_width,)


@dataclass(frozen=True)
class QuadraticSpec:
    """L(w) = offset + 0.5 * sum_i diag[i] * w[i]^2; ignores the batch."""

    diag: tuple = (1.0, 1.0)
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "diag", tuple(float(d) for d in self.diag))
        if len(self.diag) < 1:
            raise ValueError("quadratic needs at least one coefficient")


ModelSpec = Union[MlpSpec, QuadraticSpec]


def param_layout(spec: ModelSpec) -> tuple:
    """Derive the flat parameter layout for a model spec."""
    if isinstance(spec, QuadraticSpec):
        return (LayoutEntry("coords", (len(spec.diag),), 0),)
    entries = []
    offset = 0
    widths = spec.widths
    for i in range(len(widths) - 1):
        fan_in, fan_out = widths[i], widths[i + 1]
        entries.append(LayoutEntry(f"dense{i}.weight", (fan_in, fan_out), offset))
        offset += fan_in * fan_out
        entries.append(LayoutEntry(f"dense{i}.bias", (fan_out,), offset))
        offset += fan_out
    return tuple(entries)


def param_count(spec: ModelSpec) -> int:
    layout = param_layout(spec)
    return layout[-1].offset + layout[-1].size


def init_params(spec: ModelSpec, rng: np.random.Generator) -> ParameterVector:
    """Initialize parameters: scaled-normal weights, zero biases.

    Weight scale is sqrt(2/fan_in) for relu and sqrt(1/fan_in) for tanh.
    Quadratic models start at all-ones (a generic off-minimum point).
    """
    layout = param_layout(spec)
    if isinstance(spec, QuadraticSpec):
        return ParameterVector(np.ones(len(spec.diag)), layout)
    flat = np.zeros(param_count(spec), dtype=np.float64)
    gain = 2.0 if spec.activation == "relu" else 1.0
    for entry in layout:
        if entry.name.endswith(".weight"):
            fan_in = entry.shape[0]
            std = np.sqrt(gain / fan_in)
            values = rng.standard_normal(entry.shape) * std
            flat[entry.offset:entry.offset + entry.size] = values.reshape(-1)
    return ParameterVector(flat, layout)


def _check_params(spec: ModelSpec, params) -> np.ndarray:
    flat = params.data if isinstance(params, ParameterVector) else np.asarray(params, dtype=np.float64)
    flat = flat.reshape(-1)
    expected = param_count(spec)
    if flat.shape[0] != expected:
        raise LayoutError(
            f"parameter count mismatch: model expects {expected}, got {flat.shape[0]}",
            expected_count=expected,
            found_count=flat.shape[0],
        )
    if not np.all(np.isfinite(flat)):
        raise NumericError("params")
    return flat


def _mlp_logits_node(spec: MlpSpec, flat: np.ndarray, features: np.ndarray):
    if features.ndim != 2 or features.shape[1] != spec.in_width:
        raise ShapeError("input", f"(n, {spec.in_width})", features.shape)
    layout = param_layout(spec)
    slots = {e.name: e for e in layout}
    param_leaves = []
    x = ad.leaf(features, name="input")
    n_layers = len(spec.widths) - 1
    for i in range(n_layers):
        w_entry, b_entry = slots[f"dense{i}.weight"], slots[f"dense{i}.bias"]
        w = ad.leaf(flat[w_entry.offset:w_entry.offset + w_entry.size].reshape(w_entry.shape),
                    name=w_entry.name)
        b = ad.leaf(flat[b_entry.offset:b_entry.offset + b_entry.size], name=b_entry.name)
        param_leaves.extend([(w_entry, w), (b_entry, b)])
        x = ad.add_bias(ad.matmul(x, w, name=f"dense{i}"), b, name=f"dense{i}.bias_add")
        if i < n_layers - 1:
            x = ad.relu(x, name=f"{spec.activation}{i}") if spec.activation == "relu" \
                else ad.tanh(x, name=f"{spec.activation}{i}")
    return x, param_leaves


def _one_hot(labels: np.ndarray, width: int) -> np.ndarray:
    out = np.zeros((labels.shape[0], width), dtype=np.float64)
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def _build_loss(spec: ModelSpec, flat: np.ndarray, batch):
    """Construct the scalar loss node; shared by forward and loss_and_grad.

    Returns the loss node plus the (layout entry, leaf node) pairs needed to
    reassemble a flat gradient after a backward pass.
    """
    if isinstance(spec, QuadraticSpec):
        w = ad.leaf(flat, name="coords")
        sq = ad.mul(w, w, name="square")
        weighted = ad.scale_const(sq, 0.5 * np.asarray(spec.diag), name="halved")
        loss = ad.sum_all(weighted, name="quadratic_loss")
        if spec.offset != 0.0:
            loss = ad.add_const(loss, spec.offset, name="offset")
        return loss, [(param_layout(spec)[0], w)]
    features = np.asarray(batch.features, dtype=np.float64)
    labels = np.asarray(batch.labels)
    if not np.all(np.isfinite(features)):
        raise NumericError("batch features")
    logits, param_leaves = _mlp_logits_node(spec, flat, features)
    if spec.head == "softmax_ce":
        loss = ad.softmax_cross_entropy(logits, labels)
    else:
        loss = ad.mean_squared_error(logits, _one_hot(labels, spec.out_width))
    return loss, param_leaves


def forward(spec: ModelSpec, params, batch) -> float:
    """Mean loss of the model on a batch (cross-entropy or MSE per spec)."""
    flat = _check_params(spec, params)
    loss, _ = _build_loss(spec, flat, batch)
    return float(loss.value)


def loss_and_grad(spec: ModelSpec, params, batch) -> LossGradient:
    """Loss and its exact reverse-mode gradient w.r.t. the flat parameters."""
    flat = _check_params(spec, params)
    loss, param_leaves = _build_loss(spec, flat, batch)
    ad.backward(loss)
    grad = np.zeros_like(flat)
    for entry, node in param_leaves:
        grad[entry.offset:entry.offset + entry.size] = node.grad.reshape(-1)
    return LossGradient(float(loss.value), grad)


def predict_logits(spec: MlpSpec, params, features: np.ndarray) -> np.ndarray:
    """Plain forward pass to the head inputs (no tape, no loss)."""
    if isinstance(spec, QuadraticSpec):
        raise ShapeError("predict_logits", "an MLP spec", "QuadraticSpec")
    flat = _check_params(spec, params)
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != spec.in_width:
        raise ShapeError("input", f"(n, {spec.in_width})", features.shape)
    x = features
    layout = param_layout(spec)
    slots = {e.name: e for e in layout}
    n_layers = len(spec.widths) - 1
    for i in range(n_layers):
        w_entry, b_entry = slots[f"dense{i}.weight"], slots[f"dense{i}.bias"]
        w = flat[w_entry.offset:w_entry.offset + w_entry.size].reshape(w_entry.shape)
        b = flat[b_entry.offset:b_entry.offset + b_entry.size]
        x = x @ w + b
        if i < n_layers - 1:
            x = np.maximum(x, 0.0) if spec.activation == "relu" else np.tanh(x)
    if not np.all(np.isfinite(x)):
        raise NumericError("predict_logits")
    return x


def accuracy(spec: MlpSpec, params, batch) -> float:
    """Fraction of batch examples whose argmax output matches the label."""
    logits = predict_logits(spec, params, batch.features)
    return float(np.mean(np.argmax(logits, axis=1) == np.asarray(batch.labels)))
