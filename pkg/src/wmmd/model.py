"""Feedforward softmax classifier with designated "tap" layers.

The network is a small multilayer perceptron. Its layers are numbered from 1;
layers 1..H are hidden (affine + activation) and layer H+1 produces logits.
Tap layers are the contiguous range of layers whose activations feed the
weighted-MMD regularizers; by convention the activation of a hidden layer is
its post-nonlinearity output and the activation of the final layer is the
logits.

The training objective combines three terms:

    mean source cross-entropy
    + gamma * mean target cross-entropy against pseudo-labels
    + lambda * sum over tap layers of the linear-time weighted MMD
      between source and target activations at that layer

``backward`` returns the exact gradient of this objective, combining softmax
cross-entropy backpropagation with the quad-tuple kernel gradients injected
at every tap layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import mmd
from .exceptions import ParameterError, ShapeError
from .kernels import KernelSpec
from .numerics import LOG_FLOOR, Gradients, as_matrix, softmax

CHECKPOINT_VERSION = 1


def _relu(a):
    return np.maximum(a, 0.0)


def _relu_deriv(a):
    return (a > 0.0).astype(np.float64)


def _tanh_deriv(a):
    t = np.tanh(a)
    return 1.0 - t * t


ACTIVATIONS = {
    "relu": (_relu, _relu_deriv),
    "tanh": (np.tanh, _tanh_deriv),
}


@dataclass(frozen=True)
class ModelConfig:
    """Architecture description: layer widths, tap range, activation."""

    input_dim: int
    hidden_dims: tuple[int, ...]
    class_count: int
    tap_layers: tuple[int, ...]
    activation: str = "relu"

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(d) for d in self.hidden_dims))
        object.__setattr__(self, "tap_layers", tuple(int(t) for t in self.tap_layers))
        if self.input_dim < 1 or self.class_count < 1:
            raise ParameterError("input_dim and class_count must be positive")
        if any(d < 1 for d in self.hidden_dims):
            raise ParameterError("hidden layer widths must be positive")
        if self.activation not in ACTIVATIONS:
            raise ParameterError(f"unknown activation {self.activation!r}")
        taps = self.tap_layers
        if not taps:
            raise ParameterError("tap_layers must be non-empty")
        if list(taps) != list(range(taps[0], taps[-1] + 1)):
            raise ParameterError(f"tap_layers must be contiguous, got {taps}")
        if taps[0] < 1 or taps[-1] > self.layer_count:
            raise ParameterError(
                f"tap_layers {taps} outside layer range 1..{self.layer_count}")

    @property
    def layer_count(self) -> int:
        return len(self.hidden_dims) + 1

    @property
    def layer_dims(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden_dims, self.class_count)

    @classmethod
    def default(cls, input_dim: int, class_count: int,
                hidden_dims: tuple[int, ...] = (64, 32),
                activation: str = "relu") -> "ModelConfig":
        """Two hidden layers with taps on the last hidden layer and the
        logits layer (the highest layers of the network)."""
        n_layers = len(hidden_dims) + 1
        taps = (n_layers,) if n_layers == 1 else (n_layers - 1, n_layers)
        return cls(input_dim, tuple(hidden_dims), class_count, taps, activation)


@dataclass
class ModelParams:
    """Per-layer weight matrices and bias vectors, plus the architecture
    they belong to."""

    config: ModelConfig
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        dims = self.config.layer_dims
        expected = [(dims[j], dims[j + 1]) for j in range(self.config.layer_count)]
        got_w = [w.shape for w in self.weights]
        got_b = [b.shape for b in self.biases]
        if got_w != expected or got_b != [(dims[j + 1],) for j in range(self.config.layer_count)]:
            raise ShapeError(f"parameter shapes {got_w}/{got_b} do not match config dims {dims}")

    @classmethod
    def init(cls, config: ModelConfig, seed: int) -> "ModelParams":
        """Seeded uniform init in [-s, s], s = sqrt(6 / (fan_in + fan_out));
        biases start at zero."""
        rng = np.random.default_rng(seed)
        dims = config.layer_dims
        weights, biases = [], []
        for j in range(config.layer_count):
            fan_in, fan_out = dims[j], dims[j + 1]
            s = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-s, s, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(config, weights, biases)

    @classmethod
    def zeros(cls, config: ModelConfig) -> "ModelParams":
        dims = config.layer_dims
        return cls(config,
                   [np.zeros((dims[j], dims[j + 1])) for j in range(config.layer_count)],
                   [np.zeros(dims[j + 1]) for j in range(config.layer_count)])

    def copy(self) -> "ModelParams":
        return ModelParams(self.config,
                           [w.copy() for w in self.weights],
                           [b.copy() for b in self.biases])

    def zero_gradients(self) -> Gradients:
        return Gradients.zeros_like(self.weights, self.biases)


@dataclass
class ForwardTrace:
    """Everything the backward pass needs: the input, every layer's output
    (post-activation; logits for the final layer), the pre-activations, and
    the softmax probabilities."""

    activations: list[np.ndarray]
    pre_activations: list[np.ndarray]
    probs: np.ndarray

    def tap_features(self, layer: int) -> np.ndarray:
        return self.activations[layer]


def forward(params: ModelParams, batch) -> ForwardTrace:
    """Run the network on a batch of rows."""
    cfg = params.config
    x = as_matrix(batch, "batch")
    if x.shape[1] != cfg.input_dim:
        raise ShapeError(f"batch has {x.shape[1]} features, model expects {cfg.input_dim}")
    act_fn, _ = ACTIVATIONS[cfg.activation]
    activations = [x]
    pre_activations = []
    h = x
    last = cfg.layer_count - 1
    for j in range(cfg.layer_count):
        a = h @ params.weights[j] + params.biases[j]
        pre_activations.append(a)
        h = a if j == last else act_fn(a)
        activations.append(h)
    return ForwardTrace(activations, pre_activations, softmax(h))


def _onehot(labels: np.ndarray, class_count: int) -> np.ndarray:
    out = np.zeros((labels.shape[0], class_count))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def _mean_cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    picked = probs[np.arange(labels.shape[0]), labels]
    return float(-np.log(np.maximum(picked, LOG_FLOOR)).mean())


def _layer_specs(cfg: ModelConfig, spec) -> dict[int, KernelSpec]:
    """Accept one KernelSpec for all taps or a per-tap-layer mapping."""
    if isinstance(spec, KernelSpec):
        return {layer: spec for layer in cfg.tap_layers}
    missing = [layer for layer in cfg.tap_layers if layer not in spec]
    if missing:
        raise ParameterError(f"no kernel spec given for tap layers {missing}")
    return dict(spec)


@dataclass(frozen=True)
class LossTerms:
    """The three objective terms before their tradeoff factors are applied,
    plus the combined total."""

    source_ce: float
    target_ce: float
    wmmd: float
    total: float


def loss_terms(params: ModelParams, src_batch, src_labels, tgt_batch, tgt_pseudo,
               weights: mmd.AuxWeights, spec, lam: float, gamma: float,
               src_trace: ForwardTrace | None = None,
               tgt_trace: ForwardTrace | None = None) -> LossTerms:
    """Evaluate the objective and its per-term breakdown.

    ``spec`` is a KernelSpec applied at every tap layer, or a mapping from
    tap layer index to KernelSpec. Precomputed traces may be passed to avoid
    repeating the forward passes.
    """
    cfg = params.config
    src_trace = src_trace or forward(params, src_batch)
    tgt_trace = tgt_trace or forward(params, tgt_batch)
    src_labels = mmd.as_labels(src_labels, cfg.class_count)
    tgt_pseudo = mmd.as_labels(tgt_pseudo, cfg.class_count)
    if src_labels.shape[0] != src_trace.probs.shape[0]:
        raise ShapeError("src_labels length must match source batch")
    if tgt_pseudo.shape[0] != tgt_trace.probs.shape[0]:
        raise ShapeError("every target sample needs a pseudo-label")

    src_ce = _mean_cross_entropy(src_trace.probs, src_labels)
    tgt_ce = _mean_cross_entropy(tgt_trace.probs, tgt_pseudo)
    reg = 0.0
    if lam != 0.0:
        specs = _layer_specs(cfg, spec)
        for layer in cfg.tap_layers:
            reg += mmd.wmmd2_linear(src_trace.tap_features(layer), src_labels,
                                    tgt_trace.tap_features(layer), weights,
                                    specs[layer])
    total = src_ce + gamma * tgt_ce + lam * reg
    return LossTerms(src_ce, tgt_ce, reg, total)


def loss(params: ModelParams, src_batch, src_labels, tgt_batch, tgt_pseudo,
         weights: mmd.AuxWeights, spec, lam: float, gamma: float) -> float:
    return loss_terms(params, src_batch, src_labels, tgt_batch, tgt_pseudo,
                      weights, spec, lam, gamma).total


def _backprop(grads: Gradients, params: ModelParams, trace: ForwardTrace,
              logit_grad: np.ndarray, tap_grads: dict[int, np.ndarray]) -> None:
    """Accumulate parameter gradients for one domain's trace.

    ``logit_grad`` is dLoss/dlogits; ``tap_grads`` maps a tap layer to the
    extra dLoss/dactivation injected there.
    """
    cfg = params.config
    _, act_deriv = ACTIVATIONS[cfg.activation]
    last = cfg.layer_count - 1
    g_h = logit_grad
    if cfg.layer_count in tap_grads:
        g_h = g_h + tap_grads[cfg.layer_count]
    for j in range(last, -1, -1):
        g_a = g_h if j == last else g_h * act_deriv(trace.pre_activations[j])
        grads.weights[j] += trace.activations[j].T @ g_a
        grads.biases[j] += g_a.sum(axis=0)
        if j > 0:
            g_h = g_a @ params.weights[j].T
            if j in tap_grads:
                g_h = g_h + tap_grads[j]


def backward(params: ModelParams, src_trace: ForwardTrace, src_labels,
             tgt_trace: ForwardTrace, tgt_pseudo, weights: mmd.AuxWeights,
             spec, lam: float, gamma: float) -> Gradients:
    """Exact gradient of the full objective for the given forward traces.

    The cross-entropy gradients enter at the logits; the weighted-MMD kernel
    gradients enter at each tap layer for both domains and flow down through
    the shared backbone. The log floor in the loss is ignored (it is inactive
    for any probability above 1e-12).
    """
    cfg = params.config
    src_labels = mmd.as_labels(src_labels, cfg.class_count)
    tgt_pseudo = mmd.as_labels(tgt_pseudo, cfg.class_count)
    m = src_trace.probs.shape[0]
    n = tgt_trace.probs.shape[0]

    src_logit_grad = (src_trace.probs - _onehot(src_labels, cfg.class_count)) / m
    tgt_logit_grad = (gamma / n) * (tgt_trace.probs - _onehot(tgt_pseudo, cfg.class_count))

    src_taps: dict[int, np.ndarray] = {}
    tgt_taps: dict[int, np.ndarray] = {}
    if lam != 0.0:
        specs = _layer_specs(cfg, spec)
        for layer in cfg.tap_layers:
            g_src, g_tgt = mmd.wmmd2_linear_feature_grads(
                src_trace.tap_features(layer), src_labels,
                tgt_trace.tap_features(layer), weights, specs[layer])
            src_taps[layer] = lam * g_src
            tgt_taps[layer] = lam * g_tgt

    grads = params.zero_gradients()
    _backprop(grads, params, src_trace, src_logit_grad, src_taps)
    _backprop(grads, params, tgt_trace, tgt_logit_grad, tgt_taps)
    return grads


# ---------------------------------------------------------------------------
# Checkpointing
# ---------------------------------------------------------------------------

def save_params(path, params: ModelParams) -> None:
    """Write a versioned checkpoint; float64 values round-trip bit-exactly."""
    cfg = params.config
    payload = {
        "format_version": np.array(CHECKPOINT_VERSION),
        "input_dim": np.array(cfg.input_dim),
        "hidden_dims": np.array(cfg.hidden_dims, dtype=np.int64),
        "class_count": np.array(cfg.class_count),
        "tap_layers": np.array(cfg.tap_layers, dtype=np.int64),
        "activation": np.array(cfg.activation),
    }
    for j, (w, b) in enumerate(zip(params.weights, params.biases)):
        payload[f"W{j}"] = w
        payload[f"b{j}"] = b
    np.savez(path, **payload)


def load_params(path) -> ModelParams:
    path = Path(path)
    with np.load(path, allow_pickle=False) as data:
        version = int(data["format_version"])
        if version != CHECKPOINT_VERSION:
            raise ParameterError(f"unsupported checkpoint version {version}")
        cfg = ModelConfig(
            input_dim=int(data["input_dim"]),
            hidden_dims=tuple(int(d) for d in data["hidden_dims"]),
            class_count=int(data["class_count"]),
            tap_layers=tuple(int(t) for t in data["tap_layers"]),
            activation=str(data["activation"]),
        )
        weights = [data[f"W{j}"].copy() for j in range(cfg.layer_count)]
        biases = [data[f"b{j}"].copy() for j in range(cfg.layer_count)]
    return ModelParams(cfg, weights, biases)
