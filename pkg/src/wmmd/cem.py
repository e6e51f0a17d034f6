"""Classification-EM trainer: pseudo-labeling, class-weight estimation, and
mini-batch SGD on the weighted-MMD-regularized objective.

Each epoch alternates three steps:

* E-step: class posteriors for every target sample from the current softmax
  classifier.
* C-step: hard pseudo-labels by maximum posterior (ties to the lowest class
  index) and auxiliary weights ``alpha_c = (w_t_c + eps) / (w_s_c + eps)``
  from the pseudo-label frequencies.
* M-step: one epoch of shuffled mini-batch SGD with momentum on the combined
  objective, with pseudo-labels and alphas frozen.

Alphas start at 1 for every class, so the first epoch's regularizer is the
plain unweighted MMD; the first re-estimate takes effect in epoch 2.
Kernel bandwidths are refreshed at each epoch start: the configured bandwidth
factors are multiplied by the median pairwise distance of the current
source+target activations at every tap layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .exceptions import DataError, ParameterError, ShapeError
from .kernels import KernelSpec, default_factor_spec, median_heuristic
from .mmd import AuxWeights, as_labels
from .model import (LossTerms, ModelConfig, ModelParams, backward,
                    forward, loss_terms)
from .numerics import Gradients, as_matrix

# Tradeoff grids searched in the sweep experiments.
LAMBDA_GRID = (0.0, 0.03, 0.07, 0.1, 0.4, 0.7, 1.0, 1.4, 1.7, 2.0)
GAMMA_GRID = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters. ``lam`` weights the WMMD regularizer and
    ``gamma`` the target pseudo-label loss."""

    lam: float = 0.4
    gamma: float = 0.2
    batch_size: int = 32
    epochs: int = 30
    learning_rate: float = 0.05
    momentum: float = 0.9
    seed: int = 0
    alpha_smoothing: float = 1e-3

    def __post_init__(self):
        if self.lam < 0 or self.gamma < 0:
            raise ParameterError("lam and gamma must be nonnegative")
        if self.batch_size < 2 or self.batch_size % 2:
            raise ParameterError("batch_size must be even and at least 2")
        if self.epochs < 1:
            raise ParameterError("epochs must be at least 1")
        if self.learning_rate < 0:
            raise ParameterError("learning_rate must be nonnegative")
        if not 0 <= self.momentum < 1:
            raise ParameterError("momentum must lie in [0, 1)")
        if self.alpha_smoothing < 0:
            raise ParameterError("alpha_smoothing must be nonnegative")


@dataclass
class EpochRecord:
    """One line of the run log: loss breakdown, alphas, and (when labels are
    held for evaluation) target accuracy."""

    epoch: int
    loss: float
    source_ce: float
    target_ce: float
    wmmd: float
    alphas: np.ndarray
    target_accuracy: float | None = None


@dataclass
class TrainState:
    """Mutable training state threaded through the E/C/M steps."""

    params: ModelParams
    weights: AuxWeights
    pseudo_labels: np.ndarray
    epoch: int
    loss_history: list[float] = field(default_factory=list)
    alpha_history: list[np.ndarray] = field(default_factory=list)
    records: list[EpochRecord] = field(default_factory=list)
    velocity: Gradients | None = None
    rng_src: np.random.Generator | None = None
    rng_tgt: np.random.Generator | None = None


def _features(x) -> np.ndarray:
    if isinstance(x, Dataset):
        return x.features
    return as_matrix(x, "features")


def _labeled(x) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(x, Dataset):
        if x.labels is None:
            raise DataError("labeled dataset required")
        return x.features, x.labels
    feats, labels = x
    return as_matrix(feats, "features"), as_labels(labels)


def estimate_source_priors(src_labels, class_count: int | None = None) -> np.ndarray:
    """Empirical class frequencies of the source labels. Classes absent from
    the sample get prior 0."""
    labels = as_labels(src_labels, class_count)
    if labels.size == 0:
        raise DataError("cannot estimate priors from an empty label set")
    c = class_count if class_count is not None else int(labels.max()) + 1
    return np.bincount(labels, minlength=c) / labels.size


def e_step(params: ModelParams, tgt) -> np.ndarray:
    """Target class posteriors: the softmax output, one row per sample."""
    return forward(params, _features(tgt)).probs


def c_step(posteriors, source_priors, smoothing: float = 0.0
           ) -> tuple[np.ndarray, AuxWeights]:
    """Assign pseudo-labels by maximum posterior and re-estimate auxiliary
    weights from their frequencies.

    Ties in the argmax break toward the lowest class index. With zero
    smoothing a class absent from the pseudo-labels gets alpha 0.
    """
    post = as_matrix(posteriors, "posteriors")
    sp = np.asarray(source_priors, dtype=np.float64)
    if post.shape[1] != sp.shape[0]:
        raise ShapeError(f"posterior columns ({post.shape[1]}) must match "
                         f"class count ({sp.shape[0]})")
    pseudo = np.argmax(post, axis=1)
    target_priors = np.bincount(pseudo, minlength=sp.shape[0]) / post.shape[0]
    weights = AuxWeights.from_priors(sp, target_priors, smoothing=smoothing)
    return pseudo, weights


def _sgd_update(params: ModelParams, velocity: Gradients, grads: Gradients,
                lr: float, momentum: float) -> None:
    for j in range(len(params.weights)):
        velocity.weights[j] *= momentum
        velocity.weights[j] -= lr * grads.weights[j]
        params.weights[j] += velocity.weights[j]
        velocity.biases[j] *= momentum
        velocity.biases[j] -= lr * grads.biases[j]
        params.biases[j] += velocity.biases[j]


def m_step(state: TrainState, src, tgt, config: TrainConfig, spec) -> LossTerms:
    """One epoch of shuffled mini-batch SGD with momentum.

    Pseudo-labels and alphas stay fixed for the whole epoch. Batches pair
    equal, even-sized draws from both domains; a trailing remainder smaller
    than 2 per domain is dropped. Returns the mean per-batch loss terms
    (evaluated before each update).
    """
    feats_s, labels_s = _labeled(src)
    feats_t = _features(tgt)
    m, n = feats_s.shape[0], feats_t.shape[0]
    common = min(m, n)
    if common < 2:
        raise DataError(f"cannot build batches from {m} source / {n} target samples")
    if state.velocity is None:
        state.velocity = state.params.zero_gradients()
    rng_src = state.rng_src if state.rng_src is not None else np.random.default_rng(config.seed)
    rng_tgt = state.rng_tgt if state.rng_tgt is not None else rng_src
    perm_s = rng_src.permutation(m)
    perm_t = rng_tgt.permutation(n)

    sums = np.zeros(4)
    batches = 0
    for start in range(0, common, config.batch_size):
        take = min(config.batch_size, common - start)
        take -= take % 2
        if take < 2:
            break
        si = perm_s[start:start + take]
        ti = perm_t[start:start + take]
        bx_s, by_s = feats_s[si], labels_s[si]
        bx_t, bp_t = feats_t[ti], state.pseudo_labels[ti]
        src_trace = forward(state.params, bx_s)
        tgt_trace = forward(state.params, bx_t)
        terms = loss_terms(state.params, bx_s, by_s, bx_t, bp_t, state.weights,
                           spec, config.lam, config.gamma,
                           src_trace=src_trace, tgt_trace=tgt_trace)
        grads = backward(state.params, src_trace, by_s, tgt_trace, bp_t,
                         state.weights, spec, config.lam, config.gamma)
        _sgd_update(state.params, state.velocity, grads,
                    config.learning_rate, config.momentum)
        sums += (terms.source_ce, terms.target_ce, terms.wmmd, terms.total)
        batches += 1
    means = sums / batches
    return LossTerms(*means)


def _layer_kernel_specs(params: ModelParams, feats_s, feats_t,
                        factors: KernelSpec) -> dict[int, KernelSpec]:
    """Per-tap-layer kernel specs: bandwidth factors scaled by the median
    pairwise distance of the pooled current activations."""
    cfg = params.config
    src_trace = forward(params, feats_s)
    tgt_trace = forward(params, feats_t)
    specs = {}
    for layer in cfg.tap_layers:
        pooled = np.vstack([src_trace.tap_features(layer),
                            tgt_trace.tap_features(layer)])
        specs[layer] = factors.scaled(median_heuristic(pooled))
    return specs


def train(src, tgt, model_config: ModelConfig, train_config: TrainConfig,
          kernel_factors: KernelSpec | None = None, freeze_alpha: bool = False,
          eval_target_labels=None) -> TrainState:
    """Run the full E/C/M loop on a labeled source set and unlabeled target
    features.

    ``kernel_factors`` holds *relative* bandwidths (multiples of the
    per-epoch median activation distance at each tap layer); default is the
    five-factor family with uniform weights. ``freeze_alpha`` keeps all
    alphas at 1 for every epoch (the unweighted-MMD ablation arm).
    ``eval_target_labels`` is used only to log per-epoch target accuracy;
    it never influences an update.

    After the last epoch the pseudo-labels and weights are refreshed once
    from the final model, so the returned state is self-consistent; the
    per-epoch records keep the values each M-step actually used.
    """
    feats_s, labels_s = _labeled(src)
    feats_t = _features(tgt)
    cfg = model_config
    labels_s = as_labels(labels_s, cfg.class_count)
    source_priors = estimate_source_priors(labels_s, cfg.class_count)
    if eval_target_labels is not None:
        eval_target_labels = as_labels(eval_target_labels, cfg.class_count)

    init_ss, src_ss, tgt_ss = np.random.SeedSequence(train_config.seed).spawn(3)
    params = ModelParams.init(cfg, init_ss)
    factors = kernel_factors if kernel_factors is not None else default_factor_spec()
    state = TrainState(
        params=params,
        weights=AuxWeights.unit(source_priors),
        pseudo_labels=np.zeros(feats_t.shape[0], dtype=np.int64),
        epoch=0,
        velocity=params.zero_gradients(),
        rng_src=np.random.default_rng(src_ss),
        rng_tgt=np.random.default_rng(tgt_ss),
    )

    for epoch in range(1, train_config.epochs + 1):
        posteriors = e_step(state.params, feats_t)
        pseudo, estimated = c_step(posteriors, source_priors,
                                   train_config.alpha_smoothing)
        state.pseudo_labels = pseudo
        if freeze_alpha or epoch == 1:
            state.weights = AuxWeights.unit(source_priors)
        else:
            state.weights = estimated

        if train_config.lam != 0.0:
            spec = _layer_kernel_specs(state.params, feats_s, feats_t, factors)
        else:
            spec = factors  # regularizer off; spec is never evaluated
        terms = m_step(state, (feats_s, labels_s), feats_t, train_config, spec)

        state.epoch = epoch
        state.loss_history.append(terms.total)
        state.alpha_history.append(state.weights.alphas.copy())
        accuracy = None
        if eval_target_labels is not None:
            preds = np.argmax(e_step(state.params, feats_t), axis=1)
            accuracy = float(np.mean(preds == eval_target_labels))
        state.records.append(EpochRecord(
            epoch=epoch, loss=terms.total, source_ce=terms.source_ce,
            target_ce=terms.target_ce, wmmd=terms.wmmd,
            alphas=state.weights.alphas.copy(), target_accuracy=accuracy))

    # One trailing E/C refresh so the returned pseudo-labels and weights are
    # consistent with the returned parameters instead of one epoch stale.
    posteriors = e_step(state.params, feats_t)
    pseudo, estimated = c_step(posteriors, source_priors,
                               train_config.alpha_smoothing)
    state.pseudo_labels = pseudo
    if not freeze_alpha:
        state.weights = estimated
    return state


@dataclass(frozen=True)
class EvalResult:
    accuracy: float
    confusion: np.ndarray


def evaluate(params: ModelParams, dataset: Dataset) -> EvalResult:
    """Argmax-prediction accuracy and a class-by-class confusion matrix
    (rows: true class, columns: predicted class)."""
    if dataset.labels is None:
        raise DataError("evaluation requires a labeled dataset")
    if dataset.n == 0:
        raise DataError("cannot evaluate on an empty dataset")
    c = params.config.class_count
    labels = as_labels(dataset.labels, c)
    preds = np.argmax(forward(params, dataset.features).probs, axis=1)
    confusion = np.zeros((c, c), dtype=np.int64)
    np.add.at(confusion, (labels, preds), 1)
    return EvalResult(float(np.mean(preds == labels)), confusion)
