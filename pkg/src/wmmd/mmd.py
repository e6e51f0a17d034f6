"""Squared maximum mean discrepancy estimators, plain and class-reweighted.

Four estimators are provided:

* ``mmd2_quadratic``   - all-pairs estimate of MMD^2 between two samples
* ``mmd2_linear``      - linear-time estimate built from quad-tuple h-statistics
* ``wmmd2_quadratic``  - all-pairs estimate with per-class source weights
* ``wmmd2_linear``     - linear-time weighted estimate (the training form)

The weighted variants compare the target sample against a *reweighted* source
distribution in which class c carries weight ``alpha_c`` times its source
prior. With all alphas equal to 1 they reduce exactly to the unweighted
estimators.

Quadratic forms are squared RKHS norms, so tiny negative values (float noise)
are clamped to zero on return. The linear forms are unbiased h-statistic
averages and may legitimately be negative; they are reported as-is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .exceptions import (DataError, DegenerateWeightsError, LabelError,
                         ShapeError)
from .kernels import KernelSpec
from .numerics import as_matrix, as_vector


@dataclass(frozen=True)
class QuadTuple:
    """Two source and two target feature vectors, the unit of the linear-time
    estimators. Source labels are required by the weighted operator; target
    pseudo-labels are carried for bookkeeping only."""

    xs1: np.ndarray
    xs2: np.ndarray
    xt1: np.ndarray
    xt2: np.ndarray
    ys1: int | None = None
    ys2: int | None = None
    yt1: int | None = None
    yt2: int | None = None

    def __post_init__(self):
        vecs = [as_vector(v, n) for v, n in
                [(self.xs1, "xs1"), (self.xs2, "xs2"), (self.xt1, "xt1"), (self.xt2, "xt2")]]
        dims = {v.shape[0] for v in vecs}
        if len(dims) != 1:
            raise ShapeError(f"quad-tuple vectors must share a dimension, got {sorted(dims)}")
        for name in ("xs1", "xs2", "xt1", "xt2"):
            object.__setattr__(self, name, as_vector(getattr(self, name), name))
        for name in ("ys1", "ys2", "yt1", "yt2"):
            lab = getattr(self, name)
            if lab is not None and int(lab) < 0:
                raise LabelError(f"{name} must be nonnegative, got {lab}")


@dataclass(frozen=True)
class AuxWeights:
    """Per-class auxiliary weights together with the priors they came from.

    ``alphas[c]`` is the ratio of the (estimated) target prior to the source
    prior for class c, optionally smoothed. Both prior vectors must be
    nonnegative and sum to 1; alphas must be nonnegative.
    """

    source_priors: np.ndarray
    target_priors: np.ndarray
    alphas: np.ndarray

    def __post_init__(self):
        sp = as_vector(self.source_priors, "source_priors")
        tp = as_vector(self.target_priors, "target_priors")
        al = as_vector(self.alphas, "alphas")
        if not (sp.shape == tp.shape == al.shape):
            raise ShapeError("source_priors, target_priors and alphas must share a length")
        for name, vec in [("source_priors", sp), ("target_priors", tp)]:
            if np.any(vec < 0):
                raise DegenerateWeightsError(f"{name} must be nonnegative")
            if abs(vec.sum() - 1.0) > 1e-9:
                raise DegenerateWeightsError(f"{name} must sum to 1, got {vec.sum()!r}")
        if np.any(al < 0):
            raise DegenerateWeightsError("alphas must be nonnegative")
        object.__setattr__(self, "source_priors", sp)
        object.__setattr__(self, "target_priors", tp)
        object.__setattr__(self, "alphas", al)

    @property
    def class_count(self) -> int:
        return self.alphas.shape[0]

    @classmethod
    def unit(cls, source_priors) -> "AuxWeights":
        """All-ones alphas: the unweighted (initialization) state."""
        sp = as_vector(source_priors, "source_priors")
        return cls(sp, sp.copy(), np.ones_like(sp))

    @classmethod
    def from_priors(cls, source_priors, target_priors,
                    smoothing: float = 0.0) -> "AuxWeights":
        """Ratio weights alpha_c = (w_t_c + eps) / (w_s_c + eps).

        With ``smoothing`` zero this is the exact prior ratio; a class with
        zero source prior is then only admissible if it also has zero target
        mass (its alpha is set to 0).
        """
        sp = as_vector(source_priors, "source_priors")
        tp = as_vector(target_priors, "target_priors")
        if sp.shape != tp.shape:
            raise ShapeError("prior vectors must share a length")
        if smoothing < 0:
            raise DegenerateWeightsError("smoothing must be nonnegative")
        num = tp + smoothing
        den = sp + smoothing
        alphas = np.zeros_like(sp)
        for c in range(sp.shape[0]):
            if den[c] > 0:
                alphas[c] = num[c] / den[c]
            elif num[c] > 0:
                raise DegenerateWeightsError(
                    f"class {c} has target mass but zero source prior and no smoothing")
        return cls(sp, tp, alphas)

    def sample_alphas(self, labels) -> np.ndarray:
        """Per-sample alphas via label lookup; rejects out-of-range labels."""
        labels = as_labels(labels, self.class_count)
        return self.alphas[labels]


def as_labels(labels, class_count: int | None = None) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise ShapeError(f"labels must be 1-d, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        cast = arr.astype(np.int64)
        if np.any(cast != arr):
            raise LabelError("labels must be integers")
        arr = cast
    if arr.size and arr.min() < 0:
        raise LabelError("labels must be nonnegative")
    if class_count is not None and arr.size and arr.max() >= class_count:
        raise LabelError(f"label {arr.max()} out of range for {class_count} classes")
    return arr


def _check_pair(src, tgt) -> tuple[np.ndarray, np.ndarray]:
    src = as_matrix(src, "src")
    tgt = as_matrix(tgt, "tgt")
    if src.shape[1] != tgt.shape[1]:
        raise ShapeError(f"feature dims differ ({src.shape[1]} vs {tgt.shape[1]})")
    if src.shape[0] < 1 or tgt.shape[0] < 1:
        raise DataError("each domain needs at least one sample")
    return src, tgt


def truncated_even_count(m: int, n: int) -> int:
    """Common even sample count used by the linear estimators."""
    common = min(m, n)
    common -= common % 2
    if common < 2:
        raise DataError(f"linear estimator needs at least 2 samples per domain, got {m} and {n}")
    return common


def renormalize_alphas(weights: AuxWeights, labels) -> np.ndarray:
    """Per-batch alpha rescaling for the linear weighted estimator.

    Returns per-sample alphas divided by their batch mean, so the mean weight
    is exactly 1 (the population expectation of the prior ratio). Raises when
    every sample in the batch has zero weight.
    """
    a = weights.sample_alphas(labels)
    mean = a.mean()
    if mean <= 0:
        raise DegenerateWeightsError("all per-sample alphas vanish in this batch")
    return a / mean


# ---------------------------------------------------------------------------
# Unweighted estimators
# ---------------------------------------------------------------------------

def mmd2_quadratic(src, tgt, spec: KernelSpec) -> float:
    """All-pairs squared MMD between two samples (biased / V-statistic form).

    Expands the squared distance of the two mean embeddings through the
    kernel; the result is a squared norm, clamped at zero against float
    noise.
    """
    src, tgt = _check_pair(src, tgt)
    k_ss = kernels.gram(src, src, spec).mean()
    k_tt = kernels.gram(tgt, tgt, spec).mean()
    k_st = kernels.gram(src, tgt, spec).mean()
    return max(float(k_ss + k_tt - 2.0 * k_st), 0.0)


def mmd2_quadratic_unbiased(src, tgt, spec: KernelSpec) -> float:
    """All-pairs U-statistic estimate of squared MMD (diagonal terms removed).

    Unbiased for the population value, hence may be negative; used as the
    reference in the linear-estimator expectation checks.
    """
    src, tgt = _check_pair(src, tgt)
    m, n = src.shape[0], tgt.shape[0]
    if m < 2 or n < 2:
        raise DataError("unbiased quadratic estimator needs at least 2 samples per domain")
    k_ss = kernels.gram(src, src, spec)
    k_tt = kernels.gram(tgt, tgt, spec)
    k_st = kernels.gram(src, tgt, spec)
    ss = (k_ss.sum() - np.trace(k_ss)) / (m * (m - 1))
    tt = (k_tt.sum() - np.trace(k_tt)) / (n * (n - 1))
    return float(ss + tt - 2.0 * k_st.mean())


def h_l(z: QuadTuple, spec: KernelSpec) -> float:
    """Quad-tuple h-statistic: within-domain similarities minus cross terms."""
    multi = kernels.multi_kernel
    return (multi(z.xs1, z.xs2, spec) + multi(z.xt1, z.xt2, spec)
            - multi(z.xs1, z.xt2, spec) - multi(z.xs2, z.xt1, spec))


def mmd2_linear(src, tgt, spec: KernelSpec) -> float:
    """Linear-time squared-MMD estimate over non-overlapping sample pairs.

    Both domains are truncated to a common even count; consecutive pairs
    (1,2), (3,4), ... of each domain form the quad-tuples. Unbiased, so the
    value may be negative.
    """
    src, tgt = _check_pair(src, tgt)
    m = truncated_even_count(src.shape[0], tgt.shape[0])
    s1, s2 = src[0:m:2], src[1:m:2]
    t1, t2 = tgt[0:m:2], tgt[1:m:2]
    h = (kernels.row_kernels(s1, s2, spec)
         + kernels.row_kernels(t1, t2, spec)
         - kernels.row_kernels(s1, t2, spec)
         - kernels.row_kernels(s2, t1, spec))
    return float(h.mean())


# ---------------------------------------------------------------------------
# Weighted estimators
# ---------------------------------------------------------------------------

def wmmd2_quadratic(src, src_labels, tgt, weights: AuxWeights,
                    spec: KernelSpec) -> float:
    """All-pairs squared MMD between the alpha-reweighted source sample and
    the target sample.

    Source sample i contributes weight alpha_{y_i} normalized by the total
    weight, so rescaling all alphas by a positive constant leaves the value
    unchanged.
    """
    src, tgt = _check_pair(src, tgt)
    labels = as_labels(src_labels, weights.class_count)
    if labels.shape[0] != src.shape[0]:
        raise ShapeError("src_labels length must match source rows")
    a = weights.alphas[labels]
    total = a.sum()
    if total <= 0:
        raise DegenerateWeightsError("sum of per-sample alphas is zero")
    k_ss = kernels.gram(src, src, spec)
    k_tt = kernels.gram(tgt, tgt, spec)
    k_st = kernels.gram(src, tgt, spec)
    n = tgt.shape[0]
    ss = a @ k_ss @ a / (total * total)
    tt = k_tt.mean()
    st = a @ k_st.sum(axis=1) / (total * n)
    return max(float(ss + tt - 2.0 * st), 0.0)


def h_lw(z: QuadTuple, weights: AuxWeights, spec: KernelSpec) -> float:
    """Weighted quad-tuple h-statistic.

    Source similarities are scaled by the product of the two source alphas,
    each cross term by the alpha of its source member; the target term is
    unweighted.
    """
    if z.ys1 is None or z.ys2 is None:
        raise DataError("h_lw requires source labels on the quad-tuple")
    a1 = float(weights.sample_alphas([z.ys1])[0])
    a2 = float(weights.sample_alphas([z.ys2])[0])
    multi = kernels.multi_kernel
    return (a1 * a2 * multi(z.xs1, z.xs2, spec)
            + multi(z.xt1, z.xt2, spec)
            - a1 * multi(z.xs1, z.xt2, spec)
            - a2 * multi(z.xs2, z.xt1, spec))


def wmmd2_linear(src, src_labels, tgt, weights: AuxWeights,
                 spec: KernelSpec) -> float:
    """Linear-time weighted squared-MMD estimate.

    Same pairing as ``mmd2_linear``. Within the batch the per-sample alphas
    are renormalized to mean 1 (their population expectation), which
    stabilizes small batches without changing the estimator asymptotically.
    """
    src, tgt = _check_pair(src, tgt)
    labels = as_labels(src_labels, weights.class_count)
    if labels.shape[0] != src.shape[0]:
        raise ShapeError("src_labels length must match source rows")
    m = truncated_even_count(src.shape[0], tgt.shape[0])
    a = renormalize_alphas(weights, labels[:m])
    a1, a2 = a[0::2], a[1::2]
    s1, s2 = src[0:m:2], src[1:m:2]
    t1, t2 = tgt[0:m:2], tgt[1:m:2]
    h = (a1 * a2 * kernels.row_kernels(s1, s2, spec)
         + kernels.row_kernels(t1, t2, spec)
         - a1 * kernels.row_kernels(s1, t2, spec)
         - a2 * kernels.row_kernels(s2, t1, spec))
    return float(h.mean())


def h_lw_grad(z: QuadTuple, weights: AuxWeights,
              spec: KernelSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of ``h_lw`` with respect to the four feature vectors.

    Each gradient keeps only the two kernel terms its vector appears in; the
    alpha factors multiply through unchanged.
    """
    if z.ys1 is None or z.ys2 is None:
        raise DataError("h_lw_grad requires source labels on the quad-tuple")
    a1 = float(weights.sample_alphas([z.ys1])[0])
    a2 = float(weights.sample_alphas([z.ys2])[0])
    grad = kernels.multi_kernel_grad_x
    g_xs1 = a1 * a2 * grad(z.xs1, z.xs2, spec) - a1 * grad(z.xs1, z.xt2, spec)
    g_xs2 = a1 * a2 * grad(z.xs2, z.xs1, spec) - a2 * grad(z.xs2, z.xt1, spec)
    g_xt1 = grad(z.xt1, z.xt2, spec) - a2 * grad(z.xt1, z.xs2, spec)
    g_xt2 = grad(z.xt2, z.xt1, spec) - a1 * grad(z.xt2, z.xs1, spec)
    return g_xs1, g_xs2, g_xt1, g_xt2


def wmmd2_linear_feature_grads(src, src_labels, tgt, weights: AuxWeights,
                               spec: KernelSpec) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of ``wmmd2_linear`` with respect to every source and target
    row; rows beyond the even truncation receive zeros.

    The batch renormalization factor depends only on labels, so it passes
    through the feature gradients as a constant.
    """
    src, tgt = _check_pair(src, tgt)
    labels = as_labels(src_labels, weights.class_count)
    if labels.shape[0] != src.shape[0]:
        raise ShapeError("src_labels length must match source rows")
    m = truncated_even_count(src.shape[0], tgt.shape[0])
    a = renormalize_alphas(weights, labels[:m])
    a1, a2 = a[0::2, None], a[1::2, None]
    s1, s2 = src[0:m:2], src[1:m:2]
    t1, t2 = tgt[0:m:2], tgt[1:m:2]
    pairs = m // 2
    rg = kernels.row_kernel_grads

    g_src = np.zeros_like(src)
    g_tgt = np.zeros_like(tgt)
    g_src[0:m:2] = a1 * a2 * rg(s1, s2, spec) - a1 * rg(s1, t2, spec)
    g_src[1:m:2] = a1 * a2 * rg(s2, s1, spec) - a2 * rg(s2, t1, spec)
    g_tgt[0:m:2] = rg(t1, t2, spec) - a2 * rg(t1, s2, spec)
    g_tgt[1:m:2] = rg(t2, t1, spec) - a1 * rg(t2, s1, spec)
    g_src /= pairs
    g_tgt /= pairs
    return g_src, g_tgt
