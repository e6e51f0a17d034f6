"""Gaussian RBF kernels, their convex combinations, and bandwidth selection.

A multi-kernel is a convex combination of Gaussian basis kernels

    k(x, y) = sum_l beta_l * exp(-||x - y||^2 / (2 * sigma_l^2)),

with nonnegative ``beta`` summing to one. The default family scales a median
pairwise distance by the factors {0.25, 0.5, 1, 2, 4} with uniform ``beta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .exceptions import DataError, ParameterError, ShapeError
from .numerics import as_matrix, as_vector

DEFAULT_BANDWIDTH_FACTORS = (0.25, 0.5, 1.0, 2.0, 4.0)

# Subsampling defaults for the median heuristic: cost control at O(n^2) and
# a fixed seed so repeated calls agree.
MEDIAN_SUBSAMPLE_CAP = 1000
MEDIAN_SUBSAMPLE_SEED = 0


@dataclass(frozen=True)
class KernelSpec:
    """Bandwidths and convex combination weights of a Gaussian multi-kernel.

    All bandwidths must be positive; betas must be nonnegative and sum to 1
    (checked to 1e-12). ``betas=None`` means uniform weights.
    """

    bandwidths: np.ndarray
    betas: np.ndarray | None = field(default=None)

    def __post_init__(self):
        bw = np.atleast_1d(np.asarray(self.bandwidths, dtype=np.float64))
        if bw.ndim != 1 or bw.size == 0:
            raise ParameterError("bandwidths must be a non-empty 1-d sequence")
        if np.any(bw <= 0) or not np.all(np.isfinite(bw)):
            raise ParameterError("bandwidths must be positive and finite")
        if self.betas is None:
            betas = np.full(bw.size, 1.0 / bw.size)
        else:
            betas = np.atleast_1d(np.asarray(self.betas, dtype=np.float64))
        if betas.shape != bw.shape:
            raise ParameterError("betas must match bandwidths in length")
        if np.any(betas < 0) or not np.all(np.isfinite(betas)):
            raise ParameterError("betas must be nonnegative and finite")
        if abs(betas.sum() - 1.0) > 1e-12:
            raise ParameterError(f"betas must sum to 1, got {betas.sum()!r}")
        object.__setattr__(self, "bandwidths", bw)
        object.__setattr__(self, "betas", betas)

    def scaled(self, factor: float) -> "KernelSpec":
        """New spec with every bandwidth multiplied by ``factor`` > 0."""
        if factor <= 0 or not np.isfinite(factor):
            raise ParameterError(f"scale factor must be positive, got {factor!r}")
        return KernelSpec(self.bandwidths * factor, self.betas.copy())

    def to_dict(self) -> dict:
        return {"bandwidths": self.bandwidths.tolist(), "betas": self.betas.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        return cls(np.asarray(d["bandwidths"]), np.asarray(d.get("betas")) if d.get("betas") is not None else None)


def default_factor_spec() -> KernelSpec:
    """Uniform multi-kernel whose bandwidths are the default *relative*
    factors, meant to be rescaled by a data-dependent median distance."""
    return KernelSpec(np.array(DEFAULT_BANDWIDTH_FACTORS))


def rbf(x, y, sigma: float) -> float:
    """Gaussian kernel exp(-||x - y||^2 / (2 sigma^2)); value in (0, 1]."""
    x = as_vector(x, "x")
    y = as_vector(y, "y")
    if x.shape != y.shape:
        raise ShapeError(f"rbf: dimension mismatch {x.shape} vs {y.shape}")
    if sigma <= 0 or not np.isfinite(sigma):
        raise ParameterError(f"sigma must be positive, got {sigma!r}")
    d = x - y
    return float(np.exp(-np.dot(d, d) / (2.0 * sigma * sigma)))


def multi_kernel(x, y, spec: KernelSpec) -> float:
    """Convex combination of RBF basis kernels at (x, y)."""
    x = as_vector(x, "x")
    y = as_vector(y, "y")
    if x.shape != y.shape:
        raise ShapeError(f"multi_kernel: dimension mismatch {x.shape} vs {y.shape}")
    d = x - y
    sq = np.dot(d, d)
    return float(np.sum(spec.betas * np.exp(-sq / (2.0 * spec.bandwidths**2))))


def multi_kernel_grad_x(x, y, spec: KernelSpec) -> np.ndarray:
    """Gradient of the multi-kernel with respect to its first argument.

    For each basis kernel, d k_l / d x = k_l(x, y) * (y - x) / sigma_l^2;
    the combination is weighted by beta.
    """
    x = as_vector(x, "x")
    y = as_vector(y, "y")
    if x.shape != y.shape:
        raise ShapeError(f"multi_kernel_grad_x: dimension mismatch {x.shape} vs {y.shape}")
    d = y - x
    sq = np.dot(d, d)
    sig2 = spec.bandwidths**2
    coeff = np.sum(spec.betas * np.exp(-sq / (2.0 * sig2)) / sig2)
    return coeff * d


def median_heuristic(data, cap: int = MEDIAN_SUBSAMPLE_CAP,
                     seed: int = MEDIAN_SUBSAMPLE_SEED) -> float:
    """Median pairwise Euclidean distance over a capped, seeded subsample.

    Falls back to 1.0 when the median vanishes (all points coincide), so the
    result is always a usable bandwidth.
    """
    data = as_matrix(data, "data")
    n = data.shape[0]
    if n < 2:
        raise DataError(f"median_heuristic needs at least 2 rows, got {n}")
    if n > cap:
        idx = np.random.default_rng(seed).choice(n, size=cap, replace=False)
        data = data[np.sort(idx)]
    med = float(np.median(pdist(data)))
    if med <= 0.0:
        return 1.0
    return med


def spec_from_data(data, factors=DEFAULT_BANDWIDTH_FACTORS, betas=None,
                   cap: int = MEDIAN_SUBSAMPLE_CAP,
                   seed: int = MEDIAN_SUBSAMPLE_SEED) -> KernelSpec:
    """Absolute-bandwidth spec: median distance of ``data`` times ``factors``."""
    med = median_heuristic(data, cap=cap, seed=seed)
    return KernelSpec(med * np.asarray(factors, dtype=np.float64), betas)


# ---------------------------------------------------------------------------
# Vectorized forms used by the estimators. These agree with the scalar
# functions above to float precision; tests cross-check the two paths.
# ---------------------------------------------------------------------------

def _combine(sq_dists: np.ndarray, spec: KernelSpec) -> np.ndarray:
    total = np.zeros_like(sq_dists)
    for sigma, beta in zip(spec.bandwidths, spec.betas):
        total += beta * np.exp(-sq_dists / (2.0 * sigma * sigma))
    return total


def gram(xs, ys, spec: KernelSpec) -> np.ndarray:
    """Multi-kernel Gram matrix between the rows of ``xs`` and ``ys``."""
    xs = as_matrix(xs, "xs")
    ys = as_matrix(ys, "ys")
    if xs.shape[1] != ys.shape[1]:
        raise ShapeError(f"gram: feature dims differ ({xs.shape[1]} vs {ys.shape[1]})")
    return _combine(cdist(xs, ys, "sqeuclidean"), spec)


def row_kernels(xs, ys, spec: KernelSpec) -> np.ndarray:
    """k(x_i, y_i) for aligned rows; shape (n,)."""
    xs = as_matrix(xs, "xs")
    ys = as_matrix(ys, "ys")
    if xs.shape != ys.shape:
        raise ShapeError(f"row_kernels: shapes differ ({xs.shape} vs {ys.shape})")
    diff = xs - ys
    return _combine(np.einsum("ij,ij->i", diff, diff), spec)


def row_kernel_grads(xs, ys, spec: KernelSpec) -> np.ndarray:
    """d k(x_i, y_i) / d x_i for aligned rows; shape (n, d)."""
    xs = as_matrix(xs, "xs")
    ys = as_matrix(ys, "ys")
    if xs.shape != ys.shape:
        raise ShapeError(f"row_kernel_grads: shapes differ ({xs.shape} vs {ys.shape})")
    diff = ys - xs
    sq = np.einsum("ij,ij->i", diff, diff)
    sig2 = spec.bandwidths**2
    coeff = np.zeros_like(sq)
    for s2, beta in zip(sig2, spec.betas):
        coeff += beta * np.exp(-sq / (2.0 * s2)) / s2
    return coeff[:, None] * diff
