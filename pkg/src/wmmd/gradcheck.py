"""Central finite-difference helpers for verifying analytic gradients."""

from __future__ import annotations

import numpy as np

from .model import ModelParams
from .numerics import Gradients

DEFAULT_STEP = 1e-5


def central_difference(f, x: np.ndarray, step: float = DEFAULT_STEP) -> np.ndarray:
    """Elementwise central differences of a scalar function of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        hi = f(x)
        flat[i] = orig - step
        lo = f(x)
        flat[i] = orig
        grad.ravel()[i] = (hi - lo) / (2.0 * step)
    return grad


def numerical_param_grads(loss_fn, params: ModelParams,
                          step: float = DEFAULT_STEP) -> Gradients:
    """Central differences of ``loss_fn(params)`` over every parameter entry.

    Parameters are perturbed in place and restored, so ``loss_fn`` must read
    them through the given object.
    """
    grads = params.zero_gradients()
    for arrays, out in ((params.weights, grads.weights),
                        (params.biases, grads.biases)):
        for arr, g in zip(arrays, out):
            flat = arr.ravel()
            gflat = g.ravel()
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + step
                hi = loss_fn(params)
                flat[i] = orig - step
                lo = loss_fn(params)
                flat[i] = orig
                gflat[i] = (hi - lo) / (2.0 * step)
    return grads


def block_relative_error(analytic: np.ndarray, numeric: np.ndarray,
                         floor: float = 1e-8) -> float:
    """Largest deviation, relative to the largest gradient magnitude in the
    block. The floor guards the all-zero-gradient case."""
    analytic = np.asarray(analytic)
    numeric = np.asarray(numeric)
    scale = max(np.max(np.abs(analytic)), np.max(np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric)) / scale)


def gradients_relative_error(analytic: Gradients, numeric: Gradients) -> float:
    """Max block-relative error over all parameter blocks."""
    errors = [block_relative_error(a, n)
              for a, n in zip(analytic.weights, numeric.weights)]
    errors += [block_relative_error(a, n)
               for a, n in zip(analytic.biases, numeric.biases)]
    return max(errors)
