"""Dense float64 numeric substrate: validated matrix ops, a stable softmax,
and the clamped cross-entropy used by the classifier losses.

Arrays are plain numpy ``float64`` throughout; the verification tolerances in
the test suite assume 64-bit precision. Operations validate shapes and reject
non-finite values instead of letting NaN/Inf propagate silently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import LabelError, NumericError, ShapeError

# Floor applied inside logarithms so a vanishing probability yields a large
# finite loss instead of -inf.
LOG_FLOOR = 1e-12


def as_array(x, name: str = "array", ndim: int | None = None) -> np.ndarray:
    """Coerce to a float64 ndarray, rejecting non-finite entries."""
    arr = np.asarray(x, dtype=np.float64)
    if ndim is not None and arr.ndim != ndim:
        raise ShapeError(f"{name}: expected {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name}: contains non-finite values")
    return arr


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    return as_array(x, name, ndim=2)


def as_vector(x, name: str = "vector") -> np.ndarray:
    return as_array(x, name, ndim=1)


@dataclass
class Gradients:
    """Per-layer parameter gradients, shape-congruent with the model they
    differentiate (one weight matrix and one bias vector per layer)."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def scaled(self, factor: float) -> "Gradients":
        return Gradients([factor * w for w in self.weights],
                         [factor * b for b in self.biases])

    def add_(self, other: "Gradients") -> "Gradients":
        """In-place accumulation; shapes must already agree."""
        for mine, theirs in zip(self.weights, other.weights):
            mine += theirs
        for mine, theirs in zip(self.biases, other.biases):
            mine += theirs
        return self

    @staticmethod
    def zeros_like(weights: list[np.ndarray], biases: list[np.ndarray]) -> "Gradients":
        return Gradients([np.zeros_like(w) for w in weights],
                         [np.zeros_like(b) for b in biases])


def matmul(a, b) -> np.ndarray:
    """Matrix product with explicit conformance checking."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: inner dimensions differ ({a.shape} x {b.shape})")
    return a @ b


def softmax(logits) -> np.ndarray:
    """Row-wise softmax with max-subtraction for overflow safety.

    Accepts a single logit vector or a batch of rows; the result has the
    same shape and each distribution sums to 1.
    """
    z = as_array(logits, "logits")
    if z.ndim not in (1, 2):
        raise ShapeError(f"softmax: expected 1-d or 2-d input, got shape {z.shape}")
    shifted = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def cross_entropy(probs, label: int) -> float:
    """Negative log-likelihood of ``label`` under a probability vector.

    The probability is floored at ``LOG_FLOOR`` so the loss stays finite for
    degenerate inputs.
    """
    p = as_vector(probs, "probs")
    label = int(label)
    if not 0 <= label < p.shape[0]:
        raise LabelError(f"label {label} out of range for {p.shape[0]} classes")
    return float(-np.log(max(p[label], LOG_FLOOR)))


def softmax_cross_entropy_grad(logits, label: int) -> np.ndarray:
    """Gradient of ``cross_entropy(softmax(logits), label)`` w.r.t. logits.

    The usual ``p - onehot`` form; exact wherever the log floor is inactive.
    """
    z = as_vector(logits, "logits")
    label = int(label)
    if not 0 <= label < z.shape[0]:
        raise LabelError(f"label {label} out of range for {z.shape[0]} classes")
    g = softmax(z)
    g[label] -= 1.0
    return g
