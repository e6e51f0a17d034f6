"""Synthetic domain pairs with controllable class priors, plus CSV ingestion.

Both domains share class-conditional Gaussians; the target domain may differ
in class priors (the bias under study) and in a per-class mean offset (a
genuine conditional shift, so adaptation is non-trivial). Target labels are
held back behind an evaluation-only accessor.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import (DataError, LabelError, ParameterError, ParseError,
                         SchemaError, ShapeError)
from .numerics import as_matrix, as_vector


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with optional integer labels."""

    features: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        feats = as_matrix(self.features, "features")
        object.__setattr__(self, "features", feats)
        if self.labels is not None:
            labs = np.asarray(self.labels)
            if labs.ndim != 1 or labs.shape[0] != feats.shape[0]:
                raise ShapeError("labels must be 1-d and match the number of rows")
            if not np.issubdtype(labs.dtype, np.integer):
                cast = labs.astype(np.int64)
                if np.any(cast != labs):
                    raise LabelError("labels must be integers")
                labs = cast
            if labs.size and labs.min() < 0:
                raise LabelError("labels must be nonnegative")
            object.__setattr__(self, "labels", labs.astype(np.int64))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class MixtureSpec:
    """Gaussian class-conditional mixture: per-class means, isotropic scales,
    class priors, and the per-class mean offset that defines the target
    domain's conditional shift."""

    means: np.ndarray
    scales: np.ndarray
    priors: np.ndarray
    domain_shift: np.ndarray | None = None

    def __post_init__(self):
        means = as_matrix(self.means, "means")
        scales = as_vector(self.scales, "scales")
        priors = as_vector(self.priors, "priors")
        c, d = means.shape
        if scales.shape != (c,) or priors.shape != (c,):
            raise ParameterError("scales and priors must have one entry per class")
        if np.any(scales <= 0):
            raise ParameterError("scales must be positive")
        if np.any(priors < 0) or abs(priors.sum() - 1.0) > 1e-9:
            raise ParameterError("priors must be nonnegative and sum to 1")
        shift = self.domain_shift
        shift = np.zeros((c, d)) if shift is None else as_matrix(shift, "domain_shift")
        if shift.shape != (c, d):
            raise ParameterError(f"domain_shift must have shape {(c, d)}, got {shift.shape}")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "domain_shift", shift)

    @property
    def class_count(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def with_priors(self, priors) -> "MixtureSpec":
        return MixtureSpec(self.means, self.scales, priors, self.domain_shift)

    def target_view(self, target_priors) -> "MixtureSpec":
        """The target domain's mixture: shifted means, new priors, no
        further shift."""
        return MixtureSpec(self.means + self.domain_shift, self.scales, target_priors, None)

    @classmethod
    def axis_aligned(cls, class_count: int, dim: int, separation: float = 3.0,
                     scale: float = 1.0, shift: float = 0.5,
                     priors=None) -> "MixtureSpec":
        """Simple benchmark geometry: class c sits at ``separation`` along
        axis c (mod dim), unit-ish scale, constant per-coordinate offset
        between the domains."""
        if class_count < 1 or dim < 1:
            raise ParameterError("class_count and dim must be positive")
        means = np.zeros((class_count, dim))
        for c in range(class_count):
            means[c, c % dim] = separation * (1 + c // dim)
        if priors is None:
            priors = np.full(class_count, 1.0 / class_count)
        return cls(means, np.full(class_count, scale), priors,
                   np.full((class_count, dim), shift))


class DomainPair:
    """A labeled source set and an unlabeled target set.

    Target labels, when known (synthetic data), are stored on the evaluation
    side only: ``target`` never carries labels, ``evaluation_target()``
    returns a labeled copy for scoring.
    """

    def __init__(self, source: Dataset, target: Dataset):
        if source.labels is None:
            raise DataError("source dataset must be labeled")
        if source.dim != target.dim:
            raise ShapeError(f"feature dims differ ({source.dim} vs {target.dim})")
        self.source = source
        self._eval_labels = target.labels
        self.target = Dataset(target.features) if target.labels is not None else target

    @property
    def has_eval_labels(self) -> bool:
        return self._eval_labels is not None

    def evaluation_target(self) -> Dataset:
        if self._eval_labels is None:
            raise DataError("no target labels were held for evaluation")
        return Dataset(self.target.features, self._eval_labels)


def sample_mixture(spec: MixtureSpec, n: int, seed) -> Dataset:
    """Draw ``n`` labeled points: labels from the priors, features from the
    class conditionals. Fully determined by (spec, seed)."""
    if n < 1:
        raise DataError(f"need at least one sample, got {n}")
    rng = np.random.default_rng(seed)
    labels = rng.choice(spec.class_count, size=n, p=spec.priors)
    noise = rng.standard_normal((n, spec.dim))
    features = spec.means[labels] + spec.scales[labels, None] * noise
    return Dataset(features, labels)


def make_bias_pair(base: MixtureSpec, target_priors, n_src: int, n_tgt: int,
                   seed) -> DomainPair:
    """Source drawn with the base priors, target with ``target_priors`` from
    the shifted conditionals. Source and target use independent seed streams
    derived from ``seed``."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    src_seed, tgt_seed = ss.spawn(2)
    source = sample_mixture(base, n_src, src_seed)
    target = sample_mixture(base.target_view(target_priors), n_tgt, tgt_seed)
    return DomainPair(source, target)


def load_csv(path, labeled: bool = False) -> Dataset:
    """Read a dataset from a comma-separated file.

    Rows are feature values, optionally with a trailing integer label column
    when ``labeled``. A single leading header line is tolerated. Raises
    ``ParseError`` (with line number) for malformed cells, ``SchemaError``
    for inconsistent widths, ``DataError`` for an empty file.
    """
    path = Path(path)
    rows: list[list[float]] = []
    width: int | None = None
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        for lineno, cells in enumerate(reader, start=1):
            if not cells or all(not c.strip() for c in cells):
                continue
            try:
                values = [float(c) for c in cells]
            except ValueError as exc:
                if lineno == 1 and not rows:
                    continue  # header line
                raise ParseError(f"could not parse value: {exc}", line=lineno) from exc
            if width is None:
                width = len(values)
                if labeled and width < 2:
                    raise SchemaError("labeled file needs at least one feature column plus a label")
            elif len(values) != width:
                raise SchemaError(
                    f"line {lineno}: row has {len(values)} columns, expected {width}")
            rows.append(values)
    if not rows:
        raise DataError(f"{path}: no data rows")
    table = np.asarray(rows, dtype=np.float64)
    if not labeled:
        return Dataset(table)
    raw_labels = table[:, -1]
    if np.any(raw_labels != np.round(raw_labels)):
        raise ParseError("label column contains non-integer values")
    return Dataset(table[:, :-1], raw_labels.astype(np.int64))
