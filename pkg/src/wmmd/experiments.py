"""Experiment harness: configured sweeps and verification checks.

Each runner consumes a :class:`RunConfig` (buildable from a JSON file) and
returns plain result objects; the CLI layer writes them out as CSV tables
plus a JSON summary. Every cell of a sweep is fully determined by the config
and its seed, so re-running a config reproduces the tables byte for byte.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cem, gradcheck, mmd, model
from .cem import LAMBDA_GRID, TrainConfig
from .data import DomainPair, MixtureSpec, load_csv, make_bias_pair
from .exceptions import ParameterError, WmmdError
from .kernels import KernelSpec, default_factor_spec, spec_from_data
from .model import ModelConfig

ARMS = ("src-only", "dan", "wdan")
BIAS_LEVELS = (0.5, 0.6, 0.7, 0.8, 0.9)

# Entropy tag mixed into per-cell seeds so dataset noise and trainer
# randomness come from unrelated streams.
_DATA_STREAM = 0x5EED


def _default_mixture() -> MixtureSpec:
    return MixtureSpec(
        means=np.array([[0.0, 0.0], [4.0, 0.0]]),
        scales=np.array([1.0, 1.0]),
        priors=np.array([0.5, 0.5]),
        domain_shift=np.full((2, 2), 1.0),
    )


def _default_train() -> TrainConfig:
    return TrainConfig(lam=1.0, gamma=0.1, epochs=30, learning_rate=0.05)


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce an experiment run."""

    experiment: str = "single-train"
    mixture: MixtureSpec = field(default_factory=_default_mixture)
    train: TrainConfig = field(default_factory=_default_train)
    hidden_dims: tuple[int, ...] = (16, 8)
    activation: str = "relu"
    kernel_factors: KernelSpec = field(default_factory=default_factor_spec)
    out_dir: str = "results"
    seeds: tuple[int, ...] = tuple(range(10))
    n_source: int = 300
    n_target: int = 300
    bias_levels: tuple[float, ...] = BIAS_LEVELS
    lambda_grid: tuple[float, ...] = LAMBDA_GRID
    sweep_bias: float = 0.9
    arm: str = "wdan"
    target_priors: tuple[float, ...] | None = None
    source_csv: str | None = None
    target_csv: str | None = None
    # verification-check sizes
    check_fixtures: int = 100
    check_shuffles: int = 200
    check_samples: int = 400
    oracle_n: int = 2000
    oracle_seeds: int = 20
    grad_configs: int = 20

    def __post_init__(self):
        if not self.seeds:
            raise ParameterError("seeds must be non-empty")
        if self.arm not in ARMS:
            raise ParameterError(f"arm must be one of {ARMS}, got {self.arm!r}")

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "mixture": {
                "means": self.mixture.means.tolist(),
                "scales": self.mixture.scales.tolist(),
                "priors": self.mixture.priors.tolist(),
                "domain_shift": self.mixture.domain_shift.tolist(),
            },
            "train": {
                "lambda": self.train.lam,
                "gamma": self.train.gamma,
                "batch_size": self.train.batch_size,
                "epochs": self.train.epochs,
                "learning_rate": self.train.learning_rate,
                "momentum": self.train.momentum,
                "seed": self.train.seed,
                "alpha_smoothing": self.train.alpha_smoothing,
            },
            "model": {"hidden_dims": list(self.hidden_dims), "activation": self.activation},
            "kernel": self.kernel_factors.to_dict(),
            "out_dir": self.out_dir,
            "seeds": list(self.seeds),
            "n_source": self.n_source,
            "n_target": self.n_target,
            "bias_levels": list(self.bias_levels),
            "lambda_grid": list(self.lambda_grid),
            "sweep_bias": self.sweep_bias,
            "arm": self.arm,
            "target_priors": list(self.target_priors) if self.target_priors else None,
            "source_csv": self.source_csv,
            "target_csv": self.target_csv,
            "check_fixtures": self.check_fixtures,
            "check_shuffles": self.check_shuffles,
            "check_samples": self.check_samples,
            "oracle_n": self.oracle_n,
            "oracle_seeds": self.oracle_seeds,
            "grad_configs": self.grad_configs,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        kwargs: dict = {}
        simple = ("experiment", "out_dir", "sweep_bias", "arm", "source_csv",
                  "target_csv", "n_source", "n_target", "check_fixtures",
                  "check_shuffles", "check_samples", "oracle_n", "oracle_seeds",
                  "grad_configs")
        for key in simple:
            if key in raw:
                kwargs[key] = raw[key]
        for key in ("seeds", "bias_levels", "lambda_grid"):
            if key in raw:
                kwargs[key] = tuple(raw[key])
        if raw.get("target_priors") is not None:
            kwargs["target_priors"] = tuple(raw["target_priors"])
        if "mixture" in raw:
            mix = raw["mixture"]
            if "means" in mix:
                kwargs["mixture"] = MixtureSpec(
                    np.asarray(mix["means"], dtype=np.float64),
                    np.asarray(mix["scales"], dtype=np.float64),
                    np.asarray(mix["priors"], dtype=np.float64),
                    np.asarray(mix["domain_shift"], dtype=np.float64)
                    if mix.get("domain_shift") is not None else None,
                )
            else:
                kwargs["mixture"] = MixtureSpec.axis_aligned(
                    class_count=mix["class_count"], dim=mix["dim"],
                    separation=mix.get("separation", 3.0),
                    scale=mix.get("scale", 1.0), shift=mix.get("shift", 0.5),
                    priors=mix.get("priors"))
        if "train" in raw:
            tr = dict(raw["train"])
            if "lambda" in tr:
                tr["lam"] = tr.pop("lambda")
            kwargs["train"] = TrainConfig(**tr)
        if "model" in raw:
            kwargs["hidden_dims"] = tuple(raw["model"].get("hidden_dims", (16, 8)))
            kwargs["activation"] = raw["model"].get("activation", "relu")
        if "kernel" in raw:
            kern = raw["kernel"]
            kwargs["kernel_factors"] = KernelSpec(
                np.asarray(kern.get("bandwidths", kern.get("bandwidth_factors"))),
                np.asarray(kern["betas"]) if kern.get("betas") is not None else None)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with Path(path).open() as fh:
            return cls.from_dict(json.load(fh))

    def replace(self, **kwargs) -> "RunConfig":
        return dataclasses.replace(self, **kwargs)


@dataclass
class SweepResult:
    header: tuple[str, ...]
    rows: list[tuple]
    summary: dict
    failed: int

    @property
    def passed(self) -> bool:
        return self.failed == 0


@dataclass
class CheckReport:
    name: str
    checks: list[dict]

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "checks": self.checks}


# ---------------------------------------------------------------------------
# Training cells
# ---------------------------------------------------------------------------

def _cell_pair(config: RunConfig, target_priors, seed: int) -> DomainPair:
    data_ss = np.random.SeedSequence([int(seed), _DATA_STREAM])
    return make_bias_pair(config.mixture, target_priors,
                          config.n_source, config.n_target, data_ss)


def train_arm(pair: DomainPair, arm: str, config: RunConfig,
              seed: int) -> tuple[cem.TrainState, float]:
    """Train one arm on a domain pair; returns the state and target accuracy.

    ``src-only`` switches both adaptation terms off; ``dan`` freezes all
    alphas at 1; ``wdan`` runs the full method.
    """
    if arm not in ARMS:
        raise ParameterError(f"unknown arm {arm!r}")
    tc = dataclasses.replace(config.train, seed=int(seed))
    if arm == "src-only":
        tc = dataclasses.replace(tc, lam=0.0, gamma=0.0)
    if config.source_csv:
        class_count = int(pair.source.labels.max()) + 1
    else:
        class_count = config.mixture.class_count
    model_cfg = ModelConfig.default(pair.source.dim, class_count,
                                    config.hidden_dims, config.activation)
    eval_labels = pair.evaluation_target().labels if pair.has_eval_labels else None
    state = cem.train(pair.source, pair.target, model_cfg, tc,
                      kernel_factors=config.kernel_factors,
                      freeze_alpha=(arm == "dan"),
                      eval_target_labels=eval_labels)
    accuracy = float("nan")
    if pair.has_eval_labels:
        accuracy = cem.evaluate(state.params, pair.evaluation_target()).accuracy
    return state, accuracy


def _mean_se(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    out = {"n": int(arr.size), "mean": float(arr.mean()) if arr.size else float("nan")}
    out["se"] = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0
    return out


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def run_bias_sweep(config: RunConfig) -> SweepResult:
    """Train all three arms across target class-weight bias levels.

    The source keeps the mixture's own priors; at bias level b the target
    draws class 0 with weight b. Per-cell failures are recorded in the row's
    status and do not abort the sweep.
    """
    if config.mixture.class_count != 2:
        raise ParameterError("bias sweep is defined for two-class mixtures")
    rows: list[tuple] = []
    failed = 0
    for bias in config.bias_levels:
        for seed in config.seeds:
            pair = _cell_pair(config, (bias, 1.0 - bias), seed)
            for arm in ARMS:
                try:
                    _, acc = train_arm(pair, arm, config, seed)
                    status = "ok"
                except WmmdError as exc:
                    acc, status = float("nan"), f"failed: {exc}"
                    failed += 1
                rows.append((bias, arm, int(seed), acc, status))
    summary = {"cells": {}}
    for bias in config.bias_levels:
        for arm in ARMS:
            vals = [r[3] for r in rows
                    if r[0] == bias and r[1] == arm and r[4] == "ok"]
            summary["cells"][f"bias={bias:g},arm={arm}"] = _mean_se(vals)
    return SweepResult(("bias", "arm", "seed", "accuracy", "status"),
                       rows, summary, failed)


def run_lambda_sweep(config: RunConfig) -> SweepResult:
    """Train the wdan and dan arms across the regularizer-weight grid on a
    fixed biased pair; lambda = 0 is the shared no-regularizer baseline."""
    if config.mixture.class_count != 2:
        raise ParameterError("lambda sweep is defined for two-class mixtures")
    target_priors = (config.sweep_bias, 1.0 - config.sweep_bias)
    rows: list[tuple] = []
    failed = 0
    for seed in config.seeds:
        pair = _cell_pair(config, target_priors, seed)
        for lam in config.lambda_grid:
            lam_config = config.replace(train=dataclasses.replace(config.train, lam=float(lam)))
            for arm in ("wdan", "dan"):
                try:
                    _, acc = train_arm(pair, arm, lam_config, seed)
                    status = "ok"
                except WmmdError as exc:
                    acc, status = float("nan"), f"failed: {exc}"
                    failed += 1
                rows.append((float(lam), arm, int(seed), acc, status))
    summary = {"cells": {}, "best_lambda": {}}
    for arm in ("wdan", "dan"):
        best_lam, best_mean = None, -np.inf
        for lam in config.lambda_grid:
            vals = [r[3] for r in rows
                    if r[0] == float(lam) and r[1] == arm and r[4] == "ok"]
            cell = _mean_se(vals)
            summary["cells"][f"lambda={lam:g},arm={arm}"] = cell
            if cell["n"] and cell["mean"] > best_mean:
                best_lam, best_mean = float(lam), cell["mean"]
        summary["best_lambda"][arm] = {"lambda": best_lam, "mean": best_mean}
    return SweepResult(("lambda", "arm", "seed", "accuracy", "status"),
                       rows, summary, failed)


# ---------------------------------------------------------------------------
# Verification checks
# ---------------------------------------------------------------------------

def _random_fixture(rng: np.random.Generator):
    dim = int(rng.integers(1, 4))
    m = int(rng.integers(2, 24))
    n = int(rng.integers(2, 24))
    classes = int(rng.integers(2, 4))
    src = rng.normal(size=(m, dim))
    tgt = rng.normal(size=(n, dim))
    labels = rng.integers(0, classes, size=m)
    spec = KernelSpec(rng.uniform(0.3, 3.0, size=3))
    return src, labels, tgt, classes, spec


def check_alpha_one_reduction(fixtures: int, seed: int = 0) -> dict:
    """With unit alphas the weighted estimators must equal the unweighted
    ones to float accuracy, on random fixtures."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(fixtures):
        src, labels, tgt, classes, spec = _random_fixture(rng)
        unit = mmd.AuxWeights.unit(np.full(classes, 1.0 / classes))
        quad_u = mmd.mmd2_quadratic(src, tgt, spec)
        quad_w = mmd.wmmd2_quadratic(src, labels, tgt, unit, spec)
        worst = max(worst, abs(quad_w - quad_u) / max(abs(quad_u), 1e-300))
        if min(src.shape[0], tgt.shape[0]) >= 2:
            lin_u = mmd.mmd2_linear(src, tgt, spec)
            lin_w = mmd.wmmd2_linear(src, labels, tgt, unit, spec)
            worst = max(worst, abs(lin_w - lin_u) / max(abs(lin_u), 1e-300))
    return {"name": "alpha-one-reduction", "fixtures": fixtures,
            "max_relative_difference": worst, "tolerance": 1e-12,
            "passed": bool(worst <= 1e-12)}


def check_alpha_scale_invariance(fixtures: int = 50, seed: int = 1) -> dict:
    """Rescaling all alphas by a positive constant must not change the
    weighted quadratic estimate (the normalizer cancels)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(fixtures):
        src, labels, tgt, classes, spec = _random_fixture(rng)
        priors = np.full(classes, 1.0 / classes)
        alphas = rng.uniform(0.2, 2.0, size=classes)
        scale = float(rng.uniform(0.1, 10.0))
        base = mmd.AuxWeights(priors, priors, alphas)
        scaled = mmd.AuxWeights(priors, priors, alphas * scale)
        v1 = mmd.wmmd2_quadratic(src, labels, tgt, base, spec)
        v2 = mmd.wmmd2_quadratic(src, labels, tgt, scaled, spec)
        worst = max(worst, abs(v1 - v2) / max(abs(v1), 1e-300))
    return {"name": "alpha-scale-invariance", "fixtures": fixtures,
            "max_relative_difference": worst, "tolerance": 1e-10,
            "passed": bool(worst <= 1e-10)}


def _mc_settings(n: int, rng: np.random.Generator) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    same_src = rng.normal(size=(n, 2))
    same_tgt = rng.normal(size=(n, 2))
    shift_src = rng.normal(size=(n, 2))
    shift_tgt = rng.normal(size=(n, 2)) + np.array([1.0, 0.0])
    mix = MixtureSpec(np.array([[0.0, 0.0], [3.0, 0.0]]), np.ones(2), np.array([0.5, 0.5]))
    prior_src = sample_features(mix, n, rng)
    prior_tgt = sample_features(mix.with_priors([0.8, 0.2]), n, rng)
    return {"same-distribution": (same_src, same_tgt),
            "mean-shift": (shift_src, shift_tgt),
            "prior-shift": (prior_src, prior_tgt)}


def sample_features(spec: MixtureSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    labels = rng.choice(spec.class_count, size=n, p=spec.priors)
    return spec.means[labels] + spec.scales[labels, None] * rng.standard_normal((n, spec.dim))


def check_linear_vs_quadratic(samples: int, shuffles: int, seed: int = 2) -> dict:
    """The linear estimator, averaged over independent row shuffles of a
    fixed sample, is an unbiased estimate of that sample's quadratic
    U-statistic; agreement is required within 3 Monte-Carlo standard
    errors per setting."""
    rng = np.random.default_rng(seed)
    settings = {}
    passed = True
    for name, (src, tgt) in _mc_settings(samples, rng).items():
        spec = spec_from_data(np.vstack([src, tgt]))
        reference = mmd.mmd2_quadratic_unbiased(src, tgt, spec)
        values = np.empty(shuffles)
        for k in range(shuffles):
            values[k] = mmd.mmd2_linear(src[rng.permutation(src.shape[0])],
                                        tgt[rng.permutation(tgt.shape[0])], spec)
        se = float(values.std(ddof=1) / np.sqrt(shuffles))
        gap = abs(float(values.mean()) - reference)
        ok = bool(gap <= 3.0 * se)
        passed = passed and ok
        settings[name] = {"reference": reference, "linear_mean": float(values.mean()),
                          "standard_error": se, "gap_in_se": gap / se if se else 0.0,
                          "passed": ok}
    return {"name": "linear-vs-quadratic", "shuffles": shuffles,
            "samples": samples, "settings": settings, "passed": passed}


def check_oracle_weight_correction(n: int, seeds: int, base: MixtureSpec | None = None,
                                   source_priors=(0.5, 0.5), target_priors=(0.8, 0.2),
                                   max_ratio: float = 0.25, seed: int = 3) -> dict:
    """With true-ratio alphas on a prior-shifted pair sharing conditionals,
    the weighted estimate must fall well below the unweighted one."""
    if base is None:
        base = MixtureSpec(np.array([[0.0, 0.0], [3.0, 0.0]]), np.ones(2),
                           np.array(source_priors))
    else:
        base = base.with_priors(source_priors)
    weights = mmd.AuxWeights.from_priors(source_priors, target_priors)
    rng = np.random.default_rng(seed)
    plain, corrected = [], []
    for _ in range(seeds):
        src_labels = rng.choice(base.class_count, size=n, p=base.priors)
        src = base.means[src_labels] + base.scales[src_labels, None] \
            * rng.standard_normal((n, base.dim))
        tgt = sample_features(base.with_priors(target_priors), n, rng)
        spec = spec_from_data(np.vstack([src, tgt]))
        plain.append(mmd.mmd2_quadratic(src, tgt, spec))
        corrected.append(mmd.wmmd2_quadratic(src, src_labels, tgt, weights, spec))
    ratio = float(np.mean(corrected) / np.mean(plain))
    return {"name": "oracle-weight-correction", "n": n, "seeds": seeds,
            "unweighted_mean": float(np.mean(plain)),
            "weighted_mean": float(np.mean(corrected)),
            "ratio": ratio, "max_ratio": max_ratio,
            "passed": bool(ratio < max_ratio)}


def run_estimator_check(config: RunConfig) -> CheckReport:
    """Reduction, Monte-Carlo, and weight-correction properties of the four
    estimators, with measured errors in the report."""
    checks = [
        check_alpha_one_reduction(config.check_fixtures),
        check_alpha_scale_invariance(),
        check_linear_vs_quadratic(config.check_samples, config.check_shuffles),
        check_oracle_weight_correction(config.oracle_n, config.oracle_seeds,
                                       base=config.mixture),
    ]
    return CheckReport("estimator-check", checks)


def _random_grad_setup(rng: np.random.Generator, lam: float, gamma: float,
                       activation: str):
    dim = int(rng.integers(2, 4))
    hidden = [(), (5,), (4, 3)][int(rng.integers(0, 3))]
    classes = int(rng.integers(2, 4))
    n_layers = len(hidden) + 1
    taps = (n_layers,) if n_layers == 1 else (n_layers - 1, n_layers)
    cfg = ModelConfig(dim, tuple(hidden), classes, taps, activation)
    params = model.ModelParams.init(cfg, int(rng.integers(0, 2**31)))
    m = int(rng.integers(4, 10))
    n = int(rng.integers(4, 10))
    src = rng.uniform(-1, 1, size=(m, dim))
    tgt = rng.uniform(-1, 1, size=(n, dim))
    src_labels = rng.integers(0, classes, size=m)
    tgt_pseudo = rng.integers(0, classes, size=n)
    priors = np.full(classes, 1.0 / classes)
    weights = mmd.AuxWeights(priors, priors, rng.uniform(0.3, 1.8, size=classes))
    spec = KernelSpec(rng.uniform(0.5, 2.0, size=3))
    return cfg, params, src, src_labels, tgt, tgt_pseudo, weights, spec


def check_model_gradients(configurations: int, seed: int = 4,
                          tolerance: float = 1e-4) -> dict:
    """Backward() against central finite differences across random models,
    batches, alphas and tradeoff settings; tanh keeps the loss smooth so the
    comparison is exact to O(step^2)."""
    rng = np.random.default_rng(seed)
    grid = [(0.0, 0.0), (0.0, 0.3), (0.4, 0.0), (0.4, 0.3)]
    per_term = {"source_ce": 0.0, "target_ce": 0.0, "wmmd": 0.0}
    worst = 0.0
    for k in range(configurations):
        lam, gamma = grid[k % len(grid)]
        cfg, params, src, src_labels, tgt, tgt_pseudo, weights, spec = \
            _random_grad_setup(rng, lam, gamma, "tanh")

        def loss_fn(p, lam=lam, gamma=gamma, src=src, tgt=tgt,
                    src_labels=src_labels, tgt_pseudo=tgt_pseudo,
                    weights=weights, spec=spec):
            return model.loss(p, src, src_labels, tgt, tgt_pseudo,
                              weights, spec, lam, gamma)

        analytic = model.backward(params, model.forward(params, src), src_labels,
                                  model.forward(params, tgt), tgt_pseudo,
                                  weights, spec, lam, gamma)
        numeric = gradcheck.numerical_param_grads(loss_fn, params)
        err = gradcheck.gradients_relative_error(analytic, numeric)
        worst = max(worst, err)
        if lam == 0.0 and gamma == 0.0:
            per_term["source_ce"] = max(per_term["source_ce"], err)
        elif lam == 0.0:
            per_term["target_ce"] = max(per_term["target_ce"], err)
        elif gamma == 0.0:
            per_term["wmmd"] = max(per_term["wmmd"], err)
    return {"name": "model-gradients", "configurations": configurations,
            "max_relative_error": worst, "per_term": per_term,
            "tolerance": tolerance, "passed": bool(worst < tolerance)}


def check_quad_tuple_gradients(cases: int = 30, seed: int = 5,
                               tolerance: float = 1e-4) -> dict:
    """h_lw_grad against central finite differences on random quad-tuples."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        dim = int(rng.integers(1, 4))
        classes = int(rng.integers(2, 4))
        vecs = rng.uniform(-1, 1, size=(4, dim))
        ys1, ys2 = (int(v) for v in rng.integers(0, classes, size=2))
        priors = np.full(classes, 1.0 / classes)
        weights = mmd.AuxWeights(priors, priors, rng.uniform(0.0, 2.0, size=classes))
        spec = KernelSpec(rng.uniform(0.5, 2.0, size=2))

        def build(xs1, xs2, xt1, xt2):
            return mmd.QuadTuple(xs1, xs2, xt1, xt2, ys1=ys1, ys2=ys2)

        analytic = mmd.h_lw_grad(build(*vecs), weights, spec)
        for k in range(4):
            def f(v, k=k):
                pieces = [vecs[j] if j != k else v for j in range(4)]
                return mmd.h_lw(build(*pieces), weights, spec)
            numeric = gradcheck.central_difference(f, vecs[k].copy())
            worst = max(worst, gradcheck.block_relative_error(analytic[k], numeric))
    return {"name": "quad-tuple-gradients", "cases": cases,
            "max_relative_error": worst, "tolerance": tolerance,
            "passed": bool(worst < tolerance)}


def run_gradient_check(config: RunConfig) -> CheckReport:
    checks = [
        check_model_gradients(config.grad_configs),
        check_quad_tuple_gradients(),
    ]
    return CheckReport("gradient-check", checks)


# ---------------------------------------------------------------------------
# Single runs
# ---------------------------------------------------------------------------

def build_pair(config: RunConfig, seed: int) -> DomainPair:
    """Domain pair from CSV paths when given, otherwise sampled from the
    configured mixture."""
    if config.source_csv:
        if not config.target_csv:
            raise ParameterError("target_csv is required when source_csv is given")
        source = load_csv(config.source_csv, labeled=True)
        target = load_csv(config.target_csv, labeled=False)
        return DomainPair(source, target)
    priors = config.target_priors if config.target_priors is not None \
        else tuple(config.mixture.priors)
    return _cell_pair(config, priors, seed)


def run_single_train(config: RunConfig) -> tuple[cem.TrainState, dict]:
    """Train one arm on one pair; returns the state and a result summary."""
    seed = int(config.seeds[0])
    pair = build_pair(config, seed)
    state, accuracy = train_arm(pair, config.arm, config, seed)
    result = {
        "experiment": "single-train",
        "arm": config.arm,
        "seed": seed,
        "epochs": state.epoch,
        "final_loss": state.loss_history[-1],
        "final_alphas": state.weights.alphas.tolist(),
        "target_accuracy": accuracy,
    }
    return state, result


# ---------------------------------------------------------------------------
# Output plumbing
# ---------------------------------------------------------------------------

def prepare_run_dir(out_dir) -> Path:
    """Create the next run-NNNN directory under ``out_dir``; existing runs
    are never touched."""
    base = Path(out_dir)
    base.mkdir(parents=True, exist_ok=True)
    index = 1
    while True:
        candidate = base / f"run-{index:04d}"
        try:
            candidate.mkdir()
            return candidate
        except FileExistsError:
            index += 1


def write_csv(path, header, rows) -> None:
    import csv as _csv
    with Path(path).open("w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_json(path, payload) -> None:
    with Path(path).open("w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_epoch_records(path, records) -> None:
    if not records:
        return
    classes = len(records[0].alphas)
    header = ["epoch", "loss", "source_ce", "target_ce", "wmmd"]
    header += [f"alpha_{c}" for c in range(classes)]
    header += ["target_accuracy"]
    rows = []
    for r in records:
        row = [r.epoch, r.loss, r.source_ce, r.target_ce, r.wmmd]
        row += [float(a) for a in r.alphas]
        row += ["" if r.target_accuracy is None else r.target_accuracy]
        rows.append(row)
    write_csv(path, header, rows)
