"""Command-line harness.

Verbs:

* ``bias-sweep``       - three arms across target class-weight bias levels
* ``lambda-sweep``     - wdan/dan across the regularizer-weight grid
* ``estimator-check``  - reduction and Monte-Carlo estimator properties
* ``grad-check``       - finite-difference gradient verification
* ``train``            - one training run; writes checkpoint and epoch log
* ``eval``             - score a checkpoint on a labeled CSV

Each run writes into a fresh ``run-NNNN`` directory under the output
directory, so nothing is ever overwritten. Exit status is nonzero when any
verification check or sweep cell fails.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import experiments
from .cem import evaluate
from .data import load_csv
from .exceptions import WmmdError
from .experiments import RunConfig
from .model import load_params, save_params


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON run-config file")
    parser.add_argument("--seed", type=int, help="replace the seed list with this single seed")
    parser.add_argument("--out", help="output directory (default from config)")
    parser.add_argument("--lambda", dest="lam", type=float, help="WMMD tradeoff weight")
    parser.add_argument("--gamma", type=float, help="target-loss tradeoff weight")
    parser.add_argument("--arm", choices=experiments.ARMS, help="training arm")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wmmd",
        description="Weighted-MMD domain adaptation: experiments and checks")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in ("bias-sweep", "lambda-sweep", "estimator-check", "grad-check", "train"):
        p = sub.add_parser(verb)
        _add_common(p)
    p_eval = sub.add_parser("eval")
    p_eval.add_argument("--model", required=True, help="checkpoint file (.npz)")
    p_eval.add_argument("--data", required=True, help="labeled CSV file")
    return parser


def build_config(args: argparse.Namespace, experiment: str) -> RunConfig:
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    config = config.replace(experiment=experiment)
    if args.out:
        config = config.replace(out_dir=args.out)
    if args.seed is not None:
        config = config.replace(seeds=(args.seed,),
                                train=dataclasses.replace(config.train, seed=args.seed))
    if args.lam is not None:
        config = config.replace(train=dataclasses.replace(config.train, lam=args.lam))
    if args.gamma is not None:
        config = config.replace(train=dataclasses.replace(config.train, gamma=args.gamma))
    if args.arm is not None:
        config = config.replace(arm=args.arm)
    return config


def _run_sweep(config: RunConfig, runner) -> int:
    run_dir = experiments.prepare_run_dir(config.out_dir)
    experiments.write_json(run_dir / "config.json", config.to_dict())
    result = runner(config)
    experiments.write_csv(run_dir / "rows.csv", result.header, result.rows)
    experiments.write_json(run_dir / "summary.json", result.summary)
    for key, cell in sorted(result.summary["cells"].items()):
        mean = cell["mean"]
        print(f"{key}: mean accuracy {mean:.4f} (n={cell['n']}, se={cell['se']:.4f})")
    print(f"results in {run_dir}")
    if result.failed:
        print(f"{result.failed} cell(s) failed", file=sys.stderr)
        return 1
    return 0


def _run_check(config: RunConfig, runner) -> int:
    run_dir = experiments.prepare_run_dir(config.out_dir)
    experiments.write_json(run_dir / "config.json", config.to_dict())
    report = runner(config)
    experiments.write_json(run_dir / "report.json", report.to_dict())
    for check in report.checks:
        status = "PASS" if check["passed"] else "FAIL"
        detail = {k: v for k, v in check.items() if k not in ("name", "passed")}
        print(f"{status} {check['name']}: {json.dumps(detail, sort_keys=True, default=str)}")
    print(f"report in {run_dir}")
    return 0 if report.passed else 1


def _run_train(config: RunConfig) -> int:
    run_dir = experiments.prepare_run_dir(config.out_dir)
    experiments.write_json(run_dir / "config.json", config.to_dict())
    state, result = experiments.run_single_train(config)
    experiments.write_epoch_records(run_dir / "epochs.csv", state.records)
    save_params(run_dir / "checkpoint.npz", state.params)
    experiments.write_json(run_dir / "result.json", result)
    acc = result["target_accuracy"]
    acc_text = "n/a" if np.isnan(acc) else f"{acc:.4f}"
    print(f"arm={result['arm']} seed={result['seed']} "
          f"final loss {result['final_loss']:.4f} target accuracy {acc_text}")
    print(f"alphas: {np.round(state.weights.alphas, 4).tolist()}")
    print(f"artifacts in {run_dir}")
    return 0


def _run_eval(args: argparse.Namespace) -> int:
    params = load_params(args.model)
    dataset = load_csv(args.data, labeled=True)
    result = evaluate(params, dataset)
    print(f"accuracy {result.accuracy:.4f} on {dataset.n} samples")
    print("confusion (rows true, cols predicted):")
    for row in result.confusion:
        print("  " + " ".join(f"{v:6d}" for v in row))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "eval":
            return _run_eval(args)
        config = build_config(args, args.verb)
        if args.verb == "bias-sweep":
            return _run_sweep(config, experiments.run_bias_sweep)
        if args.verb == "lambda-sweep":
            return _run_sweep(config, experiments.run_lambda_sweep)
        if args.verb == "estimator-check":
            return _run_check(config, experiments.run_estimator_check)
        if args.verb == "grad-check":
            return _run_check(config, experiments.run_gradient_check)
        if args.verb == "train":
            return _run_train(config)
        raise AssertionError(f"unhandled verb {args.verb}")
    except (WmmdError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
