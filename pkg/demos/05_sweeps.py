"""Reduced-scale bias and tradeoff sweeps.

Runs the two experiment protocols at a fraction of their default size and
prints the seed-averaged tables. The full-size protocols run through the
CLI (`wmmd bias-sweep`, `wmmd lambda-sweep`) and write CSV/JSON artifacts.
"""
import numpy as np

from wmmd.cem import TrainConfig
from wmmd.data import MixtureSpec
from wmmd.experiments import RunConfig, run_bias_sweep, run_lambda_sweep

config = RunConfig(
    mixture=MixtureSpec(np.array([[0.0, 0.0], [4.0, 0.0]]), np.ones(2),
                        np.array([0.5, 0.5]), np.full((2, 2), 1.0)),
    train=TrainConfig(lam=0.7, gamma=0.1, epochs=15, learning_rate=0.05),
    hidden_dims=(16, 8),
    seeds=(0, 1, 2),
    n_source=200,
    n_target=200,
    lambda_grid=(0.0, 0.1, 0.7, 2.0),
)

print("=== bias sweep (3 seeds, 15 epochs) ===")
result = run_bias_sweep(config)
print("bias | src-only  dan   wdan")
for bias in config.bias_levels:
    cells = [result.summary["cells"][f"bias={bias:g},arm={arm}"]["mean"]
             for arm in ("src-only", "dan", "wdan")]
    print(f" {bias:.1f} |  {cells[0]:.3f}  {cells[1]:.3f}  {cells[2]:.3f}")
print("expected shape: dan decays with bias, wdan stays close to its level")

print("\n=== lambda sweep at bias 0.8 ===")
result = run_lambda_sweep(config)
print("lambda | wdan   dan")
for lam in config.lambda_grid:
    cells = [result.summary["cells"][f"lambda={lam:g},arm={arm}"]["mean"]
             for arm in ("wdan", "dan")]
    print(f" {lam:5.2f} | {cells[0]:.3f}  {cells[1]:.3f}")
best = result.summary["best_lambda"]["wdan"]
print(f"best wdan lambda: {best['lambda']} (mean accuracy {best['mean']:.3f})")
