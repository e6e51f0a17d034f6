"""Gradient verification by central finite differences.

Checks the two analytic gradient paths used in training: the quad-tuple
kernel gradients of the weighted h-statistic, and the full objective
gradient through the classifier (cross-entropy terms plus the weighted-MMD
regularizer injected at the tap layers).
"""
import numpy as np

from wmmd import (AuxWeights, KernelSpec, ModelConfig, ModelParams, QuadTuple,
                  backward, forward, h_lw, h_lw_grad, loss)
from wmmd.gradcheck import (block_relative_error, central_difference,
                            gradients_relative_error, numerical_param_grads)

rng = np.random.default_rng(0)
spec = KernelSpec([0.5, 1.0, 2.0])
priors = np.array([0.5, 0.5])
weights = AuxWeights(priors, priors, np.array([1.6, 0.4]))

# --- quad-tuple operator gradients --------------------------------------
vecs = rng.uniform(-1, 1, size=(4, 3))
z = QuadTuple(*vecs, ys1=0, ys2=1)
analytic = h_lw_grad(z, weights, spec)
names = ("xs1", "xs2", "xt1", "xt2")
print("weighted h-statistic gradients vs finite differences:")
for k, name in enumerate(names):
    def f(v, k=k):
        parts = [vecs[j] if j != k else v for j in range(4)]
        return h_lw(QuadTuple(*parts, ys1=0, ys2=1), weights, spec)
    numeric = central_difference(f, vecs[k].copy())
    err = block_relative_error(analytic[k], numeric)
    print(f"  d/d{name}: relative error {err:.2e}")

# --- full objective gradient --------------------------------------------
cfg = ModelConfig.default(3, 2, hidden_dims=(6, 4), activation="tanh")
params = ModelParams.init(cfg, seed=1)
src = rng.uniform(-1, 1, size=(8, 3))
tgt = rng.uniform(-1, 1, size=(8, 3))
src_labels = rng.integers(0, 2, size=8)
tgt_pseudo = rng.integers(0, 2, size=8)
lam, gamma = 0.4, 0.3

analytic = backward(params, forward(params, src), src_labels,
                    forward(params, tgt), tgt_pseudo, weights, spec, lam, gamma)
numeric = numerical_param_grads(
    lambda p: loss(p, src, src_labels, tgt, tgt_pseudo, weights, spec, lam, gamma),
    params)
err = gradients_relative_error(analytic, numeric)
print(f"\nfull objective (lambda={lam}, gamma={gamma}): max relative error {err:.2e}")
print("tolerance used by the verification suite: 1e-4")
