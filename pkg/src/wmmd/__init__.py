"""Weighted maximum mean discrepancy for unsupervised domain adaptation.

The package provides multi-kernel MMD estimators (quadratic and linear-time),
class-prior-reweighted variants that cancel class weight bias between
domains, and a classification-EM trainer that jointly pseudo-labels target
data, estimates per-class auxiliary weights, and fits a small feedforward
classifier under the weighted-MMD regularizer.
"""

from .cem import (GAMMA_GRID, LAMBDA_GRID, EvalResult, TrainConfig,
                  TrainState, c_step, e_step, estimate_source_priors,
                  evaluate, m_step, train)
from .data import Dataset, DomainPair, MixtureSpec, load_csv, make_bias_pair, sample_mixture
from .exceptions import (DataError, DegenerateWeightsError, LabelError,
                         NumericError, ParameterError, ParseError,
                         SchemaError, ShapeError, WmmdError)
from .kernels import (KernelSpec, default_factor_spec, median_heuristic,
                      multi_kernel, multi_kernel_grad_x, rbf, spec_from_data)
from .mmd import (AuxWeights, QuadTuple, h_l, h_lw, h_lw_grad, mmd2_linear,
                  mmd2_quadratic, mmd2_quadratic_unbiased, wmmd2_linear,
                  wmmd2_quadratic)
from .model import (ForwardTrace, LossTerms, ModelConfig, ModelParams,
                    backward, forward, load_params, loss, loss_terms,
                    save_params)

__version__ = "0.1.0"
