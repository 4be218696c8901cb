"""Generalization-gap estimation for overparameterized regression.

Exact hat-matrix gap formulas, Monte-Carlo and Langevin functional
variance, classical information criteria, and a reproducible experiment
harness for synthetic linear and one-hidden-layer network models.
"""

from .estimators import GapReport, efv_analytic, fv_mc, gap_delta, jfv_analytic, ric, tic
from .langevin import DivergenceError, LangevinConfig, PredictionTrace, langevin_step, lfv, run_chain
from .linmodel import (
    Dataset,
    QuasiPosterior,
    RidgeSpec,
    SvdCache,
    hat_spectrum,
    posterior_sample,
    ridge_fit,
    svd_decompose,
)
from .nn import (
    MlpParams,
    NnDataset,
    mlp_forward,
    mlp_predict,
    rho,
    rho_grad,
    theta0_construct,
    tilde_gap,
    train_gd,
)
from .synthetic import (
    SingularProfile,
    haar_orthonormal,
    make_linear_dataset,
    make_nn_dataset,
    redraw_outcomes,
    singular_values,
    sphere_moment_selftest,
)
from .harness import (
    LINEAR_COLUMNS,
    NN_COLUMNS,
    ExperimentConfig,
    LinearResult,
    NnResult,
    SelfcheckResult,
    fork_rng,
    linear_csv,
    markdown_summary,
    nn_csv,
    resolve,
    run_linear,
    run_nn,
    run_selfcheck,
    write_csv,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "SvdCache",
    "RidgeSpec",
    "QuasiPosterior",
    "svd_decompose",
    "ridge_fit",
    "hat_spectrum",
    "posterior_sample",
    "GapReport",
    "gap_delta",
    "efv_analytic",
    "fv_mc",
    "jfv_analytic",
    "tic",
    "ric",
    "DivergenceError",
    "LangevinConfig",
    "PredictionTrace",
    "langevin_step",
    "run_chain",
    "lfv",
    "MlpParams",
    "NnDataset",
    "mlp_forward",
    "mlp_predict",
    "theta0_construct",
    "rho",
    "rho_grad",
    "train_gd",
    "tilde_gap",
    "SingularProfile",
    "haar_orthonormal",
    "singular_values",
    "make_linear_dataset",
    "redraw_outcomes",
    "make_nn_dataset",
    "sphere_moment_selftest",
    "ExperimentConfig",
    "LinearResult",
    "NnResult",
    "SelfcheckResult",
    "LINEAR_COLUMNS",
    "NN_COLUMNS",
    "resolve",
    "fork_rng",
    "run_linear",
    "run_nn",
    "run_selfcheck",
    "linear_csv",
    "nn_csv",
    "write_csv",
    "markdown_summary",
    "__version__",
]
