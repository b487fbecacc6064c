"""Uncertainty quantification for the complex LASSO on bounded orthonormal systems."""

from .bos_design import (
    ExplicitBos,
    PreconditionedHaarFourier,
    Preconditioner,
    SamplingPattern,
    SubsampledFourier,
    build_preconditioner,
    sample_density_rows,
    sample_uniform_rows,
)
from .classo import (
    LassoConfig,
    LassoSolution,
    cross_validate_lambda,
    estimate_noise_scaled_lasso,
    lambda0,
    lambda0_preconditioned,
    solve_classo,
    solve_classo_reference,
)
from .desparsify import desparsify, desparsify_haar, remainder_bound
from .experiments import ExperimentConfig, LambdaRule, run_experiment
from .haar import haar_forward, haar_inverse, kappa_weights
from .uq import confidence_circle, confidence_interval, hitrate

__version__ = "0.1.0"
