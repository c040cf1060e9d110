"""Operator-splitting solver for the time-zero decoupling field of singular
forward-backward systems.

The heavy lifting lives in the compiled extension; this package re-exports
its public surface.
"""

from ._core import (
    EGrid,
    Model,
    PathEnsemble,
    SchemeResult,
    bm_positive_model,
    cdf_eval,
    cfl_certificate,
    cubature_increments,
    default_egrid,
    discretize_terminal,
    euler_step,
    fit_loglog_slope,
    l1_error,
    lax_friedrichs,
    linear_model,
    linf_error,
    merge_particles,
    multiplicative_model,
    project_state,
    run_alt_scheme,
    run_nn_scheme,
    run_proxy,
    sample_paths,
    set_max_threads,
    spd_transport,
    spd_velocities,
    upwind,
    validate_class,
)

__all__ = [
    "EGrid",
    "Model",
    "PathEnsemble",
    "SchemeResult",
    "bm_positive_model",
    "cdf_eval",
    "cfl_certificate",
    "cubature_increments",
    "default_egrid",
    "discretize_terminal",
    "euler_step",
    "fit_loglog_slope",
    "l1_error",
    "lax_friedrichs",
    "linear_model",
    "linf_error",
    "merge_particles",
    "multiplicative_model",
    "project_state",
    "run_alt_scheme",
    "run_nn_scheme",
    "run_proxy",
    "sample_paths",
    "set_max_threads",
    "spd_transport",
    "spd_velocities",
    "upwind",
    "validate_class",
]
