"""Multigenerational status-transmission models.

Simulation of pedigree panels under five model families, closed-form kinship
moments, regression estimators, and the shipped replication experiments. All
heavy lifting happens in the C++ extension; this package re-exports it.
"""

from ._core import (
    DataError,
    InfeasibleError,
    Panel,
    UsageError,
    __version__,
    analytic_moments,
    beta_k_estimate,
    duality_gp_coefficient,
    fit_latent_factor,
    group_level_estimate,
    iterated_prediction,
    load_panel,
    multigen_regression,
    poverty_persistence_curve,
    replicate,
    sibling_regression,
    simulate,
    validate_model,
)

__all__ = [
    "DataError",
    "InfeasibleError",
    "Panel",
    "UsageError",
    "__version__",
    "analytic_moments",
    "beta_k_estimate",
    "duality_gp_coefficient",
    "fit_latent_factor",
    "group_level_estimate",
    "iterated_prediction",
    "load_panel",
    "multigen_regression",
    "poverty_persistence_curve",
    "replicate",
    "sibling_regression",
    "simulate",
    "validate_model",
]
