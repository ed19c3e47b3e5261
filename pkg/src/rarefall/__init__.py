"""Sample-rejection importance sampling for equal-gain-combining outage probabilities."""

from ._backend import BACKEND
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    NumericError,
    RarefallError,
    RejectionCapError,
    TableMismatchError,
    UnsupportedScenarioError,
)
from .estimators import (
    EstimateResult,
    efficiency_report,
    estimate,
    estimate_box_is,
    estimate_naive,
    estimate_sphere_is,
)
from .mrc_oracle import box_probability, ordered_permutation_table, sphere_probability
from .scenarios import (
    ExpCorrRayleigh,
    IidRice,
    InidRayleigh,
    OrderedInidRayleigh,
    ThresholdSpec,
    build_scenario,
    gamma0,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "EstimateResult",
    "ExpCorrRayleigh",
    "IidRice",
    "InidRayleigh",
    "NumericError",
    "OrderedInidRayleigh",
    "RarefallError",
    "RejectionCapError",
    "TableMismatchError",
    "ThresholdSpec",
    "UnsupportedScenarioError",
    "box_probability",
    "build_scenario",
    "efficiency_report",
    "estimate",
    "estimate_box_is",
    "estimate_naive",
    "estimate_sphere_is",
    "gamma0",
    "ordered_permutation_table",
    "sphere_probability",
]
