"""Observer-based backstepping boundary control of isothermal gas flow in a pipe.

The inlet density is actuated to hold the outlet density at its steady value
while the outlet flow is driven by a known or partly uncertain exosystem.
"""

from .errors import (
    BlowUpError,
    ConfigurationError,
    DomainError,
    InfeasibleEquilibriumError,
    InvalidGainError,
    InvalidInputError,
    PipelineError,
    SolverDivergenceError,
    UnobservableError,
    ValidationError,
)
from .exosystem import Exosystem, Uncertainty, matrix_exp, place_H
from .pipeline import PipelineParams, paper_iv_params
from .scenario import Scenario, load_scenario, preset
from .simulate import run_closed_loop

__all__ = [
    "BlowUpError",
    "ConfigurationError",
    "DomainError",
    "Exosystem",
    "InfeasibleEquilibriumError",
    "InvalidGainError",
    "InvalidInputError",
    "PipelineError",
    "PipelineParams",
    "Scenario",
    "SolverDivergenceError",
    "Uncertainty",
    "UnobservableError",
    "ValidationError",
    "load_scenario",
    "matrix_exp",
    "paper_iv_params",
    "place_H",
    "preset",
    "run_closed_loop",
]
