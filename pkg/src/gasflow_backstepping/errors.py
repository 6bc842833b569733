"""Exception types raised across the package."""


class PipelineError(Exception):
    """Base class for all package errors."""


class InvalidInputError(PipelineError, ValueError):
    pass


class DomainError(PipelineError, ValueError):
    """A coordinate lies outside the pipe or the unit interval."""


class InfeasibleEquilibriumError(PipelineError, ValueError):
    """The inlet density is too low to sustain the nominal flow along the pipe."""


class UnobservableError(PipelineError, ValueError):
    pass


class InvalidGainError(PipelineError, ValueError):
    pass


class SolverDivergenceError(PipelineError, RuntimeError):
    pass


class ConfigurationError(PipelineError, ValueError):
    """Bad simulation settings, e.g. a time step violating the CFL limit."""


class BlowUpError(PipelineError, RuntimeError):
    """The simulated density left the physically admissible range."""


class ValidationError(PipelineError, ValueError):
    """A scenario file failed schema or invariant checks."""

    def __init__(self, message, field=None, line=None):
        super().__init__(message)
        self.field = field
        self.line = line
