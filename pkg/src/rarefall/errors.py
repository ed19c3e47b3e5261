"""Exception hierarchy.

The CLI maps :class:`ConfigError` to exit code 1 and :class:`NumericError`
to exit code 2.
"""


class RarefallError(Exception):
    """Base class for all package errors."""


class ConfigError(RarefallError, ValueError):
    """Invalid scenario, threshold or run configuration."""


class UnsupportedScenarioError(ConfigError):
    pass


class NumericError(RarefallError, ArithmeticError):
    """A numerical routine could not deliver a result."""


class DomainError(NumericError, ValueError):
    """Argument outside the domain of a special function."""


class ConvergenceError(NumericError):
    """Series or iteration hit its cap before reaching tolerance."""


class RejectionCapError(NumericError):
    """Too many consecutive rejections for a single sample."""

    def __init__(self, message, proposals=0, accepted=0):
        super().__init__(message)
        self.proposals = proposals
        self.accepted = accepted


class TableMismatchError(ConfigError):
    """Permutation table built for different parameters than requested."""
