"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit 1,
assumption violations exit 2.
"""


class LevyOUError(Exception):
    pass


class DomainError(LevyOUError, ValueError):
    """An argument lies outside the domain of the operation."""


class NoMassError(LevyOUError, ValueError):
    """The measure has no mass where sampling was requested."""


class ContractViolation(LevyOUError, ValueError):
    """A caller broke a precondition (unsorted input, unvalidated kernel, ...)."""


class AssumptionViolation(LevyOUError):
    """A modelling assumption fails, e.g. a required integral diverges."""


class ConfigurationError(LevyOUError, ValueError):
    """Experiment configuration is invalid or too coarse for the request."""
