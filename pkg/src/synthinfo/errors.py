"""Exception hierarchy shared across the package."""


class SynthInfoError(Exception):
    """Base class for all package errors."""


class ParameterError(SynthInfoError, ValueError):
    """A parameter value lies outside its (open) domain."""


class DomainError(SynthInfoError, ValueError):
    """An observation lies outside the sample space of a family."""


class FitError(SynthInfoError, ValueError):
    """A generator or estimator could not be fitted to the data."""


class BoundaryError(FitError):
    """The likelihood is maximised on the boundary of the parameter domain."""


class SchemaError(SynthInfoError, ValueError):
    """Data does not have the shape an operation requires (e.g. missing labels)."""


class DataError(SynthInfoError, ValueError):
    """Observed summary statistics are mutually inconsistent."""


class UnsupportedOperation(SynthInfoError, TypeError):
    """The operation is not defined for this kind of object."""


class EnumerationBudgetError(SynthInfoError, MemoryError):
    """Exact enumeration would exceed the configured outcome budget."""


class ConfigError(SynthInfoError, ValueError):
    """Experiment configuration is invalid."""
