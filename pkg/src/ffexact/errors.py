"""Exception hierarchy shared by all modules."""


class FFExactError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(FFExactError, ValueError):
    """A caller-supplied argument is malformed or out of range."""


class SizeLimitError(FFExactError):
    """Requested instance exceeds the configured size maximum."""


class UndefinedModelError(FFExactError):
    """The model cannot be fit at all (e.g. all counts zero)."""


class BoundaryMLEError(FFExactError):
    """Sufficient statistic lies on the boundary; the MLE does not exist.

    The asymptotic test is unavailable; exact/MCMC conditional tests
    remain valid.
    """


class TruncatedFiberError(FFExactError):
    """An operation requiring a complete fiber was given a truncated one."""


class EnumerationInfeasibleError(FFExactError):
    """Fiber enumeration hit the element cap; exact computation refused."""


class ConfigurationError(FFExactError):
    """Inconsistent run configuration (e.g. empty basis on a live fiber)."""
