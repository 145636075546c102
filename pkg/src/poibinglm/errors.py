"""Exception hierarchy shared across the package."""


class PoibinGLMError(Exception):
    """Base class for all package errors."""


class InputError(PoibinGLMError, ValueError):
    """Bad user input: malformed files, configs or arguments."""


class FormatError(InputError):
    pass


class ValidationError(InputError):
    pass


class SplitError(InputError):
    pass


class DomainError(PoibinGLMError, ValueError):
    """A count or probability lies outside the support of the distribution."""


class CapacityError(PoibinGLMError, ValueError):
    pass


class ShapeError(PoibinGLMError, ValueError):
    pass


class DegenerateDistributionError(PoibinGLMError, ArithmeticError):
    """Zero variance: every success probability is exactly 0 or 1."""


class NumericError(PoibinGLMError, ArithmeticError):
    """Non-finite gradient or loss encountered during training."""
