"""Exception hierarchy shared by every module of the toolkit."""


class SubLabError(Exception):
    """Base class for all toolkit errors."""


class SpecError(SubLabError, ValueError):
    """A subordinator specification violates its invariants."""


class DomainError(SubLabError, ValueError):
    """An argument lies outside the domain of a function."""


class NumericError(SubLabError, ArithmeticError):
    """A numerical routine (quadrature, grid integration) failed to converge."""


class ParameterError(SubLabError, ValueError):
    """A tuning parameter is outside the range the routine supports."""


class NeverCrossesError(SubLabError):
    """The process has neither drift nor jumps above the cutoff."""


class ResourceError(SubLabError):
    """A simulation would exceed its event budget."""

    def __init__(self, message, replica=None):
        super().__init__(message)
        self.replica = replica


class HypothesisError(SubLabError):
    """A theorem's hypothesis fails for the requested check."""


class ConfigError(SubLabError, ValueError):
    """An experiment configuration cannot be loaded."""


class UnknownFamilyError(ConfigError):
    """A configuration names a family, slowly varying kind or c-function that does not exist."""


class RangeError(ConfigError):
    """A numeric configuration field is outside its documented range."""


class FormatError(SubLabError, ValueError):
    """A CSV file does not match any known schema."""
