"""Exception hierarchy shared by all modules."""


class WealthShareError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(WealthShareError, ValueError):
    """Input data violates a structural requirement (weights, ordering, ...)."""


class ParseError(ValidationError):
    """A CSV row could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class AlignmentError(ValidationError):
    """Implicate tables do not describe the same households."""


class ConfigurationError(WealthShareError, ValueError):
    """Incompatible options or inputs (overlapping sources, empty search range)."""


class DomainError(WealthShareError, ValueError):
    """Argument outside the domain of a closed-form expression."""


class InfiniteMeanError(DomainError):
    """The Pareto exponent is <= 1, so the first moment diverges."""


class EmptyTailError(WealthShareError, ValueError):
    """No observations at or above the requested threshold."""


class DegenerateTailError(WealthShareError, ValueError):
    """Tail data carries no information about the exponent."""


class InsufficientDataError(WealthShareError, ValueError):
    """Too few distinct points for the requested statistic."""


class InfeasibleRescaleError(WealthShareError, ValueError):
    """Tail re-normalization demands more households than the body holds."""


class NoRootError(WealthShareError, RuntimeError):
    """The continuity equation has no sign change on the scanned grid."""
