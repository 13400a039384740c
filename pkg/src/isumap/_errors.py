"""Exception and warning types shared across the package."""


class IsumapError(Exception):
    """Base class for all errors raised by isumap."""


class InvalidParameterError(IsumapError, ValueError):
    """A parameter is outside its admissible range (e.g. ``k >= n``)."""


class InvalidInputError(IsumapError, ValueError):
    """Input data violates a structural precondition."""


class DegenerateScaleWarning(UserWarning):
    """A local scale could not be determined and a fallback was used."""


class InfiniteDistanceWarning(UserWarning):
    """Infinite distances were replaced by a finite surrogate."""
