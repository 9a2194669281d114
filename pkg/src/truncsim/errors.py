"""Exception types shared across the samplers."""


class TruncsimError(Exception):
    """Base class for errors raised by this package."""


class SamplingCapError(TruncsimError):
    """An accept-reject loop exhausted its proposal budget.

    Carries the number of proposals consumed before giving up; hitting the
    cap almost always means the wrong method was forced for the bounds.
    """

    def __init__(self, message: str, trials: int):
        super().__init__(f"{message} (proposals consumed: {trials})")
        self.trials = trials


class DegenerateIntervalError(TruncsimError, ValueError):
    """Truncation interval is narrower than the supported resolution."""


class NotPositiveDefiniteError(TruncsimError, ValueError):
    """Covariance matrix is not symmetric positive definite."""


class IllConditionedError(NotPositiveDefiniteError):
    """Covariance condition number is too large to invert reliably."""


class InconsistentStateError(TruncsimError):
    """Chain state produced an empty slice; state left the region."""


class ExtremeTruncationError(TruncsimError, ValueError):
    """Truncation interval carries less mass than double precision resolves."""
