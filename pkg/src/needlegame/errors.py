"""Exception hierarchy shared by all needlegame modules."""


class NeedleGameError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(NeedleGameError, ValueError):
    """A configuration value violates its invariant."""


class InvalidPlanError(NeedleGameError, ValueError):
    """Rotation indices are non-monotone, out of range, or too many."""


class PlanInfeasibleError(NeedleGameError):
    """The rotation budget is exhausted."""


class IllegalActionError(NeedleGameError):
    """A game action is not enabled in the current phase."""


class InsufficientDataError(NeedleGameError, ValueError):
    """Too few observed points to calibrate."""


class CoverageError(NeedleGameError, ValueError):
    """A simulated trace does not cover the observed step indices."""


class RangeError(NeedleGameError, OverflowError):
    """A fixed-point value does not fit the integer range."""


class TraceParseError(NeedleGameError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NoStrategyError(NeedleGameError):
    """No winning motion plan exists for the request.

    ``calibration`` carries the calibration result when the failure happened
    inside the fitting pipeline, so callers can see which insertion angle was
    used.
    """

    def __init__(self, message: str, calibration=None):
        super().__init__(message)
        self.calibration = calibration
