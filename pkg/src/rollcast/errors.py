"""Exception hierarchy shared across the package."""


class RollcastError(Exception):
    """Base class for every error raised by rollcast."""


class DomainError(RollcastError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class ContractError(RollcastError, ValueError):
    """Inputs violate a shape or length contract."""


class SchemaError(RollcastError):
    """A CSV file does not have the expected header."""


class ParseError(RollcastError):
    """A cell could not be parsed as a number."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class EmptyDataError(RollcastError):
    """No usable observations were found."""


class SplitError(RollcastError):
    """A train/test split would leave one side empty."""


class ScalerError(RollcastError):
    """The scaler cannot be fitted (constant training series)."""


class DataError(RollcastError):
    """A series is too short or otherwise unusable for the model."""


class ConvergenceError(RollcastError):
    """The ARIMA optimizer could not beat the zero-coefficient baseline."""

    def __init__(self, message, css, baseline_css):
        super().__init__(message)
        self.css = css
        self.baseline_css = baseline_css


class NumericError(RollcastError, FloatingPointError):
    """A non-finite value appeared inside a computation."""


class DivergenceError(NumericError):
    """Training produced a non-finite loss."""

    def __init__(self, message, epoch, step):
        super().__init__(message)
        self.epoch = epoch
        self.step = step


class ForecastError(RollcastError):
    """A walk-forward step failed; carries the failing test index."""

    def __init__(self, message, step):
        super().__init__(message)
        self.step = step
