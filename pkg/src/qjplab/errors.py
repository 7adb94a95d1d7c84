"""Exception hierarchy shared by every qjplab module."""


class QJPLabError(Exception):
    """Base class for all qjplab errors."""


class NotHermitian(QJPLabError, ValueError):
    pass


class DimMismatch(QJPLabError, ValueError):
    pass


class ResolutionError(QJPLabError, ValueError):
    """Meter profile is not resolved by, or not contained in, the grid."""


class AliasError(QJPLabError, ValueError):
    """A translation or kick would push the profile past the periodic boundary."""


class IndefiniteConditioning(QJPLabError, ValueError):
    """The conditioning outcome has (numerically) vanishing probability."""


class DegenerateConditioning(QJPLabError, ValueError):
    """A rank-1 conditioning projector was required."""


class OrthogonalSelection(QJPLabError, ValueError):
    """Pre- and post-selected states are orthogonal."""


class StepTooLarge(QJPLabError, ValueError):
    """Richardson extrapolation residual exceeded its tolerance."""


class SingularTransform(QJPLabError, ValueError):
    """T_alpha is not invertible (real alpha)."""


class MarginalViolation(QJPLabError, ArithmeticError):
    """A quasi-probability table failed its marginal consistency check."""


class EigenvectorInput(QJPLabError, ValueError):
    pass


class TrivialOperator(QJPLabError, ValueError):
    pass


class ParseError(QJPLabError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(QJPLabError, ValueError):
    """Scenario validation failure; ``issues`` holds ``(field_path, reason)`` pairs."""

    def __init__(self, issues):
        self.issues = [(str(path), str(reason)) for path, reason in issues]
        text = "; ".join(f"{p}: {r}" for p, r in self.issues)
        super().__init__(text or "invalid scenario")
