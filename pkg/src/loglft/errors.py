"""Exception hierarchy shared by all modules."""


class LftError(Exception):
    """Base class for library errors."""


class InvalidArgumentError(LftError, ValueError):
    """An argument is malformed (wrong length, non-finite, bad sign...)."""


class DomainError(LftError, ValueError):
    """A special function was evaluated at a pole."""

    def __init__(self, message, pole_index=None):
        super().__init__(message)
        self.pole_index = pole_index


class PlanError(LftError, ValueError):
    """Transform parameters are inadmissible or inconsistent."""


class CorrectionError(LftError):
    """The residue tail fit could not be carried out.

    ``result`` holds the unmodified transform result.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class RangeError(LftError, ValueError):
    """Tabulated data do not cover the requested grid."""


class EstimationError(LftError):
    """Exponent or analytic-strip estimation failed."""


class ConvergenceError(LftError):
    """A fixed-point iteration did not reach its tolerance."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class OracleError(LftError):
    """The direct time-stepping reference became unstable."""


class BranchError(LftError):
    """No root of the glass equation has a positive real part."""
