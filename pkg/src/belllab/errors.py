"""Exception types raised across belllab."""


class BellLabError(Exception):
    pass


class NotHermitian(BellLabError, ValueError):
    pass


class NoConvergence(BellLabError, RuntimeError):
    pass


class DimensionMismatch(BellLabError, ValueError):
    pass


class NotUnitary(BellLabError, ValueError):
    pass


class NotUnit(BellLabError, ValueError):
    pass


class OutOfRange(BellLabError, ValueError):
    pass


class VerificationFailed(BellLabError):
    def __init__(self, message, discrepancy=None):
        super().__init__(message)
        self.discrepancy = discrepancy


class NotRelated(BellLabError, ValueError):
    pass


class DegenerateSpectrum(NotRelated):
    """Relatedness is undefined: an operator has a repeated eigenvalue."""


class IndexSpaceMismatch(BellLabError, ValueError):
    pass


class InsufficientData(BellLabError, ValueError):
    pass


class InconsistentMarginals(BellLabError, ValueError):
    pass


class LocalityViolation(BellLabError, RuntimeError):
    """A message was sent over a channel the protocol topology does not have."""
