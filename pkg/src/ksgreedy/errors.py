"""Exception types raised across the package."""


class KSError(Exception):
    """Base class for all errors raised by ksgreedy."""


class DimensionMismatch(KSError, ValueError):
    pass


class NotPositiveDefinite(KSError, ArithmeticError):
    """A Cholesky pivot (or eigenvalue) fell below the positivity tolerance."""

    def __init__(self, message="matrix is not positive definite", pivot_index=None):
        super().__init__(message)
        self.pivot_index = pivot_index


class NumericalResidue(KSError, ArithmeticError):
    """A quantity that must be real came back with a non-negligible imaginary part."""


class NonConvergence(KSError, ArithmeticError):
    pass


class DegenerateBound(KSError, ArithmeticError):
    pass


class InvalidFrame(KSError, ValueError):
    """The vectors do not form an equal-norm Parseval frame within tolerance."""


class FrameFormatError(InvalidFrame):
    """A frame document is malformed or inconsistent with its own header."""


class AlphaMismatch(KSError, ValueError):
    pass


class BarrierBreach(KSError):
    """No remaining candidate keeps the shifted matrix positive definite."""

    def __init__(self, iteration, message=None):
        self.iteration = iteration
        super().__init__(message or f"barrier breached at iteration {iteration}")


class IndexOutOfRange(KSError, IndexError):
    pass


class SpectralIdentityError(KSError, ArithmeticError):
    pass


class CapExceeded(KSError):
    def __init__(self, count, cap):
        self.count = count
        self.cap = cap
        super().__init__(f"{count} balanced partitions exceed the enumeration cap {cap}")


class TraceMissing(KSError):
    pass


class SelectionMismatch(KSError):
    def __init__(self, iteration, expected, got):
        self.iteration = iteration
        self.expected = expected
        self.got = got
        super().__init__(
            f"iteration {iteration}: literal selection rule picks {expected}, trace recorded {got}"
        )


class FingerprintMismatch(KSError):
    pass
