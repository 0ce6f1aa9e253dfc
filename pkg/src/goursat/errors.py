"""Exception types raised across the package."""


class GoursatError(Exception):
    """Base class."""


class InvalidDivisor(GoursatError, ValueError):
    pass


class DegenerateDivisor(GoursatError):
    """det M vanishes at degree ``m``: no unique formal solution there.

    ``report`` optionally carries the partial solve up to the failing degree.
    """

    def __init__(self, m: int, det=None, report=None):
        self.m = m
        self.det = det
        self.report = report
        super().__init__(f"degenerate divisor at degree m={m} (|det M| = {abs(det) if det is not None else 0:.3e})")


class SingularOperator(GoursatError):
    def __init__(self, m: int, pivot_ratio: float = 0.0):
        self.m = m
        self.pivot_ratio = pivot_ratio
        super().__init__(f"Fischer operator numerically singular at degree m={m} (pivot ratio {pivot_ratio:.3e})")


class NotDivisible(GoursatError, ArithmeticError):
    pass


class AllZeroSeries(GoursatError, ValueError):
    pass


class PrecisionExhausted(GoursatError):
    pass


class ScaleExceeded(GoursatError, ValueError):
    pass


class UninformativeInterval(GoursatError, ValueError):
    pass


class RootOfUnity(GoursatError, ZeroDivisionError):
    pass
