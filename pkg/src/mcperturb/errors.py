"""Exception hierarchy shared by every module."""


class ChainError(ValueError):
    """Base class for invalid chains, measures and specs."""


class NegativeEntry(ChainError):
    def __init__(self, row, col, value):
        self.row, self.col, self.value = row, col, value
        super().__init__(f"negative entry {value!r} at ({row}, {col})")


class RowSumViolation(ChainError):
    def __init__(self, row, deviation):
        self.row, self.deviation = row, deviation
        super().__init__(f"row {row} sums to 1{deviation:+.3g}")


class ZeroMassState(ChainError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"reference distribution has zero mass at state {index}")


class NotConverged(ChainError):
    def __init__(self, max_iter, detail=""):
        self.max_iter = max_iter
        msg = f"no convergence within {max_iter} iterations"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class Reducible(ChainError):
    pass


class NotReversible(ChainError):
    def __init__(self, violation):
        self.violation = violation
        super().__init__(f"detailed balance violated by {violation:.3g}")


class GapClosed(ChainError):
    def __init__(self, alpha):
        self.alpha = alpha
        super().__init__(f"spectral gap {alpha:.3g} is numerically zero")


class NotApplicable(ChainError):
    """Raised when a perturbation bound is requested with epsilon >= alpha."""

    def __init__(self, alpha, epsilon, formula=""):
        self.alpha, self.epsilon = alpha, epsilon
        where = f"{formula}: " if formula else ""
        super().__init__(f"{where}epsilon={epsilon!r} >= alpha={alpha!r}")


class SupportMismatch(ChainError):
    def __init__(self, x, y):
        self.pair = (x, y)
        super().__init__(f"q({y}|{x}) and q({x}|{y}) disagree on positivity")


class NegativeRatio(ChainError):
    pass


class InsufficientReplicates(ChainError):
    pass


class CapExceeded(ChainError):
    pass
