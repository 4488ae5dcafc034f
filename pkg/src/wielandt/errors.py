"""Exception hierarchy shared by all modules."""


class WielandtError(Exception):
    """Base class for every error raised by this package."""


class InputError(WielandtError, ValueError):
    """Bad user input: shapes, indices, file contents."""


class NotSquare(InputError):
    pass


class NotHermitian(InputError):
    def __init__(self, row: int, col: int, deviation: float, tol: float):
        self.row, self.col, self.deviation, self.tol = row, col, deviation, tol
        super().__init__(
            f"matrix is not Hermitian: |M[{row},{col}] - conj(M[{col},{row}])| = "
            f"{deviation:.3e} exceeds tolerance {tol:.3e}"
        )


class DimensionMismatch(InputError):
    pass


class IndexOutOfRange(InputError):
    pass


class LengthMismatch(InputError):
    pass


class BadSpec(InputError):
    pass


class ScanTooLarge(InputError):
    pass


class ConvergenceFailure(WielandtError, ArithmeticError):
    pass


class CombinatorialCap(WielandtError):
    """Raised when a candidate enumeration would exceed its configured cap."""

    def __init__(self, count: int, cap: int, what: str = "combinations"):
        self.count, self.cap = count, cap
        super().__init__(f"{count} {what} exceed the cap of {cap}")


class CertificationFailure(WielandtError):
    """An equality certificate could not be built or re-verified."""

    def __init__(self, reason: str, location: dict | None = None):
        self.reason = reason
        self.location = location or {}
        detail = ", ".join(f"{k}={v}" for k, v in self.location.items())
        super().__init__(f"{reason} ({detail})" if detail else reason)


class EqualityNotDetected(CertificationFailure):
    """The certification precondition failed: the inequality is strict."""
