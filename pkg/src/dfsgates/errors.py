from __future__ import annotations

from typing import Optional


class DfsGatesError(Exception):
    """Root of every error raised by dfsgates."""


class NumericalError(DfsGatesError):
    """A computation could not produce a meaningful number (CLI exit 2)."""


class TruncationError(DfsGatesError, ValueError):
    pass


class ScheduleRangeError(DfsGatesError, ValueError):
    pass


class PreconditionError(DfsGatesError, ValueError):
    pass


class OpenPathError(DfsGatesError, ValueError):
    pass


class DegenerateInputError(DfsGatesError, ValueError):
    pass


class RamanDetuningError(DfsGatesError, ZeroDivisionError):
    """Δ = 0 has no E-Raman limit; use the E-STIRAP path instead."""


class UndefinedFidelityError(NumericalError):
    pass


class UndefinedAngleError(NumericalError):
    pass


class UndefinedPhaseError(NumericalError):
    pass


class IntegrationDivergedError(NumericalError):
    def __init__(self, step: int, time: float, message: Optional[str] = None) -> None:
        self.step = step
        self.time = time
        super().__init__(message or f"integration diverged at step {step} (t={time:.6g})")


class ConfigError(DfsGatesError, ValueError):
    """Bad configuration; ``field`` names the offending key when known."""

    def __init__(self, message: str, field: Optional[str] = None) -> None:
        self.field = field
        super().__init__(message if field is None else f"{field}: {message}")


class UnknownFigureError(DfsGatesError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else "unknown figure"


class NormGrowthError(NumericalError):
    """The conditional norm grew between recorded samples."""
