"""
BFMLIFT — Error hierarchy

Every error raised on purpose by the library derives from BfmliftError, which is
a ValueError so callers that only know about bad input still catch it.
"""
from __future__ import annotations

from typing import List, Optional


class BfmliftError(ValueError):
    """Base class for all library errors."""


class RootDatumError(BfmliftError):
    """Root datum failed eager validation (pairing, opposite pairs, reflections)."""


class WeylGroupTooLarge(BfmliftError):
    def __init__(self, bound: int):
        super().__init__(f"Weyl group not finite within bound {bound}")
        self.bound = bound


class IncompatibleRingError(BfmliftError):
    """Operands live in different variable universes."""


class VariableKindError(BfmliftError):
    """Operation not allowed on this kind of variable (h variables are polynomial)."""


class DimensionMismatchError(BfmliftError):
    def __init__(self, left: str, left_dim: int, right: str, right_dim: int):
        super().__init__(f"{left} has dimension {left_dim} but {right} has dimension {right_dim}")
        self.fields = (left, right)


class ZeroCoordinateError(BfmliftError):
    """A coordinate that must be a unit (Laurent variable, torus point) is zero."""


class GroebnerBudgetExceeded(BfmliftError):
    def __init__(self, steps: int, bound: int):
        super().__init__(f"Groebner budget exceeded: {steps} steps > bound {bound}")
        self.steps = steps
        self.bound = bound


class PolynomialParseError(BfmliftError):
    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at column {position + 1}: {text!r}")
        self.position = position


class JobValidationError(BfmliftError):
    def __init__(self, diagnostics: List[str], detail: Optional[str] = None):
        head = detail or "job document is invalid"
        super().__init__(head + ": " + "; ".join(diagnostics))
        self.diagnostics = diagnostics
