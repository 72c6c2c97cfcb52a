"""各模块共用的异常层次。"""
from __future__ import annotations

from typing import Any, Dict, Mapping, Optional


class CuflError(Exception):
    """Base class; carries an optional source location for diagnostics."""

    def __init__(self, message: str, line: Optional[int] = None, col: Optional[int] = None) -> None:
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def __str__(self) -> str:
        if self.line is not None:
            return f"{self.message} (line {self.line}, col {self.col})"
        return self.message


class ParseError(CuflError):
    pass


# --- bounds -----------------------------------------------------------------

class BoundError(CuflError):
    pass


class NonPositive(BoundError):
    pass


class UnboundSizeVar(BoundError):
    def __init__(self, name: str) -> None:
        super().__init__(f"unbound size variable {name!r}")
        self.name = name


class Overflow(BoundError):
    pass


class RewriteBudgetExceeded(BoundError):
    pass


# --- checker ----------------------------------------------------------------

class TypeCheckError(CuflError):
    pass


class TypeMismatch(TypeCheckError):
    pass


class UnboundVariable(TypeCheckError):
    def __init__(self, name: str) -> None:
        super().__init__(f"unbound variable {name!r}")
        self.name = name


class NonArrowApplied(TypeCheckError):
    pass


class RecShapeError(TypeCheckError):
    pass


class PeelError(TypeCheckError):
    pass


class BoundViolation(TypeCheckError):
    def __init__(self, message: str, witness: Mapping[str, int]) -> None:
        super().__init__(message)
        self.witness: Dict[str, int] = dict(witness)


# --- evaluator --------------------------------------------------------------

class EvalError(CuflError):
    pass


class StuckTerm(EvalError):
    pass


class FuelExhausted(EvalError):
    def __init__(self, message: str, trace: Any) -> None:
        super().__init__(message)
        self.trace = trace


# --- encoder / emulation ----------------------------------------------------

class EncodingError(CuflError):
    pass


class MalformedNumeral(EncodingError):
    pass


class EmulationError(CuflError):
    pass


class IllFormedLoop(EmulationError):
    pass


class StepLimitExceeded(EmulationError):
    def __init__(self, message: str, config: Any = None) -> None:
        super().__init__(message)
        self.config = config


class IllFormedMachine(EmulationError):
    pass


class AlphabetTooLarge(EmulationError):
    pass


class UnsupportedType(EmulationError):
    pass
