"""Source locations and the error types raised across the package."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceSpan:
    """1-based position of a token or declaration in model source text."""

    line: int
    column: int
    length: int = 0

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class ModelError(Exception):
    """Base for every error detected in a model before simulation."""

    def __init__(self, message: str, span: SourceSpan | None = None):
        super().__init__(message)
        self.message = message
        self.span = span

    def __str__(self) -> str:
        if self.span is not None:
            return f"{self.span}: {self.message}"
        return self.message


class ParseError(ModelError):
    def __init__(self, span: SourceSpan, expected: str, found: str):
        super().__init__(f"expected {expected}, found {found}", span)
        self.expected = expected
        self.found = found


class DuplicateNameError(ModelError):
    def __init__(self, name: str, span: SourceSpan | None = None):
        super().__init__(f"duplicate element name {name!r}", span)
        self.name = name


class BadTableError(ModelError):
    pass


class BadUnitsError(ModelError):
    pass


class UnknownReferenceError(ModelError):
    def __init__(self, name: str, location: SourceSpan | None = None):
        super().__init__(f"reference to undeclared element {name!r}", location)
        self.name = name


class AlgebraicLoopError(ModelError):
    """Instantaneous dependency cycle among non-state elements."""

    def __init__(self, cycle: list[str]):
        super().__init__("algebraic loop: " + " -> ".join(cycle + cycle[:1]))
        self.cycle = cycle


class UnitMismatchError(ModelError):
    def __init__(self, element: str, expected, inferred, span: SourceSpan | None = None,
                 detail: str | None = None):
        super().__init__(
            detail or f"units of {element!r}: declared [{expected}] but inferred [{inferred}]",
            span,
        )
        self.element = element
        self.expected = expected
        self.inferred = inferred


class NonTimeConstantError(ModelError):
    """A smooth delay or step time argument that is not a pure time constant."""

    def __init__(self, builtin: str, element: str, detail: str, span: SourceSpan | None = None):
        super().__init__(f"{builtin} in {element!r}: {detail}", span)
        self.builtin = builtin
        self.element = element


class AmbiguousTimeUnitError(ModelError):
    pass


class NumericFaultError(Exception):
    """Simulation hit a division by zero or a non-finite value."""

    def __init__(self, element: str, message: str, time: float | None = None):
        super().__init__(message)
        self.element = element
        self.time = time

    def __str__(self) -> str:
        at = "" if self.time is None else f" at t={self.time:g}"
        return f"{self.element}{at}: {super().__str__()}"


class NoCrossingError(Exception):
    """Supply and demand schedules do not intersect over their domain."""


class LoopExplosionError(Exception):
    def __init__(self, cap: int):
        super().__init__(f"more than {cap} feedback loops; raise the cap to enumerate")
        self.cap = cap
