"""Dimensional analysis for model equations.

Units are products of opaque symbols with integer exponents; there is no
conversion table, so `day` and `week` are simply different symbols.  Every
element's expression is inferred bottom-up from the declared units of the
elements it references and compared against its own declaration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    AmbiguousTimeUnitError,
    BadUnitsError,
    NonTimeConstantError,
    SourceSpan,
    UnitMismatchError,
)

__all__ = ["UnitExpr", "DIMENSIONLESS", "UnitEntry", "UnitReport", "check_units", "time_unit"]


class UnitExpr:
    """Product of unit symbols raised to integer exponents.

    An empty exponent map is dimensionless.  Zero exponents are never stored,
    so equality of the maps is equality of units.
    """

    __slots__ = ("exponents",)

    def __init__(self, exponents: dict[str, int] | None = None):
        cleaned = {s: e for s, e in (exponents or {}).items() if e != 0}
        self.exponents: dict[str, int] = cleaned

    @property
    def dimensionless(self) -> bool:
        return not self.exponents

    def __eq__(self, other: object) -> bool:
        return isinstance(other, UnitExpr) and self.exponents == other.exponents

    def __hash__(self) -> int:
        return hash(frozenset(self.exponents.items()))

    def __mul__(self, other: "UnitExpr") -> "UnitExpr":
        merged = dict(self.exponents)
        for s, e in other.exponents.items():
            merged[s] = merged.get(s, 0) + e
        return UnitExpr(merged)

    def __truediv__(self, other: "UnitExpr") -> "UnitExpr":
        merged = dict(self.exponents)
        for s, e in other.exponents.items():
            merged[s] = merged.get(s, 0) - e
        return UnitExpr(merged)

    def __str__(self) -> str:
        if self.dimensionless:
            return "dimensionless"
        num = sorted((s, e) for s, e in self.exponents.items() if e > 0)
        den = sorted((s, e) for s, e in self.exponents.items() if e < 0)

        def atom(sym: str, exp: int) -> str:
            return sym if exp == 1 else f"{sym}^{exp}"

        if not num:
            # no positive part: render with explicit negative exponents
            return "*".join(atom(s, e) for s, e in den)
        text = "*".join(atom(s, e) for s, e in num)
        for s, e in den:
            text += "/" + atom(s, -e)
        return text

    def __repr__(self) -> str:
        return f"UnitExpr({self.exponents!r})"

    def single_symbol(self) -> str | None:
        """The lone symbol when this is sym^1, else None."""
        if len(self.exponents) == 1:
            sym, exp = next(iter(self.exponents.items()))
            if exp == 1:
                return sym
        return None


DIMENSIONLESS = UnitExpr()

# sentinel: the time symbol has not been established yet, skip cross-checks
_UNKNOWN_TIME = object()


def parse_unit_expr(text: str, span: SourceSpan | None = None) -> UnitExpr:
    """Parse the bracket grammar: symbols joined by * and / with ^int exponents."""
    stripped = text.strip()
    if stripped == "dimensionless":
        return DIMENSIONLESS
    if not stripped:
        raise BadUnitsError("empty units expression", span)
    exponents: dict[str, int] = {}
    sign = 1
    for i, part in enumerate(_split_units(stripped, span)):
        if i > 0:
            sep, part = part[0], part[1:]
            sign = -1 if sep == "/" else 1
        sym, exp = _parse_unit_atom(part, span)
        exponents[sym] = exponents.get(sym, 0) + sign * exp
    return UnitExpr(exponents)


def _split_units(text: str, span: SourceSpan | None) -> list[str]:
    # keep the separator attached to every part after the first
    parts: list[str] = []
    current = ""
    for ch in text:
        if ch in "*/":
            if not current or (parts and len(current) == 1 and current in "*/"):
                raise BadUnitsError(f"malformed units {text!r}", span)
            parts.append(current)
            current = ch
        else:
            current += ch
    if not current or (parts and len(current) == 1 and current in "*/"):
        raise BadUnitsError(f"malformed units {text!r}", span)
    parts.append(current)
    return parts


def _parse_unit_atom(part: str, span: SourceSpan | None) -> tuple[str, int]:
    part = part.strip()
    if "^" in part:
        sym, _, exp_text = part.partition("^")
        try:
            exp = int(exp_text)
        except ValueError:
            raise BadUnitsError(f"bad exponent {exp_text!r}", span) from None
    else:
        sym, exp = part, 1
    sym = sym.strip()
    if not sym or not sym.replace("_", "").isalnum() or sym[0].isdigit():
        raise BadUnitsError(f"bad unit symbol {sym!r}", span)
    if sym == "dimensionless":
        raise BadUnitsError("'dimensionless' cannot be combined with other symbols", span)
    return sym, exp


@dataclass(frozen=True)
class UnitEntry:
    element: str
    declared: UnitExpr
    inferred: UnitExpr


@dataclass
class UnitReport:
    """Per-element inferred units plus the model's time symbol."""

    entries: list[UnitEntry] = field(default_factory=list)
    time_symbol: str | None = None


def time_unit(model) -> str:
    """The single time symbol implied by stock units = net-flow units x time.

    Raises AmbiguousTimeUnitError when stocks disagree, and UnitMismatchError
    when a stock/net-flow ratio is not a single symbol to the first power.
    """
    symbol = _time_from_stocks(model)
    if symbol is None:
        raise AmbiguousTimeUnitError("model declares no stock to fix a time unit")
    return symbol


def _time_from_stocks(model) -> str | None:
    from .core import Kind

    symbol: str | None = None
    for el in model.elements:
        if el.kind is not Kind.STOCK:
            continue
        flow_units = _infer(el.expression, model, el, _UNKNOWN_TIME)
        ratio = el.units / flow_units
        sym = ratio.single_symbol()
        if sym is None:
            raise UnitMismatchError(
                el.name, el.units, flow_units, el.span,
                detail=f"stock {el.name!r} units [{el.units}] are not its net-flow "
                       f"units [{flow_units}] times a single time symbol",
            )
        if symbol is None:
            symbol = sym
        elif symbol != sym:
            raise AmbiguousTimeUnitError(
                f"stocks imply both {symbol!r} and {sym!r} as the time unit"
            )
    return symbol


def check_units(model) -> UnitReport:
    """Verify every element's declared units against its inferred units.

    Rules: + and - need identical operand units; * and / combine exponents;
    literals are dimensionless; smooth keeps its input's units and needs a
    time-unit delay; step inherits the enclosing declaration; lookup maps
    table domain units to range units; a stock's units equal its net-flow
    units times the time unit.  Raises on the first failing element in
    declaration order.
    """
    from .core import Kind

    report = UnitReport()
    report.time_symbol = _time_from_stocks(model)

    for el in model.elements:
        if el.kind is Kind.TABLE:
            continue
        if el.kind is Kind.CONST:
            inferred = el.units  # a constant's declaration is authoritative
        elif el.kind is Kind.STOCK:
            flow_units = _infer(el.expression, model, el, report.time_symbol)
            inferred = flow_units * UnitExpr({report.time_symbol: 1})
            if el.initial is not None and not _is_literal(el.initial):
                init_units = _infer(el.initial, model, el, report.time_symbol)
                if init_units != el.units:
                    raise UnitMismatchError(el.name, el.units, init_units, el.span)
        else:
            inferred = _infer(el.expression, model, el, report.time_symbol)
        if inferred != el.units:
            raise UnitMismatchError(el.name, el.units, inferred, el.span)
        report.entries.append(UnitEntry(el.name, el.units, inferred))
    return report


def _is_literal(expr) -> bool:
    from .core import Num

    return isinstance(expr, Num)


def _infer(expr, model, element, time_sym) -> UnitExpr:
    """Units of an expression from the declared units of its references."""
    from .core import Bin, Lookup, Name, Neg, Num, Smooth, Step

    if isinstance(expr, Num):
        return DIMENSIONLESS
    if isinstance(expr, Name):
        return model.by_name[expr.target].units
    if isinstance(expr, Neg):
        return _infer(expr.operand, model, element, time_sym)
    if isinstance(expr, Bin):
        left = _infer(expr.left, model, element, time_sym)
        right = _infer(expr.right, model, element, time_sym)
        if expr.op in "+-":
            if left != right:
                raise UnitMismatchError(
                    element.name, left, right, element.span,
                    detail=f"incompatible units in {element.name!r}: "
                           f"[{left}] {expr.op} [{right}]",
                )
            return left
        if expr.op == "*":
            return left * right
        return left / right
    if isinstance(expr, Smooth):
        _require_time_constant(expr.delay, "smooth", model, element, time_sym)
        return _infer(expr.input, model, element, time_sym)
    if isinstance(expr, Step):
        _require_time_constant(expr.start, "step", model, element, time_sym)
        if isinstance(expr.height, Name):
            return model.by_name[expr.height.target].units
        return element.units  # literal height inherits the enclosing declaration
    if isinstance(expr, Lookup):
        table = model.by_name[expr.table]
        arg_units = _infer(expr.arg, model, element, time_sym)
        if arg_units != table.domain_units:
            raise UnitMismatchError(
                element.name, table.domain_units, arg_units, element.span,
                detail=f"lookup into {expr.table!r} in {element.name!r}: argument "
                       f"units [{arg_units}] do not match domain [{table.domain_units}]",
            )
        return table.units
    raise TypeError(f"unknown expression node {expr!r}")


def _require_time_constant(arg, builtin: str, model, element, time_sym) -> None:
    """Constant references must carry the model's time unit; literals inherit it."""
    from .core import Name

    if not isinstance(arg, Name):
        return
    declared = model.by_name[arg.target].units
    sym = declared.single_symbol()
    if sym is None:
        raise NonTimeConstantError(
            builtin, element.name,
            f"{arg.target!r} has units [{declared}], not a time unit",
            element.span,
        )
    if time_sym is _UNKNOWN_TIME or time_sym is None:
        return
    if sym != time_sym:
        raise NonTimeConstantError(
            builtin, element.name,
            f"{arg.target!r} is in [{sym}] but the model time unit is [{time_sym}]",
            element.span,
        )
