"""Model element types and compilation to a dependency-ordered form.

A model is a flat list of named elements: stocks accumulate their net flow
over time, flows and auxiliaries are instantaneous algebra, constants are
runtime-rebindable numbers, and tables are piecewise-linear lookups.  Each
smooth() call site introduces one implicit first-order state alongside the
stocks; compilation orders the remaining algebra topologically so a single
in-order pass never reads an unset value.
"""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field
from typing import Iterator, Union

from .errors import (
    AlgebraicLoopError,
    BadTableError,
    DuplicateNameError,
    ModelError,
    SourceSpan,
    UnknownReferenceError,
)
from .units import DIMENSIONLESS, UnitExpr

__all__ = [
    "Num", "Name", "Neg", "Bin", "Smooth", "Step", "Lookup", "Expr",
    "Kind", "Element", "ModelDefinition", "StateSlot", "CompiledModel",
    "compile_model", "list_states", "validate_model", "references", "smooth_sites",
]


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Name:
    target: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Smooth:
    """First-order exponential averaging of `input` with time constant `delay`."""

    input: "Expr"
    delay: "Expr"  # literal or constant reference


@dataclass(frozen=True)
class Step:
    """0 before `start`, `height` from `start` onward."""

    height: "Expr"  # literal or constant reference
    start: "Expr"   # literal or constant reference


@dataclass(frozen=True)
class Lookup:
    table: str
    arg: "Expr"


Expr = Union[Num, Name, Neg, Bin, Smooth, Step, Lookup]


def references(expr: Expr) -> Iterator[str]:
    """All element names mentioned anywhere in the expression, in order."""
    if isinstance(expr, Name):
        yield expr.target
    elif isinstance(expr, Neg):
        yield from references(expr.operand)
    elif isinstance(expr, Bin):
        yield from references(expr.left)
        yield from references(expr.right)
    elif isinstance(expr, Smooth):
        yield from references(expr.input)
        yield from references(expr.delay)
    elif isinstance(expr, Step):
        yield from references(expr.height)
        yield from references(expr.start)
    elif isinstance(expr, Lookup):
        yield expr.table
        yield from references(expr.arg)


def smooth_sites(expr: Expr) -> list[Smooth]:
    """Smooth call sites in pre-order; compilation and evaluation must agree."""
    found: list[Smooth] = []

    def walk(e: Expr) -> None:
        if isinstance(e, Smooth):
            found.append(e)
            walk(e.input)
        elif isinstance(e, Neg):
            walk(e.operand)
        elif isinstance(e, Bin):
            walk(e.left)
            walk(e.right)
        elif isinstance(e, Lookup):
            walk(e.arg)

    walk(expr)
    return found


def instantaneous_deps(expr: Expr) -> Iterator[str]:
    """Names whose current value the expression reads directly.

    References inside a smooth() feed its implicit state, not the reading
    element, so the walk does not descend into smooth calls.
    """
    if isinstance(expr, Name):
        yield expr.target
    elif isinstance(expr, Neg):
        yield from instantaneous_deps(expr.operand)
    elif isinstance(expr, Bin):
        yield from instantaneous_deps(expr.left)
        yield from instantaneous_deps(expr.right)
    elif isinstance(expr, Step):
        yield from instantaneous_deps(expr.height)
        yield from instantaneous_deps(expr.start)
    elif isinstance(expr, Lookup):
        yield from instantaneous_deps(expr.arg)


class Kind(enum.Enum):
    STOCK = "stock"
    FLOW = "flow"
    AUX = "aux"
    CONST = "const"
    TABLE = "table"


@dataclass
class Element:
    name: str
    kind: Kind
    units: UnitExpr = field(default_factory=lambda: DIMENSIONLESS)
    expression: Expr | None = None  # flow/aux algebra; a stock's net flow
    initial: Expr | None = None     # stock only
    value: float | None = None      # const only
    points: tuple[tuple[float, float], ...] | None = None  # table only
    bounds: tuple[tuple[float, float], tuple[float, float]] | None = None  # display only
    domain_units: UnitExpr | None = None  # table only; `units` holds the range
    slider_range: tuple[float, float] | None = None  # const `# range a..b`
    span: SourceSpan = field(default=SourceSpan(1, 1), compare=False)


@dataclass
class ModelDefinition:
    name: str
    elements: list[Element] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.by_name: dict[str, Element] = {el.name: el for el in self.elements}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModelDefinition):
            return NotImplemented
        return self.name == other.name and self.elements == other.elements

    @property
    def unit_symbols(self) -> set[str]:
        """Every unit symbol mentioned in any declaration."""
        symbols: set[str] = set()
        for el in self.elements:
            symbols.update(el.units.exponents)
            if el.domain_units is not None:
                symbols.update(el.domain_units.exponents)
        return symbols


_NAME_OK = lambda s: s and not s[0].isdigit() and all(c.isalnum() or c == "_" for c in s)


def validate_model(model: ModelDefinition) -> None:
    """Enforce the structural invariants shared by the parser and compiler."""
    seen: set[str] = set()
    for el in model.elements:
        if not _NAME_OK(el.name):
            raise ModelError(f"invalid element name {el.name!r}", el.span)
        if el.name in seen:
            raise DuplicateNameError(el.name, el.span)
        seen.add(el.name)

    for el in model.elements:
        if el.kind is Kind.STOCK:
            if el.initial is None or el.expression is None:
                raise ModelError(f"stock {el.name!r} needs an initial and a net flow", el.span)
        elif el.kind in (Kind.FLOW, Kind.AUX):
            if el.expression is None:
                raise ModelError(f"{el.kind.value} {el.name!r} has no expression", el.span)
        elif el.kind is Kind.CONST:
            if el.value is None:
                raise ModelError(f"const {el.name!r} has no value", el.span)
        elif el.kind is Kind.TABLE:
            if el.points is None or len(el.points) < 2:
                raise BadTableError(f"table {el.name!r} needs at least 2 points", el.span)
            xs = [x for x, _ in el.points]
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise BadTableError(
                    f"table {el.name!r} x values must be strictly increasing", el.span
                )
            if el.domain_units is None:
                raise BadTableError(f"table {el.name!r} is missing domain units", el.span)
        for expr in (el.expression, el.initial):
            if expr is not None:
                _validate_expr(expr, model, el)
        if el.initial is not None and smooth_sites(el.initial):
            raise ModelError(f"smooth() is not allowed in the initial of {el.name!r}", el.span)


def _validate_expr(expr: Expr, model: ModelDefinition, el: Element) -> None:
    for name in references(expr):
        if name not in model.by_name:
            raise UnknownReferenceError(name, el.span)

    def walk(e: Expr) -> None:
        if isinstance(e, Name):
            if model.by_name[e.target].kind is Kind.TABLE:
                raise BadTableError(
                    f"table {e.target!r} can only be used through lookup()", el.span
                )
        elif isinstance(e, Smooth):
            _require_const_arg(e.delay, "smooth delay", model, el)
            walk(e.input)
        elif isinstance(e, Step):
            _require_const_arg(e.height, "step height", model, el)
            _require_const_arg(e.start, "step start", model, el)
        elif isinstance(e, Lookup):
            target = model.by_name[e.table]
            if target.kind is not Kind.TABLE:
                raise BadTableError(
                    f"lookup target {e.table!r} is a {target.kind.value}, not a table", el.span
                )
            walk(e.arg)
        elif isinstance(e, Neg):
            walk(e.operand)
        elif isinstance(e, Bin):
            walk(e.left)
            walk(e.right)

    walk(expr)


def _require_const_arg(arg: Expr, what: str, model: ModelDefinition, el: Element) -> None:
    if isinstance(arg, Num):
        return
    if isinstance(arg, Name) and model.by_name[arg.target].kind is Kind.CONST:
        return
    raise ModelError(f"{what} in {el.name!r} must be a number or a constant", el.span)


@dataclass(frozen=True)
class StateSlot:
    """One integrated state: a stock, or the hidden state of a smooth call."""

    name: str
    kind: str            # "stock" | "smooth"
    element: str         # owning element name
    rate: Expr           # stock: net flow; smooth: the input expression
    extra: Expr | None   # stock: initial; smooth: the delay constant


@dataclass(frozen=True)
class CompiledModel:
    """Immutable, dependency-ordered form shared by concurrent simulations."""

    source: ModelDefinition
    states: tuple[StateSlot, ...]
    algebra: tuple[str, ...]          # aux/flow names in evaluation order
    slots: dict[str, int]             # value index per element and state
    smooth_slots: dict[str, tuple[int, ...]]  # element -> slots of its smooth sites


def compile_model(model: ModelDefinition) -> CompiledModel:
    """Validate, assign state slots, and order the instantaneous algebra."""
    validate_model(model)

    decl_index = {el.name: i for i, el in enumerate(model.elements)}
    slots: dict[str, int] = {}
    for el in model.elements:
        if el.kind is not Kind.TABLE:
            slots[el.name] = len(slots)

    stocks: list[StateSlot] = []
    smooths: list[StateSlot] = []
    smooth_slots: dict[str, tuple[int, ...]] = {}
    for el in model.elements:
        if el.kind is Kind.STOCK:
            stocks.append(StateSlot(el.name, "stock", el.name, el.expression, el.initial))
        if el.expression is not None:
            site_slots = []
            for i, site in enumerate(smooth_sites(el.expression), start=1):
                state_name = f"{el.name}__smooth{i}"
                if state_name in slots:
                    raise DuplicateNameError(state_name, el.span)
                slots[state_name] = len(slots)
                site_slots.append(slots[state_name])
                smooths.append(StateSlot(state_name, "smooth", el.name, site.input, site.delay))
            if site_slots:
                smooth_slots[el.name] = tuple(site_slots)

    # stocks use the element's own slot; hidden smooth states got fresh ones
    algebra = _order_algebra(model, decl_index)
    return CompiledModel(
        source=model,
        states=tuple(stocks + smooths),
        algebra=tuple(algebra),
        slots=slots,
        smooth_slots=smooth_slots,
    )


def _order_algebra(model: ModelDefinition, decl_index: dict[str, int]) -> list[str]:
    """Kahn's algorithm over aux/flow dependencies, ties by declaration order."""
    algebra_names = [el.name for el in model.elements if el.kind in (Kind.AUX, Kind.FLOW)]
    algebra_set = set(algebra_names)
    deps: dict[str, set[str]] = {}
    for name in algebra_names:
        el = model.by_name[name]
        deps[name] = {d for d in instantaneous_deps(el.expression) if d in algebra_set}

    dependents: dict[str, set[str]] = {name: set() for name in algebra_names}
    for name, ds in deps.items():
        for d in ds:
            dependents[d].add(name)

    missing = {name: len(ds) for name, ds in deps.items()}
    ready = [(decl_index[n], n) for n, k in missing.items() if k == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        _, name = heapq.heappop(ready)
        order.append(name)
        for dep in dependents[name]:
            missing[dep] -= 1
            if missing[dep] == 0:
                heapq.heappush(ready, (decl_index[dep], dep))

    if len(order) < len(algebra_names):
        leftover = [n for n in algebra_names if n not in set(order)]
        raise AlgebraicLoopError(_find_cycle(leftover, deps))
    return order


def _find_cycle(leftover: list[str], deps: dict[str, set[str]]) -> list[str]:
    """Extract one concrete cycle from the unfinished part of the graph."""
    remaining = set(leftover)
    start = leftover[0]
    path: list[str] = []
    seen: dict[str, int] = {}
    node = start
    while node not in seen:
        seen[node] = len(path)
        path.append(node)
        node = next(d for d in sorted(deps[node]) if d in remaining)
    cycle = path[seen[node]:]
    pivot = cycle.index(min(cycle))
    return cycle[pivot:] + cycle[:pivot]


def list_states(compiled: CompiledModel) -> list[str]:
    """Stock names then hidden smooth-state names, in deterministic order."""
    return [slot.name for slot in compiled.states]
