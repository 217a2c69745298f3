"""Causal structure extraction and comparative-statics equilibria.

The causal graph has one node per element (plus one per hidden smooth state
that is not the whole right-hand side of its element) and two edge kinds:
instantaneous edges for direct value reads, and integration edges where a
value accumulates through a stock or a smooth delay.  Edge polarity is the
sign of the local partial derivative at an operating point, so a feedback
loop's polarity is the sign of its gain product there: negative products are
balancing, positive reinforcing, and a vanished or undefined factor makes
the loop indeterminate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx

from .core import (
    Bin,
    CompiledModel,
    Element,
    Expr,
    Kind,
    Lookup,
    Name,
    Neg,
    Smooth,
    Step,
    smooth_sites,
)
from .engine import Evaluator, lookup_eval
from .errors import LoopExplosionError, NoCrossingError

__all__ = [
    "CausalEdge", "CausalGraph", "FeedbackLoop", "LoopReport", "EquilibriumPoint",
    "build_causal_graph", "enumerate_loops", "solve_linear_equilibrium",
]

INSTANTANEOUS = "instantaneous"
INTEGRATION = "integration"

_REL_STEP = 1e-6
_ABS_STEP = 1e-9
_ZERO_DERIVATIVE = 1e-9


@dataclass(frozen=True)
class CausalEdge:
    source: str
    target: str
    kind: str      # INSTANTANEOUS | INTEGRATION
    polarity: str  # "+" | "-" | "0" | "?"


@dataclass
class CausalGraph:
    nodes: list[str]
    edges: list[CausalEdge]


@dataclass(frozen=True)
class FeedbackLoop:
    nodes: tuple[str, ...]
    polarity: str  # "balancing" | "reinforcing" | "indeterminate"
    delayed: bool


@dataclass
class LoopReport:
    loops: list[FeedbackLoop] = field(default_factory=list)


@dataclass(frozen=True)
class EquilibriumPoint:
    price: float
    quantity: float


def _direct_deps(expr: Expr, state_node: dict[int, str]) -> list[tuple[str, int | None]]:
    """Directly read nodes: (name, None) for element slots, or the state node
    standing in for a smooth call site.  Does not descend into smooth inputs."""
    deps: list[tuple[str, int | None]] = []

    def walk(e: Expr) -> None:
        if isinstance(e, Name):
            deps.append((e.target, None))
        elif isinstance(e, Neg):
            walk(e.operand)
        elif isinstance(e, Bin):
            walk(e.left)
            walk(e.right)
        elif isinstance(e, Smooth):
            deps.append((state_node[id(e)], None))
        elif isinstance(e, Step):
            walk(e.height)
            walk(e.start)
        elif isinstance(e, Lookup):
            deps.append((e.table, None))
            walk(e.arg)

    walk(expr)
    unique: list[tuple[str, int | None]] = []
    seen: set[str] = set()
    for dep in deps:
        if dep[0] not in seen:
            seen.add(dep[0])
            unique.append(dep)
    return unique


def build_causal_graph(compiled: CompiledModel,
                       operating_point: dict[str, float] | None = None,
                       at_time: float = 0.0) -> CausalGraph:
    """Signed dependency graph at an operating point.

    `operating_point` maps state names (see list_states) to values; when
    omitted the model's initial conditions are used.  Polarities come from
    central finite differences with relative step 1e-6 (absolute floor 1e-9);
    derivatives below 1e-9 give polarity "0" and non-finite evaluations "?".
    """
    model = compiled.source
    ev = Evaluator(compiled)
    v = ev.initial_values({}, at_time)
    if operating_point:
        for name, value in operating_point.items():
            if name not in ev.slots:
                raise KeyError(f"unknown state {name!r}")
            v[ev.slots[name]] = value
    ev.run_algebra(v, at_time)

    # a smooth call that is the whole expression collapses into its element
    state_node: dict[int, str] = {}
    merged: set[str] = set()
    for el in model.elements:
        if el.expression is None or el.name not in compiled.smooth_slots:
            continue
        sites = smooth_sites(el.expression)
        for i, site in enumerate(sites, start=1):
            implicit = f"{el.name}__smooth{i}"
            if el.kind in (Kind.AUX, Kind.FLOW) and el.expression is site:
                state_node[id(site)] = el.name
                merged.add(implicit)
            else:
                state_node[id(site)] = implicit

    nodes = [el.name for el in model.elements]
    nodes += [meta.name for meta in compiled.states
              if meta.kind == "smooth" and meta.name not in merged]

    tables = {el.name for el in model.elements if el.kind is Kind.TABLE}

    def polarity(dep: str, fn) -> str:
        if dep in tables:
            return "?"  # a table is a function, not a perturbable value
        slot = ev.slots[dep]
        base = v[slot]
        h = max(_REL_STEP * abs(base), _ABS_STEP)
        try:
            v[slot] = base + h
            hi = fn(v, at_time)
            v[slot] = base - h
            lo = fn(v, at_time)
        except Exception:
            return "?"
        finally:
            v[slot] = base
        if not (math.isfinite(hi) and math.isfinite(lo)):
            return "?"
        d = (hi - lo) / (2.0 * h)
        if not math.isfinite(d):
            return "?"
        if abs(d) < _ZERO_DERIVATIVE:
            return "0"
        return "+" if d > 0 else "-"

    edges: list[CausalEdge] = []

    def add_edges(target: str, expr: Expr, kind: str, host: str) -> None:
        fn = ev._compile(expr, host)
        for dep, _ in _direct_deps(expr, state_node):
            edges.append(CausalEdge(dep, target, kind, polarity(dep, fn)))

    for el in model.elements:
        if el.kind is Kind.STOCK:
            add_edges(el.name, el.expression, INTEGRATION, el.name)
        elif el.kind in (Kind.AUX, Kind.FLOW):
            site_list = smooth_sites(el.expression)
            if site_list and el.expression is site_list[0]:
                pass  # merged: the value IS the state; rate edges added below
            else:
                add_edges(el.name, el.expression, INSTANTANEOUS, el.name)
        # rate edges of every smooth site hosted by this element
        if el.expression is not None:
            for site in smooth_sites(el.expression):
                add_edges(state_node[id(site)], site.input, INTEGRATION, el.name)

    return CausalGraph(nodes=nodes, edges=edges)


def enumerate_loops(graph: CausalGraph, cap: int = 10_000) -> LoopReport:
    """All simple directed cycles, canonicalized to start at their smallest
    node name, with polarity products and delay flags."""
    digraph = nx.DiGraph()
    digraph.add_nodes_from(graph.nodes)
    edge_info: dict[tuple[str, str], CausalEdge] = {}
    for edge in graph.edges:
        digraph.add_edge(edge.source, edge.target)
        edge_info[(edge.source, edge.target)] = edge

    loops: list[FeedbackLoop] = []
    for cycle in nx.simple_cycles(digraph):
        if len(loops) >= cap:
            raise LoopExplosionError(cap)
        pivot = min(range(len(cycle)), key=lambda i: cycle[i])
        ordered = tuple(cycle[pivot:] + cycle[:pivot])
        loop_edges = [
            edge_info[(ordered[i], ordered[(i + 1) % len(ordered)])]
            for i in range(len(ordered))
        ]
        loops.append(FeedbackLoop(
            nodes=ordered,
            polarity=_loop_polarity(loop_edges),
            delayed=any(e.kind == INTEGRATION for e in loop_edges),
        ))
    loops.sort(key=lambda lp: (len(lp.nodes), lp.nodes))
    return LoopReport(loops)


def _loop_polarity(loop_edges: list[CausalEdge]) -> str:
    sign = 1
    for edge in loop_edges:
        if edge.polarity in ("0", "?"):
            return "indeterminate"
        sign *= 1 if edge.polarity == "+" else -1
    return "balancing" if sign < 0 else "reinforcing"


def solve_linear_equilibrium(supply: Element, demand: Element,
                             shift: float = 0.0) -> EquilibriumPoint:
    """Price where supply(p) = demand(p) + shift, by bisection to 1e-9.

    Needs a non-decreasing supply table and non-increasing demand table whose
    shifted curves cross inside the combined domain; otherwise NoCrossingError.
    """
    lo = min(supply.points[0][0], demand.points[0][0])
    hi = max(supply.points[-1][0], demand.points[-1][0])

    def gap(p: float) -> float:
        return lookup_eval(supply, p) - (lookup_eval(demand, p) + shift)

    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo == 0.0:
        return EquilibriumPoint(lo, lookup_eval(supply, lo))
    if g_hi == 0.0:
        return EquilibriumPoint(hi, lookup_eval(supply, hi))
    if (g_lo > 0) == (g_hi > 0):
        raise NoCrossingError(
            f"supply-demand gap keeps the same sign over [{lo:g}, {hi:g}]"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g_mid = gap(mid)
        if g_mid == 0.0:
            lo = hi = mid
            break
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
        if hi - lo <= 1e-9:
            break
    price = 0.5 * (lo + hi)
    return EquilibriumPoint(price, lookup_eval(supply, price))
