"""Fixed-step continuous-time integration of compiled models.

The engine advances stocks and hidden smooth states with Euler or classic
fourth-order Runge-Kutta, evaluates the instantaneous algebra once per step
(per stage for RK4), and records every element series at the save interval.
A division by zero or non-finite value stops the run and returns the partial
series with a diagnostic instead of raising.
"""

from __future__ import annotations

import math
import time as _time
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable

from .core import (
    Bin,
    CompiledModel,
    Element,
    Kind,
    Lookup,
    Name,
    Neg,
    Num,
    Smooth,
    Step,
    smooth_sites,
)
from .errors import NumericFaultError

__all__ = ["RunSpec", "RunResult", "simulate", "lookup_eval", "detect_equilibrium", "Evaluator"]

_EvalFn = Callable[[list[float], float], float]


@dataclass
class RunSpec:
    start: float = 0.0
    stop: float = 100.0
    dt: float = 0.0625
    method: str = "euler"  # "euler" | "rk4"
    save_interval: float = 0.25
    overrides: dict[str, float] = field(default_factory=dict)

    def validate(self, compiled: CompiledModel) -> None:
        if not self.stop > self.start:
            raise ValueError(f"stop time {self.stop} must exceed start time {self.start}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        ratio = self.save_interval / self.dt
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ValueError(
                f"save interval {self.save_interval} is not a positive multiple of dt {self.dt}"
            )
        if self.method not in ("euler", "rk4"):
            raise ValueError(f"unknown method {self.method!r}; use euler or rk4")
        for name, value in self.overrides.items():
            el = compiled.source.by_name.get(name)
            if el is None or el.kind is not Kind.CONST:
                raise ValueError(f"override {name!r} does not name a constant")
            if not math.isfinite(value):
                raise ValueError(f"override {name!r} must be finite")


@dataclass
class RunResult:
    times: list[float]
    series: dict[str, list[float]]
    diagnostics: list[tuple[float, str]] = field(default_factory=list)
    fault: tuple[float, str] | None = None  # (time, element) when the run stopped


def _table_fn(element: Element, host: str) -> Callable[[float], float]:
    xs = [x for x, _ in element.points]
    ys = [y for _, y in element.points]
    lo_x, hi_x = xs[0], xs[-1]
    lo_y, hi_y = ys[0], ys[-1]

    def interpolate(x: float) -> float:
        if not math.isfinite(x):
            raise NumericFaultError(host, "lookup of non-finite argument")
        if x <= lo_x:
            return lo_y
        if x >= hi_x:
            return hi_y
        i = bisect_right(xs, x)
        x0, x1 = xs[i - 1], xs[i]
        y0, y1 = ys[i - 1], ys[i]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    return interpolate


def lookup_eval(table: Element, x: float) -> float:
    """Piecewise-linear interpolation with endpoint clamping outside the domain."""
    if table.kind is not Kind.TABLE:
        raise ValueError(f"{table.name!r} is not a table")
    return _table_fn(table, table.name)(x)


class Evaluator:
    """Compiled closures for one model; owns no mutable run state itself."""

    def __init__(self, compiled: CompiledModel):
        self.compiled = compiled
        model = compiled.source
        self.slots = compiled.slots
        self.size = len(compiled.slots)
        self.const_slots = [
            (el.name, self.slots[el.name], el.value)
            for el in model.elements if el.kind is Kind.CONST
        ]
        self.recorded = [el.name for el in model.elements if el.kind is not Kind.TABLE]

        self._smooth_slot: dict[int, int] = {}
        for el in model.elements:
            if el.expression is not None and el.name in compiled.smooth_slots:
                for site, slot in zip(smooth_sites(el.expression),
                                      compiled.smooth_slots[el.name]):
                    self._smooth_slot[id(site)] = slot

        self.algebra: list[tuple[str, int, _EvalFn]] = [
            (name, self.slots[name], self._compile(model.by_name[name].expression, name))
            for name in compiled.algebra
        ]
        # states: (name, slot, kind, rate_or_input fn, delay fn or initial expr)
        self.states: list[tuple[str, int, str, _EvalFn, _EvalFn | None]] = []
        for meta in compiled.states:
            slot = self.slots[meta.name]
            if meta.kind == "stock":
                self.states.append(
                    (meta.name, slot, "stock", self._compile(meta.rate, meta.element), None)
                )
            else:
                self.states.append(
                    (meta.name, slot, "smooth",
                     self._compile(meta.rate, meta.element),
                     self._compile(meta.extra, meta.element))
                )
        self._initials = [
            (meta.name, self.slots[meta.name], self._compile(meta.extra, meta.element))
            for meta in compiled.states if meta.kind == "stock"
        ]

    def _compile(self, expr, host: str) -> _EvalFn:
        model = self.compiled.source
        if isinstance(expr, Num):
            value = expr.value
            return lambda v, t: value
        if isinstance(expr, Name):
            slot = self.slots[expr.target]
            return lambda v, t: v[slot]
        if isinstance(expr, Neg):
            inner = self._compile(expr.operand, host)
            return lambda v, t: -inner(v, t)
        if isinstance(expr, Bin):
            left = self._compile(expr.left, host)
            right = self._compile(expr.right, host)
            if expr.op == "+":
                return lambda v, t: left(v, t) + right(v, t)
            if expr.op == "-":
                return lambda v, t: left(v, t) - right(v, t)
            if expr.op == "*":
                return lambda v, t: left(v, t) * right(v, t)

            def divide(v: list[float], t: float) -> float:
                denom = right(v, t)
                if denom == 0.0:
                    raise NumericFaultError(host, "division by zero")
                return left(v, t) / denom

            return divide
        if isinstance(expr, Smooth):
            slot = self._smooth_slot[id(expr)]
            return lambda v, t: v[slot]
        if isinstance(expr, Step):
            height = self._compile(expr.height, host)
            start = self._compile(expr.start, host)
            return lambda v, t: height(v, t) if t >= start(v, t) else 0.0
        if isinstance(expr, Lookup):
            table = _table_fn(model.by_name[expr.table], host)
            arg = self._compile(expr.arg, host)
            return lambda v, t: table(arg(v, t))
        raise TypeError(f"unknown expression node {expr!r}")

    def run_algebra(self, v: list[float], t: float) -> None:
        for name, slot, fn in self.algebra:
            x = fn(v, t)
            if not math.isfinite(x):
                raise NumericFaultError(name, "non-finite value")
            v[slot] = x

    def rates(self, v: list[float], t: float) -> list[float]:
        out = []
        for name, slot, kind, fn, delay in self.states:
            if kind == "stock":
                r = fn(v, t)
            else:
                tau = delay(v, t)
                if tau == 0.0:
                    raise NumericFaultError(name, "zero smooth delay")
                r = (fn(v, t) - v[slot]) / tau
            if not math.isfinite(r):
                raise NumericFaultError(name, "non-finite rate")
            out.append(r)
        return out

    def initial_values(self, overrides: dict[str, float], t0: float) -> list[float]:
        """Constants, stock initials, then smooth states seeded from their inputs."""
        v = [math.nan] * self.size
        for name, slot, value in self.const_slots:
            v[slot] = overrides.get(name, value)
        for name, slot, init_fn in self._initials:
            x = init_fn(v, t0)
            if not math.isfinite(x):
                raise NumericFaultError(name, "initial value is not finite")
            v[slot] = x
        pending = [s for s in self.states if s[2] == "smooth"]
        for _ in range(len(pending) + 1):
            if not pending:
                break
            self._tolerant_algebra(v, t0)
            still = []
            for state in pending:
                name, slot, _, input_fn, _ = state
                try:
                    x = input_fn(v, t0)
                except NumericFaultError:
                    x = math.nan
                if math.isfinite(x):
                    v[slot] = x
                else:
                    still.append(state)
            if len(still) == len(pending):
                raise NumericFaultError(still[0][0], "could not seed smooth state")
            pending = still
        return v

    def _tolerant_algebra(self, v: list[float], t: float) -> None:
        # init-time pass: unseeded states are NaN, divisions may fault; keep going
        for name, slot, fn in self.algebra:
            try:
                v[slot] = fn(v, t)
            except NumericFaultError:
                v[slot] = math.nan


def simulate(compiled: CompiledModel, spec: RunSpec | None = None, *,
             time_budget: float | None = None) -> RunResult:
    """Integrate the model per the run spec and sample at the save interval.

    The first sample holds the initial conditions; later samples record
    post-update values.  On a numeric fault the partial result carries the
    fault time and element in `fault` and in `diagnostics`.
    """
    spec = spec or RunSpec()
    spec.validate(compiled)
    ev = Evaluator(compiled)
    result = RunResult(times=[], series={name: [] for name in ev.recorded})
    record_slots = [(name, ev.slots[name]) for name in ev.recorded]

    n_steps = int(math.floor((spec.stop - spec.start) / spec.dt + 1e-9))
    save_every = round(spec.save_interval / spec.dt)
    deadline = None if time_budget is None else _time.monotonic() + time_budget

    def record(t: float, v: list[float]) -> None:
        result.times.append(t)
        for name, slot in record_slots:
            result.series[name].append(v[slot])

    now = spec.start
    try:
        v = ev.initial_values(spec.overrides, spec.start)
        ev.run_algebra(v, spec.start)
    except NumericFaultError as fault:
        return _faulted(result, fault, spec.start)
    record(spec.start, v)

    state_slots = [slot for _, slot, _, _, _ in ev.states]
    rk4 = spec.method == "rk4"
    dt = spec.dt
    try:
        for i in range(1, n_steps + 1):
            t_prev = spec.start + (i - 1) * dt
            t = spec.start + i * dt
            now = t_prev
            if rk4:
                y0 = [v[s] for s in state_slots]
                k1 = ev.rates(v, t_prev)
                for s, y, k in zip(state_slots, y0, k1):
                    v[s] = y + 0.5 * dt * k
                now = t_prev + 0.5 * dt
                ev.run_algebra(v, now)
                k2 = ev.rates(v, now)
                for s, y, k in zip(state_slots, y0, k2):
                    v[s] = y + 0.5 * dt * k
                ev.run_algebra(v, now)
                k3 = ev.rates(v, now)
                for s, y, k in zip(state_slots, y0, k3):
                    v[s] = y + dt * k
                now = t
                ev.run_algebra(v, t)
                k4 = ev.rates(v, t)
                for s, y, a, b, c, d in zip(state_slots, y0, k1, k2, k3, k4):
                    v[s] = y + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d)
            else:
                k = ev.rates(v, t_prev)
                for s, r in zip(state_slots, k):
                    v[s] = v[s] + dt * r
            now = t
            ev.run_algebra(v, t)
            if i % save_every == 0:
                record(t, v)
            if deadline is not None and i % 1024 == 0 and _time.monotonic() > deadline:
                raise NumericFaultError("run", "time budget exceeded")
    except NumericFaultError as fault:
        return _faulted(result, fault, now)
    return result


def _faulted(result: RunResult, fault: NumericFaultError, t: float) -> RunResult:
    fault.time = t
    result.fault = (t, fault.element)
    result.diagnostics.append((t, str(fault)))
    return result


def detect_equilibrium(result: RunResult, element: str, window: float,
                       rel_tol: float) -> tuple[float, float] | None:
    """Earliest sample time after which the series stays within rel_tol of its
    final value, provided at least `window` of run remains past that time."""
    if window <= 0 or rel_tol <= 0:
        raise ValueError("window and rel_tol must be positive")
    times = result.times
    values = result.series[element]
    if len(times) < 2 or window >= times[-1] - times[0]:
        raise ValueError("window must be shorter than the run")
    final = values[-1]
    tol = abs(final) * rel_tol
    i = len(values) - 1
    while i >= 0 and abs(values[i] - final) <= tol:
        i -= 1
    first = i + 1
    if first >= len(values):
        return None
    settle_time = times[first]
    if times[-1] - settle_time < window:
        return None
    return (settle_time, values[first])
