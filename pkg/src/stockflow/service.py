"""HTTP facade for what-if experiments over a directory of models.

Endpoints: GET /models, POST /models/{id}/run, GET /models/{id}/loops.
Requests never mutate server state: models are compiled once at startup and
every run owns its own state, so identical requests return identical
payloads.  Cross-origin headers are permissive for local UI development.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .analysis import build_causal_graph, enumerate_loops, solve_linear_equilibrium
from .core import CompiledModel, Kind, ModelDefinition, compile_model
from .engine import RunSpec, detect_equilibrium, simulate
from .errors import ModelError, NoCrossingError
from .language import parse_model
from .serialize import nine_sig
from .units import check_units

RUN_TIME_BUDGET = 2.0     # seconds per simulation request
SETTLE_WINDOW = 10.0      # trailing quiet time required to call a run settled
SETTLE_REL_TOL = 1e-3


class RunRequest(BaseModel):
    overrides: dict[str, float] = {}
    stop_time: float = 100.0
    dt: float = 0.0625
    method: str = "euler"
    save_interval: float = 0.25


@dataclass
class _LoadedModel:
    id: str
    model: ModelDefinition
    compiled: CompiledModel


def _slider_bounds(el) -> tuple[float, float]:
    if el.slider_range is not None:
        return el.slider_range
    return (min(0.0, 4.0 * el.value), max(0.0, 4.0 * el.value))


def _load_directory(models_dir: Path) -> tuple[dict[str, _LoadedModel], list[dict]]:
    registry: dict[str, _LoadedModel] = {}
    errors: list[dict] = []
    for path in sorted(models_dir.glob("*.sdm")):
        try:
            model = parse_model(path.read_text(encoding="utf-8"), name=path.stem)
            compiled = compile_model(model)
            check_units(model)
        except ModelError as err:
            errors.append({"id": path.stem, "message": str(err)})
            continue
        registry[path.stem] = _LoadedModel(path.stem, model, compiled)
    return registry, errors


def create_app(models_dir: str | Path) -> FastAPI:
    registry, load_errors = _load_directory(Path(models_dir))
    app = FastAPI(title="stockflow", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def _validation_to_400(request: Request, exc: RequestValidationError):
        detail = [
            {"field": ".".join(str(p) for p in err.get("loc", [])),
             "message": err.get("msg", "invalid")}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": detail})

    def _get(model_id: str) -> _LoadedModel:
        entry = registry.get(model_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown model {model_id!r}")
        return entry

    @app.get("/models")
    def list_models():
        models = []
        for model_id in sorted(registry):
            entry = registry[model_id]
            constants = []
            for el in entry.model.elements:
                if el.kind is Kind.CONST:
                    lo, hi = _slider_bounds(el)
                    constants.append(
                        {"name": el.name, "default": el.value, "min": lo, "max": hi}
                    )
            models.append({
                "id": entry.id,
                "name": entry.model.name,
                "elements": [el.name for el in entry.model.elements],
                "constants": constants,
            })
        return {"models": models, "errors": load_errors}

    @app.post("/models/{model_id}/run")
    def run_model(model_id: str, request: RunRequest):
        entry = _get(model_id)
        spec = RunSpec(
            stop=request.stop_time,
            dt=request.dt,
            method=request.method,
            save_interval=request.save_interval,
            overrides=dict(request.overrides),
        )
        try:
            spec.validate(entry.compiled)
        except ValueError as err:
            raise HTTPException(
                status_code=400,
                detail=[{"field": _blamed_field(str(err)), "message": str(err)}],
            ) from err
        result = simulate(entry.compiled, spec, time_budget=RUN_TIME_BUDGET)
        if result.fault is not None:
            t, element = result.fault
            raise HTTPException(status_code=422,
                                detail={"time": t, "element": element})
        times = [nine_sig(t) for t in result.times]
        series = {name: [nine_sig(v) for v in vals]
                  for name, vals in result.series.items()}
        settled = {}
        window_ok = spec.stop - spec.start > SETTLE_WINDOW
        for name in result.series:
            point = (detect_equilibrium(result, name, SETTLE_WINDOW, SETTLE_REL_TOL)
                     if window_ok else None)
            settled[name] = None if point is None else {
                "time": nine_sig(point[0]), "value": nine_sig(point[1]),
            }
        return {
            "id": model_id,
            "times": times,
            "series": series,
            "settled": settled,
            "analytic_equilibrium": _analytic(entry, spec),
            "diagnostics": [{"time": t, "message": m} for t, m in result.diagnostics],
        }

    @app.get("/models/{model_id}/loops")
    def loops(model_id: str):
        entry = _get(model_id)
        graph = build_causal_graph(entry.compiled)
        report = enumerate_loops(graph)
        return {
            "id": model_id,
            "loops": [
                {"nodes": list(loop.nodes), "polarity": loop.polarity,
                 "delayed": loop.delayed}
                for loop in report.loops
            ],
        }

    return app


def _blamed_field(message: str) -> str:
    # longest-signal first: a save-interval message also mentions dt
    for field in ("override", "save", "stop", "method", "dt"):
        if field in message:
            return {"stop": "stop_time", "save": "save_interval",
                    "override": "overrides"}.get(field, field)
    return "request"


def _analytic(entry: _LoadedModel, spec: RunSpec) -> dict | None:
    """Comparative-statics crossing of the *Supply*/*Demand* tables, when the
    model has exactly one of each; the shift is the effective Shift_Height."""
    tables = {"supply": [], "demand": []}
    for el in entry.model.elements:
        if el.kind is Kind.TABLE:
            for word in tables:
                if word in el.name.lower():
                    tables[word].append(el)
    if len(tables["supply"]) != 1 or len(tables["demand"]) != 1:
        return None
    shift = 0.0
    shift_el = entry.model.by_name.get("Shift_Height")
    if shift_el is not None and shift_el.kind is Kind.CONST:
        shift = spec.overrides.get("Shift_Height", shift_el.value)
    try:
        point = solve_linear_equilibrium(tables["supply"][0], tables["demand"][0], shift)
    except NoCrossingError:
        return None
    return {"price": nine_sig(point.price), "quantity": nine_sig(point.quantity)}
