"""Command-line front end: check, run, loops, equilibrium, serve.

Exit codes: 0 success, 1 model error (parse/units/compile), 2 runtime fault,
3 usage error.  Diagnostics go to stderr; data to stdout or --out.
"""

from __future__ import annotations

import argparse
import os
import sys
from importlib import resources
from pathlib import Path

from .analysis import build_causal_graph, enumerate_loops, solve_linear_equilibrium
from .core import CompiledModel, Kind, ModelDefinition, compile_model
from .engine import RunSpec, simulate
from .errors import ModelError, NoCrossingError
from .language import parse_model
from .serialize import edge_list_text, loop_lines, run_result_csv
from .units import check_units

EXIT_OK = 0
EXIT_MODEL_ERROR = 1
EXIT_RUNTIME_FAULT = 2
EXIT_USAGE = 3


def default_model_dir() -> Path:
    return Path(str(resources.files("stockflow").joinpath("models")))


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage problems exit 3, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _resolve_path(path: str) -> Path:
    candidate = Path(path)
    if candidate.exists():
        return candidate
    search_dir = os.environ.get("STOCKFLOW_MODEL_DIR")
    if search_dir and not candidate.is_absolute():
        fallback = Path(search_dir) / path
        if fallback.exists():
            return fallback
    print(f"stockflow: model file not found: {path}", file=sys.stderr)
    raise SystemExit(EXIT_USAGE)


def _load_checked(path: str) -> tuple[ModelDefinition, CompiledModel]:
    resolved = _resolve_path(path)
    try:
        model = parse_model(resolved.read_text(encoding="utf-8"), name=resolved.stem)
        compiled = compile_model(model)
        check_units(model)
    except ModelError as err:
        print(f"{resolved.name}: {err}", file=sys.stderr)
        raise SystemExit(EXIT_MODEL_ERROR) from err
    return model, compiled


def cmd_check(args: argparse.Namespace) -> int:
    resolved = _resolve_path(args.model)
    try:
        model = parse_model(resolved.read_text(encoding="utf-8"), name=resolved.stem)
        compile_model(model)
        report = check_units(model)
    except ModelError as err:
        print(f"{resolved.name}: {err}", file=sys.stderr)
        return EXIT_MODEL_ERROR
    for entry in report.entries:
        print(f"{entry.element}: {entry.inferred}")
    return EXIT_OK


def _parse_overrides(pairs: list[str]) -> dict[str, float]:
    overrides: dict[str, float] = {}
    for pair in pairs:
        name, sep, text = pair.partition("=")
        if not sep or not name:
            print(f"stockflow: --set expects NAME=VALUE, got {pair!r}", file=sys.stderr)
            raise SystemExit(EXIT_USAGE)
        try:
            overrides[name] = float(text)
        except ValueError:
            print(f"stockflow: --set {name}: {text!r} is not a number", file=sys.stderr)
            raise SystemExit(EXIT_USAGE) from None
    return overrides


def cmd_run(args: argparse.Namespace) -> int:
    _, compiled = _load_checked(args.model)
    spec = RunSpec(
        stop=args.stop,
        dt=args.dt,
        method=args.method,
        save_interval=args.save,
        overrides=_parse_overrides(args.set or []),
    )
    try:
        spec.validate(compiled)
    except ValueError as err:
        print(f"stockflow: {err}", file=sys.stderr)
        return EXIT_USAGE
    result = simulate(compiled, spec)
    csv_text = run_result_csv(result)
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(csv_text)
    if result.fault is not None:
        t, element = result.fault
        print(f"stockflow: numeric fault at t={t:g} in {element}", file=sys.stderr)
        return EXIT_RUNTIME_FAULT
    return EXIT_OK


def cmd_loops(args: argparse.Namespace) -> int:
    _, compiled = _load_checked(args.model)
    graph = build_causal_graph(compiled)
    report = enumerate_loops(graph, cap=args.cap)
    if args.graph:
        Path(args.graph).write_text(edge_list_text(graph), encoding="utf-8", newline="\n")
    if not report.loops:
        print("no feedback loops")
    else:
        for line in loop_lines(report):
            print(line)
    return EXIT_OK


def _find_table(model: ModelDefinition, explicit: str | None, word: str):
    if explicit is not None:
        el = model.by_name.get(explicit)
        if el is None or el.kind is not Kind.TABLE:
            print(f"stockflow: {explicit!r} is not a table in this model", file=sys.stderr)
            raise SystemExit(EXIT_MODEL_ERROR)
        return el
    matches = [el for el in model.elements
               if el.kind is Kind.TABLE and word in el.name.lower()]
    if len(matches) != 1:
        print(f"stockflow: expected exactly one table named *{word}*, found "
              f"{len(matches)}", file=sys.stderr)
        raise SystemExit(EXIT_MODEL_ERROR)
    return matches[0]


def cmd_equilibrium(args: argparse.Namespace) -> int:
    model, _ = _load_checked(args.model)
    supply = _find_table(model, args.supply, "supply")
    demand = _find_table(model, args.demand, "demand")
    try:
        point = solve_linear_equilibrium(supply, demand, args.shift)
    except NoCrossingError as err:
        print(f"stockflow: no crossing: {err}", file=sys.stderr)
        return EXIT_RUNTIME_FAULT
    print(f"P={point.price:.4f} Q={point.quantity:.4f}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.models)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="stockflow",
                     description="Stock-flow model checker, simulator, and analyzer")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="parse, compile, and unit-check")
    p_check.add_argument("model")
    p_check.set_defaults(fn=cmd_check)

    p_run = sub.add_parser("run", help="simulate and emit CSV")
    p_run.add_argument("model")
    p_run.add_argument("--stop", type=float, default=100.0)
    p_run.add_argument("--dt", type=float, default=0.0625)
    p_run.add_argument("--method", choices=("euler", "rk4"), default="euler")
    p_run.add_argument("--save", type=float, default=0.25)
    p_run.add_argument("--set", action="append", metavar="NAME=VALUE",
                       help="override a constant (repeatable)")
    p_run.add_argument("--out", help="write CSV here instead of stdout")
    p_run.set_defaults(fn=cmd_run)

    p_loops = sub.add_parser("loops", help="enumerate feedback loops")
    p_loops.add_argument("model")
    p_loops.add_argument("--cap", type=int, default=10_000)
    p_loops.add_argument("--graph", help="also write the causal edge list here")
    p_loops.set_defaults(fn=cmd_loops)

    p_eq = sub.add_parser("equilibrium", help="analytic supply/demand crossing")
    p_eq.add_argument("model")
    p_eq.add_argument("--shift", type=float, default=0.0)
    p_eq.add_argument("--supply", help="supply table name (default: the *Supply* table)")
    p_eq.add_argument("--demand", help="demand table name (default: the *Demand* table)")
    p_eq.set_defaults(fn=cmd_equilibrium)

    p_serve = sub.add_parser("serve", help="HTTP what-if service")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--models",
                         default=os.environ.get("STOCKFLOW_MODEL_DIR",
                                                str(default_model_dir())),
                         help="directory of .sdm files")
    p_serve.set_defaults(fn=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
