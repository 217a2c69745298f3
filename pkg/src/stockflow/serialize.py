"""Text encodings shared by the CLI and the HTTP service.

Sample values are canonicalized to 9 significant digits in shortest form so
repeated runs are byte-identical and the service payload matches the CSV
field for field.
"""

from __future__ import annotations

from .analysis import CausalGraph, LoopReport
from .engine import RunResult

__all__ = ["fmt_value", "nine_sig", "run_result_csv", "loop_lines", "edge_list_text"]

_BADGE = {"balancing": "B", "reinforcing": "R", "indeterminate": "?"}


def fmt_value(v: float) -> str:
    """Shortest text for a value rounded to 9 significant digits."""
    return format(v, ".9g")


def nine_sig(v: float) -> float:
    """The float that fmt_value prints, for wire formats carrying numbers."""
    return float(format(v, ".9g"))


def run_result_csv(result: RunResult) -> str:
    """Header `time,<elements>` then one row per sample; LF line endings.

    A faulted run yields its partial rows plus a trailing comment line
    `# fault at t=<time>: <element>`.
    """
    names = list(result.series)
    lines = ["time," + ",".join(names)]
    for i, t in enumerate(result.times):
        row = [fmt_value(t)]
        row += [fmt_value(result.series[name][i]) for name in names]
        lines.append(",".join(row))
    if result.fault is not None:
        t, element = result.fault
        lines.append(f"# fault at t={fmt_value(t)}: {element}")
    return "\n".join(lines) + "\n"


def loop_lines(report: LoopReport) -> list[str]:
    """One `B|R|? : a -> b -> ... (delayed: yes|no)` line per loop."""
    out = []
    for loop in report.loops:
        badge = _BADGE[loop.polarity]
        path = " -> ".join(loop.nodes)
        delayed = "yes" if loop.delayed else "no"
        out.append(f"{badge} : {path} (delayed: {delayed})")
    return out


def edge_list_text(graph: CausalGraph) -> str:
    """One `source -> target [kind, polarity]` line per edge."""
    lines = [
        f"{e.source} -> {e.target} [{e.kind}, {e.polarity}]"
        for e in graph.edges
    ]
    return "\n".join(lines) + ("\n" if lines else "")
