# causal_friendliness/storage/reports.py
"""Text and JSON renderings of a RunReport.

Text mode prints every real to 9 significant digits; JSON keeps full precision.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from causal_friendliness.core.models import RunReport

log = logging.getLogger(__name__)

FLOAT_FORMAT = "{:.9g}".format


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, (float, np.floating)):
        return FLOAT_FORMAT(float(v))
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_fmt(i)}" for k, i in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        if all(isinstance(i, (int, float)) for i in v):
            return "(" + ", ".join(_fmt(i) for i in v) + ")"
        return "[" + ", ".join(_fmt(i) for i in v) + "]"
    return str(v)


def _frame(df: pd.DataFrame, index: bool = True) -> str:
    # nested cells go through _fmt so every real prints at the same precision
    df = df.apply(lambda col: col.map(_fmt) if col.dtype == object else col)
    return df.to_string(float_format=FLOAT_FORMAT, index=index)


def correlator_frame(correlators: Dict[str, float]) -> pd.DataFrame:
    """2x2 grid of ⟨A_x B_y⟩ keyed as ``E{x}{y}``."""
    grid = [[correlators[f"E{x}{y}"] for y in (0, 1)] for x in (0, 1)]
    return pd.DataFrame(grid, index=["x=0", "x=1"], columns=["y=0", "y=1"])


def assumption_frame(report: RunReport) -> pd.DataFrame:
    rows: List[Dict[str, Any]] = []
    for a in report.assumptions:
        rows.append({
            "assumption": a.name,
            "verdict": a.verdict.value,
            "max_deviation": a.max_deviation,
            "witness": a.witness.clause if a.witness else "",
            "indeterminate": a.indeterminate,
        })
        for pre in a.preconditions:
            rows.append({
                "assumption": f"  pre: {pre.name}",
                "verdict": pre.verdict.value,
                "max_deviation": pre.max_deviation,
                "witness": pre.witness.clause if pre.witness else "",
                "indeterminate": pre.indeterminate,
            })
    return pd.DataFrame(rows)


def _details(details: Dict[str, Any]) -> List[str]:
    lines: List[str] = []
    for key, value in details.items():
        if isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
            lines.append(f"{key}:")
            lines.append(_frame(pd.DataFrame(value), index=False))
        else:
            lines.append(f"{key}: {_fmt(value)}")
    return lines


def render_text(report: RunReport) -> str:
    lines = [f"{report.command} (causal-friendliness {report.tool_version})"]
    if report.seed is not None:
        lines.append(f"seed: {report.seed}")
    for key, value in report.config.items():
        lines.append(f"{key}: {_fmt(value)}")

    if report.correlators:
        lines += ["", "correlators <A_x B_y>:", _frame(correlator_frame(report.correlators))]
    if report.chsh is not None:
        lines.append(f"S = {FLOAT_FORMAT(report.chsh)}")

    if report.membership is not None:
        m = report.membership
        lines += ["", f"membership: {m.verdict.value}"]
        if m.facet is not None:
            lines.append(f"  {m.facet.kind} facet value {FLOAT_FORMAT(m.facet.value)} > bound {FLOAT_FORMAT(m.facet.bound)}")
        if m.weights is not None:
            support = {i: w for i, w in enumerate(m.weights.tolist()) if w > 0}
            lines.append("  vertex weights: " + ", ".join(f"v{i}={FLOAT_FORMAT(w)}" for i, w in support.items()))

    if report.signalling is not None:
        s = report.signalling
        lines += [
            "",
            f"no-signalling past->future: {'ok' if s.past_to_future_ok else 'violated'} "
            f"(deviation {FLOAT_FORMAT(s.past_to_future_deviation)})",
            f"no-signalling future->past: {'ok' if s.future_to_past_ok else 'violated'} "
            f"(deviation {FLOAT_FORMAT(s.future_to_past_deviation)})",
        ]

    if report.assumptions:
        lines += ["", _frame(assumption_frame(report), index=False)]
    if report.details:
        lines += [""] + _details(report.details)
    return "\n".join(lines) + "\n"


def render_json(report: RunReport) -> str:
    return report.model_dump_json(indent=2)


def dump_report(report: RunReport, path: str | Path) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(render_json(report) + "\n", encoding="utf-8")
    log.info("report written to %s", out)
    return out


def report_schema() -> Dict[str, Any]:
    """JSON Schema of the ``--json`` output, as emitted (serialization mode)."""
    schema = RunReport.model_json_schema(mode="serialization")
    schema["$schema"] = "https://json-schema.org/draft/2020-12/schema"
    return schema
