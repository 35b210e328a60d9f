"""Check records, reports and their text/JSON renderings."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from . import __version__


@dataclass
class CheckRecord:
    """Outcome of one check.

    ``max_residual`` is compared with ``tolerance``; lower-bound checks store
    their shortfall below the bound there (so 0 means the bound was met).
    A check that raised has ``max_residual=None`` and the reason in ``error``.
    """

    check_name: str
    max_residual: float | None
    tolerance: float
    points_evaluated: int = 0
    wall_time: float = 0.0
    detail: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def passed(self) -> bool:
        if self.error is not None or self.max_residual is None or math.isnan(self.max_residual):
            return False
        return self.max_residual <= self.tolerance

    def to_dict(self):
        return {
            "check_name": self.check_name,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "points_evaluated": self.points_evaluated,
            "wall_time": self.wall_time,
            "detail": dict(self.detail),
            "error": self.error,
        }


@dataclass
class Report:
    scenario: dict
    checks: list = field(default_factory=list)
    version: str = __version__

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "checks": [c.to_dict() for c in self.checks],
            "pass": self.passed,
            "tool_version": self.version,
        }


def _format(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        text = "%.17g" % obj
        return text if any(ch in text for ch in ".en") else text + ".0"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_format(obj[k], indent, level + 1)}" for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + _format(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return _format(obj.item(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_stable(obj, indent=2) -> str:
    """JSON with sorted keys and every float written with 17 significant digits.

    The stdlib encoder writes the shortest round-trip repr, so floats are
    formatted here; strings and keys still go through ``json.dumps``.
    """
    return _format(obj, indent, 0) + "\n"


def _fmt_num(x):
    return "-" if x is None else f"{x:.3e}"


def render_text(report: Report) -> str:
    name = report.scenario.get("name", "")
    head = ("check", "max_residual", "tolerance", "pass", "points", "time_s")
    rows = []
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        rows.append((c.check_name, _fmt_num(c.max_residual), _fmt_num(c.tolerance), status,
                     str(c.points_evaluated), f"{c.wall_time:.3f}"))
    widths = [max([len(h)] + [len(r[i]) for r in rows]) for i, h in enumerate(head)]
    lines = [f"scenario: {name}  (starc {report.version})",
             "  ".join(h.ljust(w) for h, w in zip(head, widths)),
             "  ".join("-" * w for w in widths)]
    for r, c in zip(rows, report.checks):
        line = "  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip()
        if c.error:
            line += f"  [{c.error}]"
        lines.append(line)
    if report.checks:
        lines.append(f"overall: {'PASS' if report.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def emit_report(report: Report, format="text") -> bytes:
    if format == "json":
        return dumps_stable(report.to_dict()).encode()
    if format == "text":
        return render_text(report).encode()
    raise ValueError(f"unknown report format {format!r}")


def strip_wall_time(doc):
    """Copy of a report document without the wall_time fields."""
    if isinstance(doc, dict):
        return {k: strip_wall_time(v) for k, v in doc.items() if k != "wall_time"}
    if isinstance(doc, list):
        return [strip_wall_time(v) for v in doc]
    return doc
