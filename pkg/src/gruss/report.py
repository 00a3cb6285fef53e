"""Text and JSON rendering of suite reports.

The JSON form omits wall time so identical configurations give identical bytes.
"""

from __future__ import annotations

import json
import math
from typing import BinaryIO

from .errors import ReportIOError
from .harness import SuiteReport, Tally

SCHEMA = "gruss-report/1"
FORMATS = ("text", "json")


def _num(v):
    if v is None or not math.isfinite(v):
        return None
    return v


def entry_dict(name: str, t: Tally) -> dict:
    return {
        "inequality": name,
        "trials": t.trials,
        "passes": t.passes,
        "max_tightness": _num(t.max_tightness),
        "max_residual": _num(t.max_residual),
        "argmax": t.argmax,
        "failures": list(t.failures),
    }


def report_dict(report: SuiteReport) -> dict:
    out = {
        "schema": SCHEMA,
        "kind": report.kind,
        "config": report.config.to_dict(),
        "all_passed": report.all_passed,
        "results": [entry_dict(name, t) for name, t in report.entries.items()],
    }
    if report.target is not None:
        out["target"] = report.target
    return out


def _fmt(v) -> str:
    if v is None:
        return "-"
    return f"{v:.6g}" if math.isfinite(v) else str(v)


def render_text(report: SuiteReport) -> str:
    header = f"{'inequality':<16}{'trials':>8}{'passes':>8}{'max_tightness':>16}{'max_residual':>14}  status"
    lines = [header, "-" * len(header)]
    for name, t in report.entries.items():
        status = "ok" if t.all_passed else "FAIL"
        lines.append(
            f"{name:<16}{t.trials:>8}{t.passes:>8}{_fmt(t.max_tightness):>16}{_fmt(t.max_residual):>14}  {status}"
        )
        lines.extend(f"    {msg}" for msg in t.failures)
    if report.entries:
        verdict = "all checks passed" if report.all_passed else "violations found"
        lines.append(f"{verdict} (seed {report.config.seed}, {report.wall_time:.2f} s)")
    return "\n".join(lines) + "\n"


def emit_report(report: SuiteReport, fmt: str = "text", stream: BinaryIO | None = None) -> bytes:
    """Render ``report`` as UTF-8 bytes, writing them to ``stream`` if given."""
    if fmt == "json":
        data = (json.dumps(report_dict(report), indent=2) + "\n").encode()
    elif fmt == "text":
        data = render_text(report).encode()
    else:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    if stream is not None:
        try:
            stream.write(data)
            stream.flush()
        except (OSError, ValueError) as exc:
            raise ReportIOError(f"cannot write report: {exc}") from exc
    return data
