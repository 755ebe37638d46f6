"""Deterministic report emission (CSV and JSON envelopes).

Reports are byte-identical for a fixed (config, seed, version): floats are
formatted with 9 significant digits in scientific notation, row order
follows input order, and JSON keys are sorted.
"""

from __future__ import annotations

import csv
import io
import json

from . import __version__

TOOL_NAME = "spinspec"


def fmt_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return f"{v:.8e}"
    return str(v)


def render_csv(columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt_value(v) for v in row])
    return buf.getvalue()


def render_json(command: str, config: dict, seed: int | None,
                columns: list[str], rows: list[list]) -> str:
    envelope = {
        "tool": TOOL_NAME,
        "version": __version__,
        "command": command,
        "config": config,
        "seed": seed,
        "columns": columns,
        "rows": [[None if v is None else v for v in row] for row in rows],
    }
    return json.dumps(envelope, sort_keys=True, separators=(",", ": "),
                      indent=1) + "\n"
