"""CSV output with a fixed numeric format (12 significant digits, '.' decimal)."""

from __future__ import annotations

import csv
import io
import math
import sys
from pathlib import Path
from typing import Iterable, Sequence


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.12g}"
    try:
        return fmt(float(v)) if hasattr(v, "__float__") and not isinstance(v, str) else str(v)
    except (TypeError, ValueError):
        return str(v)


def render_csv(rows: Iterable[dict], columns: Sequence[str], footer: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    for line in footer:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def write_csv(rows, columns, out=None, footer=()) -> str:
    text = render_csv(rows, columns, footer)
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        p = Path(out)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
    return text


def read_csv(path) -> tuple[list[dict], list[str]]:
    """Rows and footer lines of a file written by write_csv."""
    lines = Path(path).read_text().splitlines()
    body = [ln for ln in lines if not ln.startswith("#")]
    footer = [ln[2:] for ln in lines if ln.startswith("# ")]
    return list(csv.DictReader(body)), footer
