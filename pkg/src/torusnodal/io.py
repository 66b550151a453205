"""Serialization: JSON reports, CSV tables and SVG nodal plots.

Everything here is deterministic: keys are sorted, floats are written with
``repr`` (JSON) or a fixed number of decimals (SVG), so equal inputs give
byte-identical files.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

SCHEMA_VERSION = 1


def to_jsonable(obj):
    """Recursively convert dataclasses, numpy values and exact numbers to JSON types."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                if not f.name.startswith("_") and not callable(getattr(obj, f.name))}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "re") and hasattr(obj, "im"):
        return {"re": int(obj.re), "im": int(obj.im)}
    if hasattr(obj, "a") and hasattr(obj, "b"):
        return [int(obj.a), int(obj.b)]
    return str(obj)


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    path.write_text(buf.getvalue())
    return path


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    return v


def curves_to_json(curves) -> list[dict]:
    return [{"closed": bool(c.closed), "singular_adjacent": bool(c.singular_adjacent),
             "winding": list(c.winding), "vertices": c.vertices.tolist()} for c in curves]


# ---------------------------------------------------------------------------
# SVG


def _subpaths(vertices: np.ndarray, closed: bool, period: float):
    """Split an unwrapped polyline into pieces that stay inside one copy of the domain."""
    v = np.asarray(vertices, dtype=float)
    if closed:
        v = np.vstack([v, v[:1]])
    cell = np.floor(v / period)
    pieces = []
    start, frame = 0, cell[0]
    for i in range(1, len(v)):
        if np.any(cell[i] != cell[i - 1]):
            # the crossing segment is drawn in both frames; the viewBox clips it
            pieces.append(v[start:i + 1] - frame * period)
            start, frame = i - 1, cell[i]
    pieces.append(v[start:] - frame * period)
    return [p for p in pieces if len(p) >= 2]


def nodal_svg(curves, period: float, size: int = 512, singular=(), title: str | None = None) -> str:
    """SVG of the curves in [0, period)^2, one <path> per curve, y axis pointing up."""
    s = size / period

    def fmt(p):
        return f"{p[0] * s:.3f},{(period - p[1]) * s:.3f}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">']
    if title:
        out.append(f"<title>{title}</title>")
    out.append(f'<rect x="0" y="0" width="{size}" height="{size}" fill="white" stroke="black"/>')
    for i, c in enumerate(curves):
        d = " ".join("M " + " L ".join(fmt(p) for p in piece) for piece in _subpaths(c.vertices, c.closed, period))
        style = ('stroke="red" stroke-dasharray="4 2"' if c.singular_adjacent else 'stroke="black"')
        out.append(f'<path id="curve{i}" d="{d}" fill="none" {style} stroke-width="1"/>')
    for p in singular:
        x = np.asarray(p, dtype=float) % period
        out.append(f'<circle cx="{x[0] * s:.3f}" cy="{(period - x[1]) * s:.3f}" r="3" fill="blue"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
