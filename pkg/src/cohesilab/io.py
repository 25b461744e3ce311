"""Deterministic datasets: CSV and JSON serialization and static SVG plots.

Files are written to a temporary sibling and renamed into place, so a reader
never sees a partial file. Identical inputs give byte-identical outputs: floats
are printed with 17 significant digits, JSON keys are sorted and no timestamps
are recorded.
"""

from __future__ import annotations

import json
import math
import os
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ColumnNotFound, ValidationError

_HEADER = re.compile(r"^([^\[\],]+)\[([^\[\],]*)\]$")
_NONFINITE = {"Infinity": math.inf, "-Infinity": -math.inf, "NaN": math.nan}


@dataclass(frozen=True, eq=False)
class Dataset:
    """Rectangular table of reals with a unit for every column."""

    name: str
    columns: tuple
    units: tuple
    rows: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(str(c) for c in self.columns))
        object.__setattr__(self, "units", tuple(str(u) for u in self.units))
        rows = np.asarray(self.rows, dtype=float)
        if rows.size == 0:
            rows = rows.reshape(0, len(self.columns))
        object.__setattr__(self, "rows", rows)
        if not self.name:
            raise ValidationError("name", "dataset needs a name")
        if len(self.units) != len(self.columns):
            raise ValidationError("units", "every column needs a unit")
        if rows.ndim != 2 or rows.shape[1] != len(self.columns):
            raise ValidationError("rows", "rows must form a rectangle matching the columns")
        for c in self.columns:
            if not c or any(ch in c for ch in ",[]\n"):
                raise ValidationError("columns", f"invalid column name {c!r}")
        for u in self.units:
            if any(ch in u for ch in ",[]\n"):
                raise ValidationError("units", f"invalid unit {u!r}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.name == other.name
            and self.columns == other.columns
            and self.units == other.units
            and self.provenance == other.provenance
            and self.rows.shape == other.rows.shape
            and bool(np.array_equal(self.rows, other.rows, equal_nan=True))
        )

    def column(self, name: str) -> np.ndarray:
        try:
            return self.rows[:, self.columns.index(name)]
        except ValueError:
            raise ColumnNotFound(f"dataset {self.name!r} has no column {name!r}") from None

    def unit(self, name: str) -> str:
        if name not in self.columns:
            raise ColumnNotFound(f"dataset {self.name!r} has no column {name!r}")
        return self.units[self.columns.index(name)]


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------

def atomic_write(path: str | Path, text: str) -> Path:
    """Write ``text`` with LF line endings through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def format_real(x: float) -> str:
    """Scientific notation with 17 significant digits; ``inf``/``nan`` spelled out."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.16e}"


def dataset_to_csv(ds: Dataset) -> str:
    header = ",".join(f"{c}[{u}]" for c, u in zip(ds.columns, ds.units))
    lines = [header] + [",".join(format_real(v) for v in row) for row in ds.rows]
    return "\n".join(lines) + "\n"


def _json_real(x: float):
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return x


def json_safe(value):
    """Recursively convert numpy scalars and non-finite floats for JSON."""
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, (np.floating, float)):
        return _json_real(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return json_safe(value.tolist())
    return value


def dataset_to_json(ds: Dataset) -> str:
    doc = {
        "name": ds.name,
        "columns": list(ds.columns),
        "units": list(ds.units),
        "rows": [[_json_real(v) for v in row] for row in ds.rows],
        "provenance": json_safe(ds.provenance),
    }
    return json.dumps(doc, sort_keys=True, indent=1, allow_nan=False) + "\n"


def write_dataset(ds: Dataset, path: str | Path, format: str | None = None) -> Path:
    """Write ``ds`` as CSV or JSON; the format defaults to the file suffix.

    Raises
    ------
    ValueError
        Unknown format.
    OSError
        The file cannot be written.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).lower()
    if fmt == "csv":
        return atomic_write(path, dataset_to_csv(ds))
    if fmt == "json":
        return atomic_write(path, dataset_to_json(ds))
    raise ValueError(f"unknown dataset format {fmt!r}; expected csv or json")


# ---------------------------------------------------------------------------
# Reading
# ---------------------------------------------------------------------------

def _from_json_real(x) -> float:
    if isinstance(x, str):
        if x not in _NONFINITE:
            raise ValidationError("rows", f"unexpected value {x!r}")
        return _NONFINITE[x]
    return float(x)


def read_dataset(path: str | Path) -> Dataset:
    """Read a dataset written by :func:`write_dataset`.

    CSV files carry no provenance; the dataset name is the file stem.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        doc = json.loads(text)
        rows = [[_from_json_real(v) for v in row] for row in doc["rows"]]
        return Dataset(
            name=doc["name"],
            columns=tuple(doc["columns"]),
            units=tuple(doc["units"]),
            rows=np.array(rows, dtype=float).reshape(len(rows), len(doc["columns"])),
            provenance=doc.get("provenance", {}),
        )
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines = lines[:-1]
    if not lines:
        raise ValidationError("header", "empty CSV file")
    columns, units = [], []
    for cell in lines[0].split(","):
        match = _HEADER.match(cell)
        if not match:
            raise ValidationError("header", f"malformed column header {cell!r}")
        columns.append(match.group(1))
        units.append(match.group(2))
    rows = [[float(v) for v in line.split(",")] for line in lines[1:]]
    return Dataset(
        name=path.stem,
        columns=tuple(columns),
        units=tuple(units),
        rows=np.array(rows, dtype=float).reshape(len(rows), len(columns)),
    )


# ---------------------------------------------------------------------------
# SVG plots
# ---------------------------------------------------------------------------

WIDTH, HEIGHT = 800, 600
MARGIN = dict(left=90, right=30, top=50, bottom=70)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#7f7f7f")


@dataclass(frozen=True)
class PlotSpec:
    """Column selection for :func:`plot_svg`.

    ``group`` splits the rows into one polyline per distinct value. Without a
    group, rows flagged ``0`` in a ``branch`` column are drawn as a separate
    elastic segment.
    """

    x: str
    y: str
    group: str | None = None
    title: str = ""


def nice_ticks(lo: float, hi: float, target: int = 6) -> np.ndarray:
    """Ticks at multiples of 1, 2, 2.5 or 5 times a power of ten covering ``[lo, hi]``."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("tick range must be finite")
    if hi <= lo:
        pad = abs(lo) * 0.5 if lo != 0 else 1.0
        lo, hi = lo - pad, hi + pad
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1.0, 2.0, 2.5, 5.0, 10.0) if m * mag >= raw * (1 - 1e-12))
    first = math.floor(lo / step + 1e-9)
    last = math.ceil(hi / step - 1e-9)
    return np.array([round(i * step, 12) for i in range(first, last + 1)])


def _label(v: float) -> str:
    text = f"{v:.6g}"
    return "0" if text in ("-0", "0") else text


def _polyline(points: list, color: str, css: str) -> str:
    coords = " ".join(f"{px:.2f},{py:.2f}" for px, py in points)
    return f'<polyline class="{css}" fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>'


def _finite_runs(x: np.ndarray, y: np.ndarray) -> list:
    """Split a curve at non-finite samples."""
    ok = np.isfinite(x) & np.isfinite(y)
    runs, cur = [], []
    for xi, yi, good in zip(x, y, ok):
        if good:
            cur.append((xi, yi))
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        runs.append(cur)
    return runs


def svg_text(ds: Dataset, spec: PlotSpec) -> str:
    """SVG document for ``ds``; see :func:`plot_svg`."""
    if ds.rows.shape[0] == 0:
        raise ValidationError("rows", f"dataset {ds.name!r} is empty")
    x, y = ds.column(spec.x), ds.column(spec.y)
    series = []
    if spec.group is not None:
        g = ds.column(spec.group)
        for value in sorted(set(g[np.isfinite(g)].tolist())):
            mask = g == value
            series.append((f"{spec.group}={_label(value)}", "series", x[mask], y[mask]))
    elif "branch" in ds.columns:
        b = ds.column("branch")
        elastic = b == 0
        # the elastic segment ends where the softening curve starts
        if np.any(elastic):
            first = np.flatnonzero(~elastic)
            tail = np.append(np.flatnonzero(elastic), first[:1])
            series.append(("elastic", "elastic", x[tail], y[tail]))
        series.append((spec.y, "series", x[~elastic], y[~elastic]))
    else:
        series.append((spec.y, "series", x, y))
    ok = np.isfinite(x) & np.isfinite(y)
    if not np.any(ok):
        raise ValidationError("rows", f"dataset {ds.name!r} has no finite points for {spec.x}, {spec.y}")
    xt = nice_ticks(float(np.min(x[ok])), float(np.max(x[ok])))
    yt = nice_ticks(float(np.min(y[ok])), float(np.max(y[ok])))
    x0, x1, y0, y1 = xt[0], xt[-1], yt[0], yt[-1]
    left, right = MARGIN["left"], WIDTH - MARGIN["right"]
    top, bottom = MARGIN["top"], HEIGHT - MARGIN["bottom"]

    def px(v):
        return left + (v - x0) / (x1 - x0) * (right - left)

    def py(v):
        return bottom - (v - y0) / (y1 - y0) * (bottom - top)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{right - left}" height="{bottom - top}" fill="none" stroke="black"/>',
    ]
    for v in xt:
        p = px(v)
        out.append(f'<line x1="{p:.2f}" y1="{bottom}" x2="{p:.2f}" y2="{bottom + 6}" stroke="black"/>')
        out.append(f'<text x="{p:.2f}" y="{bottom + 22}" font-size="12" text-anchor="middle">{_label(v)}</text>')
    for v in yt:
        p = py(v)
        out.append(f'<line x1="{left - 6}" y1="{p:.2f}" x2="{left}" y2="{p:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 10}" y="{p + 4:.2f}" font-size="12" text-anchor="end">{_label(v)}</text>')
    out.append(
        f'<text x="{(left + right) / 2:.2f}" y="{HEIGHT - 20}" font-size="14" text-anchor="middle">'
        f"{spec.x} [{ds.unit(spec.x)}]</text>"
    )
    out.append(
        f'<text x="20" y="{(top + bottom) / 2:.2f}" font-size="14" text-anchor="middle" '
        f'transform="rotate(-90 20 {(top + bottom) / 2:.2f})">{spec.y} [{ds.unit(spec.y)}]</text>'
    )
    title = spec.title or ds.name
    out.append(f'<text x="{WIDTH / 2:.2f}" y="30" font-size="16" text-anchor="middle">{_escape(title)}</text>')
    for i, (name, css, sx, sy) in enumerate(series):
        color = "#000000" if css == "elastic" else PALETTE[i % len(PALETTE)]
        out.append(f'<g data-series="{_escape(name)}">')
        for run in _finite_runs(sx, sy):
            out.append(_polyline([(px(a), py(b)) for a, b in run], color, css))
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def plot_svg(ds: Dataset, spec: PlotSpec, path: str | Path) -> Path:
    """Write a static 800 x 600 line plot of ``spec.y`` against ``spec.x``.

    Raises
    ------
    ColumnNotFound
        ``spec`` names a missing column.
    ValidationError
        The dataset has no rows or no finite points.
    """
    return atomic_write(path, svg_text(ds, spec))
