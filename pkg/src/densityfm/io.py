"""Plain-text file formats.

Every file starts with a ``# format: <name> v1`` comment. Lines starting with
``#`` and blank lines are ignored by the readers. Floats are written with
Python's shortest round-trip representation, so a write/read cycle is exact.
"""

import csv
import io
import math
from pathlib import Path

import numpy as np

from .errors import InputError


class ParseError(InputError):
    def __init__(self, source, line, message):
        self.source = source
        self.line = line
        super().__init__(f"{source}:{line}: {message}")


def fmt(value):
    """Shortest round-trip text for a float; ``None`` becomes an empty field."""
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return "nan"
    return repr(value + 0.0)


def header(name):
    return f"# format: {name} v1\n"


def _data_lines(text):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield number, line


def _read_text(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _floats(source, number, line, arity):
    fields = line.split()
    if len(fields) != arity:
        raise ParseError(source, number, f"expected {arity} numbers, found {len(fields)}: {line!r}")
    try:
        values = [float(f) for f in fields]
    except ValueError:
        raise ParseError(source, number, f"not a number in {line!r}") from None
    if not all(math.isfinite(v) for v in values):
        raise ParseError(source, number, f"non-finite value in {line!r}")
    return values


# --- matches ---------------------------------------------------------------

def format_matches(pairs):
    lines = [header("matches"), "# x y x' y'\n"]
    for row in np.asarray(pairs, dtype=float).reshape(-1, 4):
        lines.append(" ".join(fmt(v) for v in row) + "\n")
    return "".join(lines)


def parse_matches(text, source="<matches>"):
    rows = [_floats(source, n, line, 4) for n, line in _data_lines(text)]
    return np.array(rows, dtype=float).reshape(-1, 4)


def read_matches(path):
    return parse_matches(_read_text(path), str(path))


def write_matches(path, pairs):
    Path(path).write_text(format_matches(pairs))


# --- fundamental matrix ----------------------------------------------------

def format_fmatrix(F):
    F = np.asarray(F, dtype=float)
    return header("fmatrix") + "".join(" ".join(fmt(v) for v in row) + "\n" for row in F)


def parse_fmatrix(text, source="<fmatrix>"):
    """Read F from an fmatrix file, or the F0 block of a ground-truth sidecar."""
    if text.startswith(header("groundtruth")):
        return parse_ground_truth(text, source)[0]
    rows = [_floats(source, n, line, 3) for n, line in _data_lines(text)]
    if len(rows) != 3:
        raise ParseError(source, 0, f"expected 3 rows, found {len(rows)}")
    return np.array(rows, dtype=float)


def read_fmatrix(path):
    return parse_fmatrix(_read_text(path), str(path))


# --- ground-truth sidecar --------------------------------------------------

def format_ground_truth(f0, truth_mask):
    out = [header("groundtruth"), "# F0, row-major\n"]
    out.extend(" ".join(fmt(v) for v in row) + "\n" for row in np.asarray(f0, dtype=float))
    out.append("# truth mask, one 0/1 per match\n")
    out.extend(f"{int(bool(v))}\n" for v in truth_mask)
    return "".join(out)


def parse_ground_truth(text, source="<groundtruth>"):
    lines = list(_data_lines(text))
    if len(lines) < 3:
        raise ParseError(source, 0, "missing F0 rows")
    f0 = np.array([_floats(source, n, line, 3) for n, line in lines[:3]])
    mask = []
    for n, line in lines[3:]:
        if line not in ("0", "1"):
            raise ParseError(source, n, f"mask entries must be 0 or 1: {line!r}")
        mask.append(line == "1")
    return f0, np.array(mask, dtype=bool)


def read_ground_truth(path):
    return parse_ground_truth(_read_text(path), str(path))


# --- decision figure -------------------------------------------------------

DECISION_COLUMNS = ("index", "rho", "delta", "gamma", "inlier", "parent")


def format_decision_figure(figure):
    out = io.StringIO()
    out.write(header("decision-figure"))
    out.write(
        f"# d_c={fmt(figure.d_c)} alpha={fmt(figure.alpha)} curve={fmt(figure.curve_constant)}\n"
    )
    out.write(",".join(DECISION_COLUMNS) + "\n")
    for r in figure.records:
        out.write(f"{r.index},{r.rho},{fmt(r.delta)},{fmt(r.gamma)},{int(r.inlier)},{r.nearest_higher}\n")
    return out.getvalue()


def parse_decision_figure(text):
    rows = [line for line in text.splitlines() if line and not line.startswith("#")]
    reader = csv.DictReader(rows)
    return [
        (int(r["index"]), int(r["rho"]), float(r["delta"]), float(r["gamma"]),
         r["inlier"] == "1", int(r["parent"]))
        for r in reader
    ]


def decision_figure_svg(figure, size=(480, 360)):
    """Minimal static scatter of (rho, delta) with the rejection curve."""
    w, h = size
    pad = 40
    rho = np.array([r.rho for r in figure.records], dtype=float)
    delta = np.array([r.delta for r in figure.records], dtype=float)
    rmax = max(rho.max(initial=0.0), 1.0)
    dmax = max(delta.max(initial=0.0), 1e-12)

    def px(r, d):
        return pad + (w - 2 * pad) * r / rmax, h - pad - (h - 2 * pad) * d / dmax

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<line x1="{pad}" y1="{h - pad}" x2="{w - pad}" y2="{h - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{h - pad}" stroke="black"/>',
        f'<text x="{w / 2}" y="{h - 8}" font-size="12">rho</text>',
        f'<text x="6" y="{h / 2}" font-size="12">delta</text>',
    ]
    if figure.curve_constant > 0:
        rs = np.linspace(max(figure.curve_constant / dmax, 1e-9), rmax, 100)
        pts = " ".join("%.2f,%.2f" % px(r, figure.curve_constant / r) for r in rs)
        parts.append(f'<polyline points="{pts}" fill="none" stroke="red"/>')
    for r in figure.records:
        x, y = px(r.rho, r.delta)
        colour = "black" if r.inlier else "gray"
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="{colour}"/>')
    parts.append("</svg>\n")
    return "\n".join(parts)


# --- benchmark rows ---------------------------------------------------------

BENCHMARK_COLUMNS = ("method", "th", "alpha", "seed", "time_ms", "mean_error_px", "d1_px", "status")


def format_benchmark(rows):
    out = io.StringIO()
    out.write(header("benchmark"))
    out.write(",".join(BENCHMARK_COLUMNS) + "\n")
    for r in rows:
        fields = [r.method, fmt(r.th), fmt(r.alpha), str(r.seed), f"{r.time_ms:.3f}",
                  fmt(r.mean_error_px), fmt(r.d1_px), r.status]
        out.write(",".join(fields) + "\n")
    return out.getvalue()


def parse_benchmark(text):
    rows = [line for line in text.splitlines() if line and not line.startswith("#")]
    return list(csv.DictReader(rows))
