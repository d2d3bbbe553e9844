"""CSV and SVG output for bound reports and rate studies.

Floats are written with 17 significant digits, so every emitted CSV
re-parses to the originating values exactly.
"""

from __future__ import annotations

import csv
import io
import math
from typing import Iterable, Sequence

from .bounds import BoundReport
from .estimation import RateStudyRecord
from .experiments import DominanceRow
from .measures import ChannelParams

BOUND_COLUMNS = (
    "epsilon", "a", "sigma", "gamma", "r_epsilon", "u_epsilon", "e_max",
    "l2_bound", "tv_bound", "t_factor", "ell", "theorem2_bound", "status",
)
RATE_COLUMNS = (
    "n", "trial", "seed", "hellinger_sq", "tv_poisson", "tv_gaussian", "w1_smoothed", "runtime_ms",
)
DOMINANCE_COLUMNS = ("pair", "tv_poisson", "tv_gaussian", "theorem1_ratio", "theorem2_ratio")


def fmt(x) -> str:
    if isinstance(x, (bool, str)):
        return str(x)
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def write_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(header)
    for row in rows:
        out.writerow([fmt(v) for v in row])
    return buf.getvalue()


def read_csv(text: str, header: Sequence[str]) -> list[dict[str, str]]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != tuple(header):
        raise ValueError(f"unexpected CSV header {reader.fieldnames}; expected {list(header)}")
    return list(reader)


# ----------------------------------------------------------------------
# Bound reports
# ----------------------------------------------------------------------


def bound_row(report: BoundReport, theorem2: float) -> tuple:
    p = report.params
    return (
        report.epsilon, p.a, p.sigma, p.gamma, report.r_epsilon, report.u_epsilon, report.e_max,
        report.l2_bound, report.tv_bound, report.t_factor, report.ell, theorem2, report.status,
    )


def bounds_to_csv(reports: Iterable[tuple[BoundReport, float]]) -> str:
    """CSV of ``(report, theorem2_bound)`` pairs."""
    return write_csv(BOUND_COLUMNS, (bound_row(r, t2) for r, t2 in reports))


def bounds_from_csv(text: str, tol: float | None = None) -> list[tuple[BoundReport, float]]:
    out = []
    for row in read_csv(text, BOUND_COLUMNS):
        kw = {} if tol is None else {"tol": tol}
        params = ChannelParams(a=float(row["a"]), sigma=float(row["sigma"]), gamma=float(row["gamma"]), **kw)
        status = row["status"]
        report = BoundReport(
            epsilon=float(row["epsilon"]),
            params=params,
            r_epsilon=float(row["r_epsilon"]),
            u_epsilon=float(row["u_epsilon"]),
            e_max=float(row["e_max"]),
            l2_bound=float(row["l2_bound"]),
            tv_bound=float(row["tv_bound"]),
            t_factor=float(row["t_factor"]),
            ell=float(row["ell"]),
            vacuous=status == "vacuous",
            status=status,
        )
        out.append((report, float(row["theorem2_bound"])))
    return out


# ----------------------------------------------------------------------
# Rate studies and dominance sweeps
# ----------------------------------------------------------------------


def rate_to_csv(records: Iterable[RateStudyRecord]) -> str:
    return write_csv(RATE_COLUMNS, ([getattr(r, c) for c in RATE_COLUMNS] for r in records))


def rate_from_csv(text: str) -> list[RateStudyRecord]:
    out = []
    for row in read_csv(text, RATE_COLUMNS):
        ints = {c: int(row[c]) for c in ("n", "trial", "seed")}
        floats = {c: float(row[c]) for c in RATE_COLUMNS[3:]}
        out.append(RateStudyRecord(**ints, **floats))
    return out


def dominance_to_csv(rows: Iterable[DominanceRow]) -> str:
    return write_csv(DOMINANCE_COLUMNS, ([getattr(r, c) for c in DOMINANCE_COLUMNS] for r in rows))


def dominance_from_csv(text: str) -> list[DominanceRow]:
    return [
        DominanceRow(int(row["pair"]), *(float(row[c]) for c in DOMINANCE_COLUMNS[1:]))
        for row in read_csv(text, DOMINANCE_COLUMNS)
    ]


# ----------------------------------------------------------------------
# Log-log rate plot
# ----------------------------------------------------------------------

_W, _H, _PAD = 640, 440, 70


def rate_plot_svg(summary: Sequence[tuple[int, float, float]], slope: float, stderr: float, metric: str) -> str:
    """Log-log plot of mean metric against n with standard-error bars.

    Output depends only on the inputs (fixed number formatting, no
    timestamps), so identical studies give byte-identical files.
    """
    ns = [s[0] for s in summary]
    lo_vals = [max(m - se, m * 1e-3) for _, m, se in summary]
    hi_vals = [m + se for _, m, se in summary]
    lx0, lx1 = math.log10(min(ns)), math.log10(max(ns))
    ly0, ly1 = math.log10(min(lo_vals)), math.log10(max(hi_vals))
    if lx1 == lx0:
        lx0, lx1 = lx0 - 0.5, lx1 + 0.5
    if ly1 == ly0:
        ly0, ly1 = ly0 - 0.5, ly1 + 0.5
    mx, my = 0.05 * (lx1 - lx0), 0.08 * (ly1 - ly0)
    lx0, lx1, ly0, ly1 = lx0 - mx, lx1 + mx, ly0 - my, ly1 + my

    def px(n):
        return _PAD + (math.log10(n) - lx0) / (lx1 - lx0) * (_W - 2 * _PAD)

    def py(v):
        return _H - _PAD - (math.log10(v) - ly0) / (ly1 - ly0) * (_H - 2 * _PAD)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<rect x="{_PAD}" y="{_PAD}" width="{_W - 2 * _PAD}" height="{_H - 2 * _PAD}" fill="none" stroke="black"/>',
    ]
    for k in range(math.ceil(lx0), math.floor(lx1) + 1):
        x = px(10.0**k)
        parts.append(f'<text x="{x:.2f}" y="{_H - _PAD + 18}" font-size="12" text-anchor="middle">1e{k}</text>')
    for k in range(math.ceil(ly0), math.floor(ly1) + 1):
        y = py(10.0**k)
        parts.append(f'<text x="{_PAD - 6}" y="{y + 4:.2f}" font-size="12" text-anchor="end">1e{k}</text>')
    # fitted line through the centroid of the log points
    cx = sum(math.log10(n) for n in ns) / len(ns)
    cy = sum(math.log10(m) for _, m, _ in summary) / len(summary)
    x_a, x_b = math.log10(min(ns)), math.log10(max(ns))
    y_a, y_b = cy + slope * (x_a - cx), cy + slope * (x_b - cx)
    parts.append(
        f'<line x1="{px(10**x_a):.2f}" y1="{py(10**y_a):.2f}" x2="{px(10**x_b):.2f}" y2="{py(10**y_b):.2f}" '
        'stroke="steelblue" stroke-dasharray="6,4"/>'
    )
    for (n, m, _), lo, hi in zip(summary, lo_vals, hi_vals):
        x = px(n)
        parts.append(f'<line x1="{x:.2f}" y1="{py(lo):.2f}" x2="{x:.2f}" y2="{py(hi):.2f}" stroke="black"/>')
        parts.append(f'<circle cx="{x:.2f}" cy="{py(m):.2f}" r="3.5" fill="black"/>')
    parts.append(f'<text x="{_W / 2:.0f}" y="{_H - 20}" font-size="14" text-anchor="middle">n</text>')
    parts.append(
        f'<text x="20" y="{_H / 2:.0f}" font-size="14" text-anchor="middle" '
        f'transform="rotate(-90 20 {_H / 2:.0f})">mean {metric}</text>'
    )
    parts.append(
        f'<text x="{_W / 2:.0f}" y="{_PAD - 20}" font-size="14" text-anchor="middle">'
        f"slope = {slope:.6f} (se {stderr:.6f})</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
