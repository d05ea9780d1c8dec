"""Result tables, scatter plots, and t-test summaries.

Every writer is byte-deterministic: the same inputs produce the same file,
with fixed number formatting and no timestamps. Degenerate statistics are
printed as the literal NA.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, TooFewPoints
from .sizelaw import SizeLawPoints, TTestResult, ZeroVariance, fit_line

__all__ = [
    "SizeLawReport",
    "TABLE_COLUMNS",
    "write_table",
    "read_table",
    "write_scatter_svg",
    "write_ttest_summary",
    "full_table_path",
]

TABLE_COLUMNS = ("Set", "Pearson", "Spearman", "FR_nonzero", "FR_total", "R2_MP", "Slope", "N")


@dataclass(frozen=True)
class SizeLawReport:
    """Per-dataset summary row; ``points`` feeds the scatter plot."""

    set_name: str
    pearson: float
    spearman: float
    fr_nonzero: int
    fr_total: int
    r_squared_mp: float
    slope: float
    intercept: float
    n_points: int
    points: SizeLawPoints | None = None


def _csv_field(text: str) -> str:
    # Standard CSV quoting, plus explicit quotes for empty fields so they
    # survive a round trip visibly.
    if text == "" or any(c in text for c in ',"\n\r'):
        return '"' + text.replace('"', '""') + '"'
    return text


def _fixed(value: float, decimals: int) -> str:
    if not math.isfinite(value):
        return "NA"
    return f"{value:.{decimals}f}"


def _full(value: float) -> str:
    if not math.isfinite(value):
        return "NA"
    return repr(float(value))


def full_table_path(path) -> Path:
    """table.csv -> table.full.csv (machine-precision companion)."""
    p = Path(path)
    return p.with_name(p.stem + ".full" + p.suffix)


def _table_lines(reports, precise: bool) -> list[str]:
    lines = [",".join(TABLE_COLUMNS)]
    for rep in reports:
        if precise:
            stats = [
                _full(rep.pearson),
                _full(rep.spearman),
                str(int(rep.fr_nonzero)),
                str(int(rep.fr_total)),
                _full(rep.r_squared_mp),
                _full(rep.slope),
                str(int(rep.n_points)),
            ]
        else:
            stats = [
                _fixed(rep.pearson, 2),
                _fixed(rep.spearman, 2),
                str(int(rep.fr_nonzero)),
                str(int(rep.fr_total)),
                _fixed(rep.r_squared_mp, 2),
                _fixed(rep.slope, 4),
                str(int(rep.n_points)),
            ]
        lines.append(",".join([_csv_field(rep.set_name), *stats]))
    return lines


def write_table(reports, path):
    """Write the human table plus its .full.csv machine-precision twin."""
    display = "\n".join(_table_lines(reports, precise=False)) + "\n"
    precise = "\n".join(_table_lines(reports, precise=True)) + "\n"
    Path(path).write_text(display, encoding="utf-8")
    full_table_path(path).write_text(precise, encoding="utf-8")


def _parse_stat(text: str, path, row: int, column: int) -> float:
    if text == "NA":
        return float("nan")
    try:
        return float(text)
    except ValueError:
        raise ParseError(
            f"cell {text!r} is not numeric", path=path, row=row, column=column
        ) from None


def read_table(path) -> list[SizeLawReport]:
    """Parse a table written by write_table back into report rows."""
    import csv

    with open(path, newline="", encoding="utf-8") as handle:
        rows = [row for row in csv.reader(handle) if row]
    if not rows or tuple(rows[0]) != TABLE_COLUMNS:
        raise ParseError(
            f"expected header {','.join(TABLE_COLUMNS)}", path=path, row=1
        )
    reports = []
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(TABLE_COLUMNS):
            raise ParseError(
                f"expected {len(TABLE_COLUMNS)} cells, found {len(row)}", path=path, row=r
            )
        name = row[0]
        pearson_v = _parse_stat(row[1], path, r, 2)
        spearman_v = _parse_stat(row[2], path, r, 3)
        try:
            fr_nonzero = int(row[3])
            fr_total = int(row[4])
            n_points = int(row[7])
        except ValueError:
            raise ParseError("count cell is not an integer", path=path, row=r) from None
        r2 = _parse_stat(row[5], path, r, 6)
        slope = _parse_stat(row[6], path, r, 7)
        reports.append(
            SizeLawReport(
                set_name=name,
                pearson=pearson_v,
                spearman=spearman_v,
                fr_nonzero=fr_nonzero,
                fr_total=fr_total,
                r_squared_mp=r2,
                slope=slope,
                intercept=float("nan"),
                n_points=n_points,
            )
        )
    return reports


def _svg_escape(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def write_scatter_svg(report: SizeLawReport, path):
    """Scatter of z-scored log weight against z-scored log size.

    The red line is the slope -1 reference through the z-origin; the black
    line is the least-squares fit of the plotted z points. When the data
    are exactly on the reference, the two coincide.
    """
    points = report.points
    if points is None or points.n_points < 2:
        count = 0 if points is None else points.n_points
        raise TooFewPoints(f"scatter needs at least 2 points, got {count}")
    zx = points.z_log_sizes
    zy = points.z_log_weights
    half_range = 1.05 * max(1.0, float(abs(zx).max()), float(abs(zy).max()))
    x0, y0, side = 80.0, 50.0, 360.0

    def sx(z: float) -> float:
        return x0 + (z + half_range) / (2.0 * half_range) * side

    def sy(z: float) -> float:
        return y0 + (half_range - z) / (2.0 * half_range) * side

    def pt(x: float, y: float) -> str:
        return f'x="{x:.3f}" y="{y:.3f}"'

    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="480" height="480" '
        'viewBox="0 0 480 480">',
        '<rect x="0" y="0" width="480" height="480" fill="white"/>',
        f'<rect x="{x0:.3f}" y="{y0:.3f}" width="{side:.3f}" height="{side:.3f}" '
        'fill="none" stroke="#888888" stroke-width="1"/>',
    ]
    tick_limit = int(math.floor(half_range))
    for m in range(-tick_limit, tick_limit + 1):
        gx = sx(float(m))
        gy = sy(float(m))
        parts.append(
            f'<line x1="{gx:.3f}" y1="{y0 + side:.3f}" x2="{gx:.3f}" y2="{y0 + side + 6:.3f}" '
            'stroke="#888888" stroke-width="1"/>'
        )
        parts.append(
            f'<text {pt(gx, y0 + side + 20)} font-size="12" text-anchor="middle" '
            f'fill="#333333" font-family="sans-serif">{m}</text>'
        )
        parts.append(
            f'<line x1="{x0 - 6:.3f}" y1="{gy:.3f}" x2="{x0:.3f}" y2="{gy:.3f}" '
            'stroke="#888888" stroke-width="1"/>'
        )
        parts.append(
            f'<text {pt(x0 - 10, gy + 4)} font-size="12" text-anchor="end" '
            f'fill="#333333" font-family="sans-serif">{m}</text>'
        )
    # Reference: slope -1 through the origin of z space, corner to corner.
    parts.append(
        f'<line x1="{sx(-half_range):.3f}" y1="{sy(half_range):.3f}" '
        f'x2="{sx(half_range):.3f}" y2="{sy(-half_range):.3f}" '
        'stroke="#cc0000" stroke-width="2"/>'
    )
    try:
        slope, intercept = fit_line(zx, zy)
    except ZeroVariance:
        slope = None
        intercept = None
    if slope is not None:
        y_left = slope * -half_range + intercept
        y_right = slope * half_range + intercept
        parts.append(
            f'<line x1="{sx(-half_range):.3f}" y1="{sy(y_left):.3f}" '
            f'x2="{sx(half_range):.3f}" y2="{sy(y_right):.3f}" '
            'stroke="#000000" stroke-width="2"/>'
        )
    for px, py in zip(zx, zy):
        parts.append(
            f'<circle cx="{sx(float(px)):.3f}" cy="{sy(float(py)):.3f}" r="4" '
            'fill="#1f5fa6" fill-opacity="0.8"/>'
        )
    parts.append(
        f'<text {pt(x0 + side / 2, 28.0)} font-size="16" text-anchor="middle" '
        f'fill="#000000" font-family="sans-serif">{_svg_escape(report.set_name)}</text>'
    )
    parts.append(
        f'<text {pt(x0 + side / 2, y0 + side + 44)} font-size="13" text-anchor="middle" '
        'fill="#000000" font-family="sans-serif">log feature size (z)</text>'
    )
    parts.append(
        f'<text transform="translate(24.000,{y0 + side / 2:.3f}) rotate(-90)" '
        'font-size="13" text-anchor="middle" fill="#000000" '
        'font-family="sans-serif">log feature weight (z)</text>'
    )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")


def write_ttest_summary(results, path, excluded=None):
    """CSV of named t-test results: statistic, t, df, one-sided p, counts.

    ``results`` holds (name, TTestResult) pairs; ``excluded`` optionally
    maps names to the number of degenerate rows left out.
    """
    excluded = dict(excluded or {})
    lines = ["statistic,t,df,p_one_sided,n_used,n_excluded"]
    for name, result in results:
        if not isinstance(result, TTestResult):
            raise TypeError(f"expected TTestResult for {name!r}")
        p = result.p_value_one_sided
        p_text = "<0.0001" if p < 1e-4 else f"{p:.4f}"
        lines.append(
            ",".join(
                [
                    _csv_field(name),
                    f"{result.t_statistic:.4f}",
                    str(int(result.degrees_of_freedom)),
                    p_text,
                    str(int(result.degrees_of_freedom) + 1),
                    str(int(excluded.get(name, 0))),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
