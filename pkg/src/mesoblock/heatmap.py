"""Minimal SVG heatmaps with a diverging palette, no plotting dependency."""

from __future__ import annotations

import csv
import io
import math

import numpy as np

from .errors import MesoError

# negative, zero, positive
DEFAULT_PALETTE = ("#b2182b", "#f7f7f7", "#2166ac")


def _rgb(hex_color):
    h = hex_color.lstrip("#")
    return tuple(int(h[i:i + 2], 16) for i in (0, 2, 4))


def _mix(c0, c1, t):
    return "#" + "".join(f"{round(a + (b - a) * t):02x}" for a, b in zip(_rgb(c0), _rgb(c1)))


def color_for(value, vmax, palette=DEFAULT_PALETTE):
    if value is None or not math.isfinite(value):
        return "#bdbdbd"
    neg, mid, pos = palette
    t = 0.0 if vmax == 0 else max(-1.0, min(1.0, value / vmax))
    return _mix(mid, pos, t) if t >= 0 else _mix(mid, neg, -t)


def read_grid_csv(text: str, x: str, y: str, value: str, where: dict = None):
    """Pivot a long-format CSV into ``(xs, ys, grid)`` with ``grid[iy, ix]``.

    Lines starting with ``#`` are skipped. ``where`` filters rows by exact
    string match on other columns.
    """
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if len(lines) < 2:
        raise MesoError("grid CSV has no data rows")
    rows = list(csv.DictReader(lines))
    for col in (x, y, value):
        if col not in rows[0]:
            raise MesoError(f"grid CSV lacks column {col!r}")
    if where:
        rows = [r for r in rows if all(r[k] == v for k, v in where.items())]
    if not rows:
        raise MesoError("no rows left after filtering")
    xs = sorted({float(r[x]) for r in rows})
    ys = sorted({float(r[y]) for r in rows})
    grid = np.full((len(ys), len(xs)), np.nan)
    seen = np.zeros(grid.shape, dtype=bool)
    for r in rows:
        iy, ix = ys.index(float(r[y])), xs.index(float(r[x]))
        if seen[iy, ix]:
            raise MesoError(f"duplicate grid cell ({r[x]}, {r[y]})")
        seen[iy, ix] = True
        grid[iy, ix] = float(r[value])
    if not seen.all():
        raise MesoError("ragged grid: some (x, y) cells are missing")
    return np.array(xs), np.array(ys), grid


def emit_heatmap(xs, ys, grid, boundary=None, palette=DEFAULT_PALETTE, title="",
                 x_label="", y_label="", cell=16) -> str:
    """SVG text for ``grid[iy, ix]``; ``y`` increases upwards.

    ``boundary`` is a sequence of ``(x, y)`` data points drawn as one
    dashed polyline. The palette is symmetric about zero.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 2 or grid.size == 0:
        raise MesoError("heatmap needs a non-empty 2-d grid")
    ny, nx = grid.shape
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    if xs.size != nx or ys.size != ny:
        raise MesoError("axis lengths do not match the grid")
    finite = grid[np.isfinite(grid)]
    vmax = float(np.abs(finite).max()) if finite.size else 0.0
    left, top = 48, 28
    w, h = nx * cell, ny * cell
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{left + w + 12}" height="{top + h + 40}" '
        f'font-family="sans-serif" font-size="10">',
        f'<text x="{left}" y="16">{title}</text>',
    ]
    for iy in range(ny):
        for ix in range(nx):
            fill = color_for(grid[iy, ix], vmax, palette)
            out.append(f'<rect x="{left + ix * cell}" y="{top + (ny - 1 - iy) * cell}" '
                       f'width="{cell}" height="{cell}" fill="{fill}"/>')

    def px(xv):
        if nx == 1:
            return left + cell / 2
        return left + cell / 2 + (xv - xs[0]) / (xs[-1] - xs[0]) * (nx - 1) * cell

    def py(yv):
        if ny == 1:
            return top + cell / 2
        return top + h - cell / 2 - (yv - ys[0]) / (ys[-1] - ys[0]) * (ny - 1) * cell

    if boundary is not None and len(boundary):
        pts = " ".join(f"{px(bx):.2f},{py(by):.2f}" for bx, by in boundary
                       if ys[0] <= by <= ys[-1])
        out.append(f'<polyline points="{pts}" fill="none" stroke="black" '
                   f'stroke-width="1.5" stroke-dasharray="4,3"/>')
    out.append(f'<text x="{left}" y="{top + h + 14}">{x_label} {xs[0]:g} .. {xs[-1]:g}</text>')
    out.append(f'<text x="{left}" y="{top + h + 28}">{y_label} {ys[0]:g} .. {ys[-1]:g}; '
               f'|max| {vmax:.4g}</text>')
    out.append("</svg>\n")
    return "\n".join(out)


def grid_to_csv_text(header_lines, columns, rows) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()
