"""Minimal SVG heatmap writer (no plotting backend)."""
from __future__ import annotations

from xml.sax.saxutils import escape

MAX_CELLS = 200

# white -> dark red ramp for bound-state counts
_RAMP = ["#ffffff", "#fdd49e", "#fc8d59", "#d7301f", "#7f0000"]


def _color(count: int | None) -> str:
    if count is None:
        return "#bdbdbd"
    return _RAMP[min(count, len(_RAMP) - 1)]


def heatmap(counts, feasible, xlabels, ylabels, *, title: str, xname: str, yname: str,
            cell: int = 28) -> str:
    """Heatmap of integer counts with the boundary of the ``feasible`` region outlined.

    ``counts[iy][ix]`` (None for failed cells) and ``feasible[iy][ix]`` are indexed
    by row (y) then column (x); row 0 is drawn at the bottom.
    """
    ny, nx = len(ylabels), len(xlabels)
    if nx > MAX_CELLS or ny > MAX_CELLS:
        raise ValueError(f"heatmap limited to {MAX_CELLS}x{MAX_CELLS} cells")
    cell = max(4, min(cell, 600 // max(nx, ny, 1)))
    left, top, right, bottom = 90, 40, 130, 70
    width, height = left + nx * cell + right, top + ny * cell + bottom

    def xy(ix, iy):
        return left + ix * cell, top + (ny - 1 - iy) * cell

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>',
    ]
    for iy in range(ny):
        for ix in range(nx):
            x, y = xy(ix, iy)
            c = counts[iy][ix]
            out.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{_color(c)}" '
                       f'stroke="#999999" stroke-width="0.5"><title>{xname}={xlabels[ix]}, '
                       f'{yname}={ylabels[iy]}: {"failed" if c is None else c}</title></rect>')
            if c is not None and cell >= 16:
                out.append(f'<text x="{x + cell / 2:.1f}" y="{y + cell / 2 + 4:.1f}" '
                           f'text-anchor="middle" font-size="9">{c}</text>')

    # boundary of the feasible region: edges between feasible and infeasible cells
    segs = []
    for iy in range(ny):
        for ix in range(nx):
            if not feasible[iy][ix]:
                continue
            x, y = xy(ix, iy)
            if ix == 0 or not feasible[iy][ix - 1]:
                segs.append((x, y, x, y + cell))
            if ix == nx - 1 or not feasible[iy][ix + 1]:
                segs.append((x + cell, y, x + cell, y + cell))
            if iy == 0 or not feasible[iy - 1][ix]:
                segs.append((x, y + cell, x + cell, y + cell))
            if iy == ny - 1 or not feasible[iy + 1][ix]:
                segs.append((x, y, x + cell, y))
    for x1, y1, x2, y2 in segs:
        out.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="#08519c" stroke-width="3"/>')

    for ix, lab in enumerate(xlabels):
        x, _ = xy(ix, 0)
        out.append(f'<text x="{x + cell / 2:.1f}" y="{top + ny * cell + 14}" text-anchor="end" '
                   f'transform="rotate(-45 {x + cell / 2:.1f} {top + ny * cell + 14})">{escape(str(lab))}</text>')
    for iy, lab in enumerate(ylabels):
        _, y = xy(0, iy)
        out.append(f'<text x="{left - 6}" y="{y + cell / 2 + 4:.1f}" text-anchor="end">{escape(str(lab))}</text>')
    out.append(f'<text x="{left + nx * cell / 2:.1f}" y="{height - 8}" text-anchor="middle">{escape(xname)}</text>')
    out.append(f'<text x="16" y="{top + ny * cell / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ny * cell / 2:.1f})">{escape(yname)}</text>')

    lx = left + nx * cell + 16
    out.append(f'<text x="{lx}" y="{top + 8}">bound states</text>')
    for k, col in enumerate(_RAMP):
        label = f"{k}+" if k == len(_RAMP) - 1 else str(k)
        out.append(f'<rect x="{lx}" y="{top + 16 + 16 * k}" width="12" height="12" fill="{col}" stroke="#999999"/>')
        out.append(f'<text x="{lx + 18}" y="{top + 26 + 16 * k}">{label}</text>')
    ly = top + 32 + 16 * len(_RAMP)
    out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 14}" y2="{ly}" stroke="#08519c" stroke-width="3"/>')
    out.append(f'<text x="{lx + 18}" y="{ly + 4}">criterion met</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
