"""SVG pictures of Z^2 tilings: cores in grey, shell strips colored by (v, z)."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .errors import UsageError
from .schemes.zn import ZnScheme, shell_of_index

CORE_COLOR = "#c8c8c8"
SHELL_COLORS = {(1, 0): "#e4572e", (1, 1): "#f3a712", (2, 0): "#29335c", (2, 1): "#669bbc"}
MAX_SIDE = 720


def _runs(row):
    """(start, length, value) for maximal constant runs of a 1-d array, skipping -1."""
    if row.size == 0:
        return []
    cut = np.flatnonzero(np.diff(row)) + 1
    starts = np.concatenate([[0], cut])
    ends = np.concatenate([cut, [row.size]])
    return [(int(s), int(e - s), int(row[s])) for s, e in zip(starts, ends) if row[s] >= 0]


def color_grid(scheme: ZnScheme, l: int, window) -> np.ndarray:
    """Per cell: -1 uncovered, 0 core, 1 + index into ``SHELL_COLORS`` order for shells."""
    if scheme.dim != 2 or getattr(window, "shape", None) is None or len(window.shape) != 2:
        raise UsageError("SVG output needs the Z^2 scheme on a box window")
    lf = scheme.families((l,), window)
    grid = np.full(window.size, -1, dtype=np.int8)
    grid[lf.C[0].support()] = 0
    keys = list(SHELL_COLORS)
    for D in lf.D[1]:
        _, v, z = shell_of_index(D.label[2], 2)
        grid[D.support()] = 1 + keys.index((v, z))
    return grid.reshape(window.shape)


def render_svg(scheme: ZnScheme, l: int, window, title: str | None = None) -> str:
    grid = color_grid(scheme, l, window)
    w, hgt = window.shape
    cell = max(1, MAX_SIDE // max(w, hgt))
    legend_h = 26
    width, height = w * cell, hgt * cell + legend_h
    palette = [CORE_COLOR] + list(SHELL_COLORS.values())
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" shape-rendering="crispEdges">']
    if title:
        out.append(f"<title>{escape(title)}</title>")
    out.append(f'<rect width="{width}" height="{hgt * cell}" fill="#ffffff"/>')
    # window axis 0 is x (left to right), axis 1 is y (drawn upwards)
    for yi in range(hgt):
        col = grid[:, yi]
        ypix = (hgt - 1 - yi) * cell
        for s, n, c in _runs(col):
            out.append(f'<rect x="{s * cell}" y="{ypix}" width="{n * cell}" height="{cell}" '
                       f'fill="{palette[c]}"/>')
    items = [("core", CORE_COLOR)] + [(f"v={v} z={z}", c) for (v, z), c in SHELL_COLORS.items()]
    y0 = hgt * cell + 6
    x = 4
    for name, color in items:
        out.append(f'<rect x="{x}" y="{y0}" width="14" height="14" fill="{color}" stroke="#333"/>')
        out.append(f'<text x="{x + 18}" y="{y0 + 12}" font-family="sans-serif" font-size="12">'
                   f"{escape(name)}</text>")
        x += 30 + 8 * len(name)
    out.append("</svg>")
    return "\n".join(out) + "\n"
