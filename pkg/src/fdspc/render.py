"""SVG renders of maps, search trees and paths."""

from __future__ import annotations

from typing import Dict, Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .world import WorldModel

PATH_COLORS = ("#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2")


def _runs(mask: np.ndarray):
    """Yield ``(row, col_start, col_end)`` for horizontal runs of true cells."""
    for r in range(mask.shape[0]):
        row = np.concatenate([[False], mask[r], [False]]).astype(np.int8)
        edges = np.flatnonzero(np.diff(row))
        for a, b in zip(edges[::2], edges[1::2]):
            yield r, int(a), int(b)


def render_svg(world: WorldModel, paths: Optional[Dict[str, np.ndarray]] = None, tree=None,
               start=None, goal=None, scale: float = 40.0) -> str:
    """Occupancy in black, the inflation halo in grey, tree nodes and paths on top.

    Open tree nodes are blue and pruned or closed ones red.
    """
    xmin, ymin, xmax, ymax = world.extent
    W, H = (xmax - xmin) * scale, (ymax - ymin) * scale
    res = world.resolution

    def px(x, y):
        return (x - xmin) * scale, (ymax - y) * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:.1f}" height="{H:.1f}" '
           f'viewBox="0 0 {W:.1f} {H:.1f}">',
           f'<rect x="0" y="0" width="{W:.1f}" height="{H:.1f}" fill="white" stroke="black"/>']
    base = world.base_occupancy if world.base_occupancy is not None else world.occupancy
    layers = [("halo", world.occupancy & ~base, "#bbbbbb"), ("obstacle", base, "#222222")]
    for cls, mask, color in layers:
        out.append(f'<g class="{cls}" fill="{color}">')
        for r, a, b in _runs(mask):
            x0, y0 = px(xmin + a * res, ymin + (r + 1) * res)
            out.append(f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{(b - a) * res * scale:.2f}" '
                       f'height="{res * scale:.2f}"/>')
        out.append("</g>")
    if tree is not None:
        out.append('<g class="tree">')
        open_locs = {loc for _, _, loc in tree.index.items()}
        for node in tree:
            s = node.exit_state
            cx, cy = px(s.x, s.y)
            pruned = node.sequ not in open_locs
            color = "red" if pruned else "blue"
            cls = "pruned" if pruned else "open"
            out.append(f'<circle class="{cls}" cx="{cx:.2f}" cy="{cy:.2f}" r="3" fill="{color}"/>')
        out.append("</g>")
    for k, (name, pts) in enumerate((paths or {}).items()):
        pts = np.asarray(pts, dtype=float)
        if len(pts) < 2:
            continue
        coords = " ".join("{:.2f},{:.2f}".format(*px(x, y)) for x, y in pts[:, :2])
        color = PATH_COLORS[k % len(PATH_COLORS)]
        out.append(f'<polyline class="path" data-planner="{escape(name)}" points="{coords}" fill="none" '
                   f'stroke="{color}" stroke-width="2"/>')
    for cls, p, color in (("start", start, "green"), ("goal", goal, "orange")):
        if p is not None:
            cx, cy = px(p[0], p[1])
            out.append(f'<circle class="{cls}" cx="{cx:.2f}" cy="{cy:.2f}" r="5" fill="{color}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
