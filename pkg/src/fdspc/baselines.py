"""Comparator planners: 8-connected grid search and a plain RRT."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .world import WorldModel, first_collision, occupied_mask

SQRT2 = math.sqrt(2.0)
# (drow, dcol, unit cost)
_MOVES = [(-1, 0, 1.0), (1, 0, 1.0), (0, -1, 1.0), (0, 1, 1.0),
          (-1, -1, SQRT2), (-1, 1, SQRT2), (1, -1, SQRT2), (1, 1, SQRT2)]


@dataclass(eq=False)
class GridPath:
    cells: np.ndarray
    points: np.ndarray
    cost: float
    expanded: int = 0

    @property
    def success(self) -> bool:
        return len(self.cells) > 0

    def __len__(self) -> int:
        return len(self.cells)


def free_grid(world: WorldModel, z: float = 0.0) -> np.ndarray:
    """Boolean grid of cells whose centers are free at height ``z``."""
    rows, cols = np.mgrid[0:world.height, 0:world.width]
    res = world.resolution
    x = world.origin[0] + (cols.ravel() + 0.5) * res
    y = world.origin[1] + (rows.ravel() + 0.5) * res
    return ~occupied_mask(world, x, y, z).reshape(world.height, world.width)


def _cell(world: WorldModel, p) -> Tuple[int, int]:
    if len(p) == 2 and all(isinstance(v, (int, np.integer)) for v in p):
        return int(p[0]), int(p[1])
    row, col = world.cell_of(np.array([float(p[0])]), np.array([float(p[1])]))
    return int(row[0]), int(col[0])


def grid_search(world: WorldModel, start, goal, mode: str = "astar", z: float = 0.0) -> GridPath:
    """Best-first search on the 8-connected free grid.

    ``start``/``goal`` are ``(row, col)`` integer cells or ``(x, y)``
    positions. ``mode`` selects the priority: ``astar`` (g + h),
    ``dijkstra`` (g) or ``gbfs`` (h). A diagonal move is allowed only when
    both orthogonal cells it passes between are free, so the straight
    segment between cell centers never touches an occupied cell.
    """
    if mode not in ("astar", "dijkstra", "gbfs"):
        raise ValueError(f"unknown search mode {mode!r}")
    free = free_grid(world, z)
    h_rows, w_cols = free.shape
    s, g = _cell(world, start), _cell(world, goal)
    for what, c in (("start", s), ("goal", g)):
        if not (0 <= c[0] < h_rows and 0 <= c[1] < w_cols) or not free[c]:
            raise ValueError(f"{what} cell {c} is not free")
    res = world.resolution

    def heuristic(c):
        return math.hypot(c[0] - g[0], c[1] - g[1])

    w_g = 0.0 if mode == "gbfs" else 1.0
    w_h = 0.0 if mode == "dijkstra" else 1.0
    best = {s: 0.0}
    parent = {s: None}
    closed = set()
    heap = [(w_h * heuristic(s), 0, s)]
    tie = 1
    expanded = 0
    while heap:
        _, _, c = heapq.heappop(heap)
        if c in closed:
            continue
        closed.add(c)
        expanded += 1
        if c == g:
            break
        r, k = c
        gc = best[c]
        for dr, dc, step in _MOVES:
            nr, nc = r + dr, k + dc
            if not (0 <= nr < h_rows and 0 <= nc < w_cols) or not free[nr, nc]:
                continue
            if dr and dc and not (free[r, nc] and free[nr, k]):
                continue
            n = (nr, nc)
            if n in closed:
                continue
            ng = gc + step
            if ng < best.get(n, math.inf) - 1e-12:
                best[n] = ng
                parent[n] = c
                heapq.heappush(heap, (w_g * ng + w_h * heuristic(n), tie, n))
                tie += 1
    if g not in closed:
        return GridPath(np.zeros((0, 2), dtype=int), np.zeros((0, 2)), math.inf, expanded)
    cells = []
    c = g
    while c is not None:
        cells.append(c)
        c = parent[c]
    cells = np.array(cells[::-1], dtype=int)
    pts = np.column_stack([world.origin[0] + (cells[:, 1] + 0.5) * res,
                           world.origin[1] + (cells[:, 0] + 0.5) * res])
    steps = np.abs(np.diff(cells, axis=0)).sum(axis=1)
    cost = float(np.sum(np.where(steps == 2, SQRT2, 1.0)) * res) if len(cells) > 1 else 0.0
    return GridPath(cells, pts, cost, expanded)


def astar(world: WorldModel, start_cell, goal_cell) -> GridPath:
    return grid_search(world, start_cell, goal_cell, "astar")


def dijkstra(world: WorldModel, start_cell, goal_cell) -> GridPath:
    return grid_search(world, start_cell, goal_cell, "dijkstra")


def gbfs(world: WorldModel, start_cell, goal_cell) -> GridPath:
    return grid_search(world, start_cell, goal_cell, "gbfs")


@dataclass
class RRTParams:
    step: Optional[float] = None  # defaults to 5 grid cells
    goal_bias: float = 0.05
    max_iterations: int = 20000
    goal_tol: Optional[float] = None  # defaults to one step

    def __post_init__(self):
        if not 0 <= self.goal_bias <= 1:
            raise ValueError("goal_bias must lie in [0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(eq=False)
class RRTResult:
    points: Optional[np.ndarray]
    nodes: np.ndarray
    parents: np.ndarray
    iterations: int
    extra: dict = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.points is not None


def _segment_samples(a: np.ndarray, b: np.ndarray, res: float) -> np.ndarray:
    n = max(2, int(math.ceil(math.hypot(b[0] - a[0], b[1] - a[1]) / (0.5 * res))) + 1)
    t = np.arange(n) / (n - 1)
    return a + t[:, None] * (b - a)


class _SegmentChecker:
    """Segment collision checks against a world, cached for repeated calls.

    On flat terrain a cell is either blocked or free at height ``z``
    everywhere inside it, so one lookup table replaces the general test.
    """

    def __init__(self, world: WorldModel, z: float = 0.0):
        self.world = world
        self.z = z
        self.blocked = None
        if world._flat:
            self.blocked = world.occupancy & (z < world.obstacle_height)

    def free(self, a, b) -> bool:
        w = self.world
        pts = _segment_samples(np.asarray(a, dtype=float), np.asarray(b, dtype=float), w.resolution)
        if self.blocked is None:
            return first_collision(w, np.column_stack([pts, np.full(len(pts), self.z)])) is None
        row, col = w.cell_of(pts[:, 0], pts[:, 1])
        if row.min() < 0 or col.min() < 0 or row.max() >= w.height or col.max() >= w.width:
            return False
        return not self.blocked[row, col].any()


def segment_free(world: WorldModel, a, b, z: float = 0.0) -> bool:
    """Collision check of the straight segment ``a -> b`` sampled at half a cell."""
    return _SegmentChecker(world, z).free(a, b)


def densify(points, spacing: float) -> np.ndarray:
    """Resample a polyline so consecutive samples are at most ``spacing`` apart."""
    pts = np.asarray(points, dtype=float)
    out = [pts[:1]]
    for a, b in zip(pts[:-1], pts[1:]):
        n = max(1, int(math.ceil(np.linalg.norm(b - a) / spacing)))
        t = np.arange(1, n + 1)[:, None] / n
        out.append(a + t * (b - a))
    return np.concatenate(out)


def rrt(world: WorldModel, start, goal, seed: int = 0, params: Optional[RRTParams] = None,
        z: float = 0.0) -> RRTResult:
    """Goal-biased RRT with a fixed extension step; deterministic per ``seed``."""
    params = params or RRTParams()
    step = params.step if params.step is not None else 5 * world.resolution
    goal_tol = params.goal_tol if params.goal_tol is not None else step
    rng = np.random.default_rng(seed)
    s = np.array([float(start[0]), float(start[1])])
    g = np.array([float(goal[0]), float(goal[1])])
    if occupied_mask(world, s[0], s[1], z)[0] or occupied_mask(world, g[0], g[1], z)[0]:
        raise ValueError("start and goal must be free")
    xmin, ymin, xmax, ymax = world.extent
    check = _SegmentChecker(world, z)
    cap = params.max_iterations + 2
    nodes = np.empty((cap, 2))
    parents = np.full(cap, -1, dtype=np.int64)
    nodes[0] = s
    n = 1
    for it in range(1, params.max_iterations + 1):
        if rng.random() < params.goal_bias:
            q = g
        else:
            q = rng.uniform((xmin, ymin), (xmax, ymax))
        d2 = np.einsum("ij,ij->i", nodes[:n] - q, nodes[:n] - q)
        near = int(np.argmin(d2))
        dist = math.sqrt(d2[near])
        if dist < 1e-12:
            continue
        new = q if dist <= step else nodes[near] + (q - nodes[near]) * (step / dist)
        if not check.free(nodes[near], new):
            continue
        nodes[n] = new
        parents[n] = near
        n += 1
        if math.hypot(new[0] - g[0], new[1] - g[1]) <= goal_tol and check.free(new, g):
            if np.linalg.norm(new - g) > 0:
                nodes[n] = g
                parents[n] = n - 1
                n += 1
            path = []
            k = n - 1
            while k >= 0:
                path.append(nodes[k])
                k = parents[k]
            return RRTResult(np.array(path[::-1]), nodes[:n].copy(), parents[:n].copy(), it)
    return RRTResult(None, nodes[:n].copy(), parents[:n].copy(), params.max_iterations)
