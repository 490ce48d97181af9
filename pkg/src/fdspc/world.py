"""Occupancy + elevation world model, scenario loading and collision queries."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage


class ScenarioError(ValueError):
    """Raised for malformed scenario documents.

    ``line`` and ``column`` are 1-based positions when the error comes from
    the JSON parser, otherwise ``None``.
    """

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Point25:
    x: float
    y: float
    z: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError(f"non-finite point {self!r}")


@dataclass(frozen=True, eq=False)
class WorldModel:
    """Immutable 2.5-D grid world.

    Arrays are indexed ``[row, col]`` with rows along +y and columns along +x;
    cell ``(r, c)`` covers ``[ox + c*res, ox + (c+1)*res) x [oy + r*res, oy + (r+1)*res)``.
    ``obstacle_height`` is ``inf`` for walls that can never be crossed.
    """

    resolution: float
    occupancy: np.ndarray
    elevation: np.ndarray
    obstacle_height: np.ndarray
    origin: tuple = (0.0, 0.0)
    inflation_radius: Optional[float] = None
    base_occupancy: Optional[np.ndarray] = field(default=None, repr=False)
    base_obstacle_height: Optional[np.ndarray] = field(default=None, repr=False)
    start: Optional[tuple] = None
    goal: Optional[tuple] = None
    robot_radius: Optional[float] = None
    name: str = ""

    def __post_init__(self):
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        if self.occupancy.ndim != 2 or min(self.occupancy.shape) < 1:
            raise ValueError("occupancy must be a non-empty 2-D array")
        if self.elevation.shape != self.occupancy.shape or self.obstacle_height.shape != self.occupancy.shape:
            raise ValueError("occupancy, elevation and obstacle_height must share a shape")
        if np.any(self.obstacle_height[self.occupancy] < 0):
            raise ValueError("obstacle heights must be non-negative")
        for arr in (self.occupancy, self.elevation, self.obstacle_height):
            arr.setflags(write=False)
        object.__setattr__(self, "_flat", not np.any(self.elevation))

    @property
    def height(self) -> int:
        return self.occupancy.shape[0]

    @property
    def width(self) -> int:
        return self.occupancy.shape[1]

    @property
    def extent(self) -> tuple:
        """(xmin, ymin, xmax, ymax) in meters."""
        ox, oy = self.origin
        return ox, oy, ox + self.width * self.resolution, oy + self.height * self.resolution

    @property
    def inflated(self) -> bool:
        return self.inflation_radius is not None

    def cell_of(self, x, y):
        """Return (row, col) integer index arrays for world coordinates."""
        ox, oy = self.origin
        col = np.floor((np.asarray(x, dtype=float) - ox) / self.resolution).astype(np.int64)
        row = np.floor((np.asarray(y, dtype=float) - oy) / self.resolution).astype(np.int64)
        return row, col

    def cell_center(self, row: int, col: int) -> tuple:
        ox, oy = self.origin
        return ox + (col + 0.5) * self.resolution, oy + (row + 0.5) * self.resolution

    def in_bounds(self, x, y):
        row, col = self.cell_of(x, y)
        return (row >= 0) & (row < self.height) & (col >= 0) & (col < self.width)


def _parse_error(msg: str) -> ScenarioError:
    return ScenarioError(msg)


def _number(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{what} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ScenarioError(f"{what} must be finite")
    return float(value)


def points_in_polygon(px: np.ndarray, py: np.ndarray, polygon: Sequence[Sequence[float]]) -> np.ndarray:
    """Even-odd crossing test, vectorized over query points."""
    poly = np.asarray(polygon, dtype=float)
    inside = np.zeros(np.shape(px), dtype=bool)
    xj, yj = poly[-1]
    for xi, yi in poly:
        straddles = (yi > py) != (yj > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_cross = (xj - xi) * (py - yi) / (yj - yi) + xi
        inside ^= straddles & (px < x_cross)
        xj, yj = xi, yi
    return inside


def load_scenario(text: str, name: str = "") -> WorldModel:
    """Parse a scenario document into a (non-inflated) :class:`WorldModel`.

    Obstacles are rasterized by cell-center containment. Ramps set the
    elevation of the cells whose centers fall inside their rectangle.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    for key in ("resolution", "width", "height"):
        if key not in doc:
            raise ScenarioError(f"missing required key {key!r}")
    res = _number(doc["resolution"], "resolution")
    if res <= 0:
        raise ScenarioError("resolution must be positive")
    width_m = _number(doc["width"], "width")
    height_m = _number(doc["height"], "height")
    if width_m <= 0 or height_m <= 0:
        raise ScenarioError("map width and height must be positive")
    ncols = max(1, int(round(width_m / res)))
    nrows = max(1, int(round(height_m / res)))
    xs = (np.arange(ncols) + 0.5) * res
    ys = (np.arange(nrows) + 0.5) * res
    cx, cy = np.meshgrid(xs, ys)

    occupancy = np.zeros((nrows, ncols), dtype=bool)
    obstacle_height = np.zeros((nrows, ncols), dtype=float)
    for k, obs in enumerate(doc.get("obstacles", []) or []):
        if not isinstance(obs, dict) or "polygon" not in obs:
            raise ScenarioError(f"obstacle {k}: expected an object with a 'polygon'")
        poly = obs["polygon"]
        if not isinstance(poly, list) or len(poly) < 3:
            raise ScenarioError(f"obstacle {k}: polygon needs at least 3 vertices")
        verts = []
        for v in poly:
            if not isinstance(v, list) or len(v) != 2:
                raise ScenarioError(f"obstacle {k}: vertices must be [x, y] pairs")
            x, y = _number(v[0], "vertex x"), _number(v[1], "vertex y")
            if not (0.0 <= x <= width_m and 0.0 <= y <= height_m):
                raise ScenarioError(f"obstacle {k}: vertex ({x}, {y}) outside map bounds")
            verts.append((x, y))
        h = obs.get("height")
        h = math.inf if h is None else _number(h, "obstacle height")
        if h < 0:
            raise ScenarioError(f"obstacle {k}: negative height")
        mask = points_in_polygon(cx, cy, verts)
        # overlapping obstacles keep the taller one
        obstacle_height[mask] = np.where(occupancy[mask], np.maximum(obstacle_height[mask], h), h)
        occupancy |= mask

    elevation = np.zeros((nrows, ncols), dtype=float)
    for k, ramp in enumerate(doc.get("ramps", []) or []):
        try:
            x0, y0, x1, y1 = (_number(v, "ramp rect") for v in ramp["rect"])
            z0, z1 = _number(ramp["z0"], "z0"), _number(ramp["z1"], "z1")
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(f"ramp {k}: expected rect [x0,y0,x1,y1], z0, z1") from None
        axis = ramp.get("axis", "x")
        if axis not in ("x", "y"):
            raise ScenarioError(f"ramp {k}: axis must be 'x' or 'y'")
        lo_x, hi_x = sorted((x0, x1))
        lo_y, hi_y = sorted((y0, y1))
        if lo_x < 0 or lo_y < 0 or hi_x > width_m or hi_y > height_m:
            raise ScenarioError(f"ramp {k}: rectangle outside map bounds")
        mask = (cx >= lo_x) & (cx <= hi_x) & (cy >= lo_y) & (cy <= hi_y)
        if axis == "x":
            t = (cx - x0) / (x1 - x0) if x1 != x0 else np.zeros_like(cx)
        else:
            t = (cy - y0) / (y1 - y0) if y1 != y0 else np.zeros_like(cy)
        elevation[mask] = (z0 + np.clip(t, 0.0, 1.0) * (z1 - z0))[mask]

    start = doc.get("start")
    goal = doc.get("goal")
    if start is not None:
        if not isinstance(start, list) or len(start) != 3:
            raise ScenarioError("start must be [x, y, theta]")
        start = tuple(_number(v, "start") for v in start)
    if goal is not None:
        if not isinstance(goal, list) or len(goal) != 2:
            raise ScenarioError("goal must be [x, y]")
        goal = tuple(_number(v, "goal") for v in goal)
    robot_radius = doc.get("robot_radius")
    if robot_radius is not None:
        robot_radius = _number(robot_radius, "robot_radius")
        if robot_radius < 0:
            raise ScenarioError("robot_radius must be non-negative")
    return WorldModel(
        resolution=res,
        occupancy=occupancy,
        elevation=elevation,
        obstacle_height=obstacle_height,
        start=start,
        goal=goal,
        robot_radius=robot_radius,
        name=name or str(doc.get("name", "")),
    )


def load_scenario_file(path) -> WorldModel:
    from pathlib import Path

    path = Path(path)
    return load_scenario(path.read_text(encoding="utf-8"), name=path.stem)


def expansion_radius(r_robot: float) -> float:
    """Obstacle growth margin for a robot of radius ``r_robot``."""
    return max(r_robot + 0.1, r_robot * 1.1)


def inflate(world: WorldModel, r_robot: float) -> WorldModel:
    """Grow obstacles by ``expansion_radius(r_robot)``.

    Always inflates from the original (pre-inflation) occupancy, so repeated
    inflation with the same radius is a no-op.
    """
    if r_robot < 0:
        raise ValueError("r_robot must be non-negative")
    base = world.base_occupancy if world.base_occupancy is not None else world.occupancy
    base_h = world.base_obstacle_height if world.base_obstacle_height is not None else world.obstacle_height
    r_exp = expansion_radius(r_robot)
    if not base.any():
        occupancy = base.copy()
        heights = base_h.copy()
    else:
        dist, (ri, ci) = ndimage.distance_transform_edt(~base, return_indices=True)
        occupancy = dist * world.resolution <= r_exp + 1e-9
        heights = np.where(base, base_h, base_h[ri, ci])
        heights = np.where(occupancy, heights, 0.0)
    return replace(
        world,
        occupancy=occupancy,
        obstacle_height=heights,
        elevation=world.elevation.copy(),
        inflation_radius=r_exp,
        base_occupancy=base,
        base_obstacle_height=base_h,
    )


def elevation_at(world: WorldModel, x: float, y: float):
    """Bilinear interpolation of the elevation field over cell centers.

    Queries between the outermost cell centers and the map edge use the
    edge cell values.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xmin, ymin, xmax, ymax = world.extent
    if np.any((x < xmin) | (x > xmax) | (y < ymin) | (y > ymax)):
        raise ValueError("elevation query outside map bounds")
    if world._flat:
        out = np.zeros(np.broadcast(x, y).shape)
        return float(out) if out.ndim == 0 else out
    return _bilinear(world, x, y)


def _bilinear(world: WorldModel, x, y):
    res = world.resolution
    ox, oy = world.origin
    fx = np.clip((x - ox) / res - 0.5, 0.0, world.width - 1)
    fy = np.clip((y - oy) / res - 0.5, 0.0, world.height - 1)
    c0 = np.minimum(np.floor(fx).astype(np.int64), world.width - 1)
    r0 = np.minimum(np.floor(fy).astype(np.int64), world.height - 1)
    c1 = np.minimum(c0 + 1, world.width - 1)
    r1 = np.minimum(r0 + 1, world.height - 1)
    tx = fx - c0
    ty = fy - r0
    e = world.elevation
    out = (e[r0, c0] * (1 - tx) * (1 - ty) + e[r0, c1] * tx * (1 - ty)
           + e[r1, c0] * (1 - tx) * ty + e[r1, c1] * tx * ty)
    return float(out) if np.ndim(out) == 0 else out


def occupied_mask(world: WorldModel, x, y, z) -> np.ndarray:
    """Vectorized occupancy test; out-of-bounds points count as occupied."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    z = np.broadcast_to(np.asarray(z, dtype=float), x.shape)
    row, col = world.cell_of(x, y)
    inb = (row >= 0) & (row < world.height) & (col >= 0) & (col < world.width)
    hit = ~inb
    if not inb.any():
        return hit
    ri, ci = row[inb], col[inb]
    occ = world.occupancy[ri, ci]
    if occ.any():
        top = world.obstacle_height[ri, ci]
        if not world._flat:
            top = top + _bilinear(world, x[inb], y[inb])
        occ &= z[inb] < top
    hit[inb] = occ
    return hit


def occupied_at(world: WorldModel, p: Point25) -> bool:
    return bool(occupied_mask(world, p.x, p.y, p.z)[0])


def _as_xyz(waypoints) -> np.ndarray:
    if hasattr(waypoints, "xyz"):
        return waypoints.xyz
    if len(waypoints) == 0:
        return np.zeros((0, 3))
    if isinstance(waypoints[0], Point25):
        return np.array([(p.x, p.y, p.z) for p in waypoints], dtype=float)
    arr = np.asarray(waypoints, dtype=float)
    if arr.shape[1] == 2:
        arr = np.column_stack([arr, np.zeros(len(arr))])
    return arr


def first_collision(world: WorldModel, waypoints) -> Optional[int]:
    """Index of the first occupied waypoint, or ``None`` when all are free.

    Waypoints must be sampled no coarser than the grid resolution; no
    resampling happens here.
    """
    pts = _as_xyz(waypoints)
    if len(pts) == 0:
        return None
    hit = occupied_mask(world, pts[:, 0], pts[:, 1], pts[:, 2])
    idx = int(np.argmax(hit))
    return idx if hit[idx] else None
