"""Curvature-anticipating velocity profiles over finished geometric paths."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .curvature import CurvatureProfile, KAPPA_EPS, PlannerState, Waypoints, integrate

CSV_COLUMNS = ("x", "y", "z", "theta", "kappa", "tau_z", "v", "arc_length")


@dataclass
class VelocityConfig:
    a: float = 0.5
    v_max: float = 1.0
    v_min: float = 0.3
    v_start: float = 0.0
    v_end: float = 0.0
    lookahead: Optional[int] = None

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be positive")
        if not 0 <= self.v_min < self.v_max:
            raise ValueError("need 0 <= v_min < v_max")
        for name in ("v_start", "v_end"):
            v = getattr(self, name)
            if not 0 <= v <= self.v_max:
                raise ValueError(f"{name} must lie in [0, v_max]")
        if self.lookahead is not None and self.lookahead < 0:
            raise ValueError("lookahead must be non-negative")

    def window(self, dt: float) -> int:
        """Anticipation window in steps; defaults to the braking distance v_max -> v_min."""
        if self.lookahead is not None:
            return int(self.lookahead)
        return math.ceil((self.v_max - self.v_min) / (self.a * dt) - 1e-9)


@dataclass(eq=False)
class Trajectory:
    waypoints: Waypoints
    v: np.ndarray

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=float)
        if len(self.v) != len(self.waypoints):
            raise ValueError("one velocity per waypoint required")

    def __len__(self) -> int:
        return len(self.v)

    def to_array(self) -> np.ndarray:
        w = self.waypoints
        return np.column_stack([w.x, w.y, w.z, w.theta, w.kappa, w.tau_z, self.v, w.s])

    def to_csv(self, path: Union[str, Path, None] = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.to_array():
            writer.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, source: Union[str, Path]) -> "Trajectory":
        """Parse CSV text, or a path to a CSV file."""
        if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
            source = Path(source).read_text(encoding="utf-8")
        rows = list(csv.reader(io.StringIO(source)))
        if not rows or tuple(rows[0]) != CSV_COLUMNS:
            raise ValueError(f"trajectory CSV must have header {','.join(CSV_COLUMNS)}")
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float).reshape(-1, len(CSV_COLUMNS))
        cols = {name: data[:, i] for i, name in enumerate(CSV_COLUMNS)}
        wp = Waypoints(cols["x"], cols["y"], cols["z"], cols["theta"], cols["kappa"], cols["tau_z"],
                       cols["arc_length"])
        return cls(wp, cols["v"])


def curved_steps(kappa: np.ndarray, tau: np.ndarray) -> np.ndarray:
    return (np.abs(kappa) > KAPPA_EPS) | (np.abs(tau) > KAPPA_EPS)


def _anticipate(curved: np.ndarray, window: int) -> np.ndarray:
    """``out[i]`` is true when any of ``curved[i : i + window + 1]`` is."""
    c = np.concatenate([curved.astype(np.int64), np.zeros(window, dtype=np.int64)])
    csum = np.concatenate([[0], np.cumsum(c)])
    n = len(curved)
    idx = np.arange(n)
    return (csum[idx + window + 1] - csum[idx]) > 0


def step_velocity(v_prev: float, curved: bool, cfg: VelocityConfig, dt: float) -> float:
    """One step of the acceleration rule.

    Straight and level: speed up toward ``v_max``. Curved or tilted: slow
    down toward ``v_min``, or speed up to it when starting below.
    """
    dv = cfg.a * dt
    if not curved:
        return min(v_prev + dv, cfg.v_max) if v_prev < cfg.v_max else v_prev
    if v_prev > cfg.v_min:
        return max(v_prev - dv, cfg.v_min)
    if v_prev < cfg.v_min:
        return min(v_prev + dv, cfg.v_min)
    return v_prev


def plan_velocity(profile: Union[CurvatureProfile, Waypoints], cfg: Optional[VelocityConfig] = None,
                  start: Optional[PlannerState] = None, dt: Optional[float] = None) -> Trajectory:
    """Velocity at every waypoint of ``profile`` (integrated from ``start``).

    A forward pass applies the acceleration rule with anticipation, then a
    backward pass rate-limits the approach to ``v_end``.
    """
    cfg = cfg or VelocityConfig()
    if isinstance(profile, Waypoints):
        wp = profile
        if dt is None:
            dt = float(wp.s[1] - wp.s[0]) if len(wp) > 1 else 1.0
    else:
        if len(profile) == 0:
            raise ValueError("profile is empty")
        wp = integrate(start or PlannerState(), profile)
        dt = profile.dt
    n = len(wp)
    curved = _anticipate(curved_steps(wp.kappa, wp.tau_z), cfg.window(dt))
    v = np.empty(n)
    v[0] = cfg.v_start
    for i in range(1, n):
        v[i] = step_velocity(v[i - 1], bool(curved[i]), cfg, dt)
    # the end speed is imposed only when it is reachable by braking
    if n > 1 and cfg.v_end <= v[-1]:
        v[-1] = cfg.v_end
        dv = cfg.a * dt
        for i in range(n - 2, -1, -1):
            cap = v[i + 1] + dv
            if v[i] <= cap:
                break
            v[i] = cap
    return Trajectory(wp, v)


def polyline_waypoints(points, dt: float) -> Waypoints:
    """Resample a polyline at spacing ``dt``; curvature is concentrated at its vertices.

    Lets piecewise-linear baseline paths go through :func:`plan_velocity`.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) < 2:
        raise ValueError("need at least two points")
    keep = np.concatenate([[True], np.any(np.diff(pts[:, :2], axis=0) != 0, axis=1)])
    pts = pts[keep]
    if len(pts) < 2:
        raise ValueError("polyline has zero length")
    xy = pts[:, :2]
    z = pts[:, 2] if pts.shape[1] > 2 else np.zeros(len(pts))
    xs, ys, zs, th, ka = [xy[:1, 0]], [xy[:1, 1]], [z[:1]], [], []
    seg_theta = np.arctan2(np.diff(xy[:, 1]), np.diff(xy[:, 0]))
    for i in range(len(xy) - 1):
        d = float(np.hypot(*(xy[i + 1] - xy[i])))
        n = max(1, int(math.ceil(d / dt - 1e-9)))
        t = np.arange(1, n + 1) / n
        xs.append(xy[i, 0] + t * (xy[i + 1, 0] - xy[i, 0]))
        ys.append(xy[i, 1] + t * (xy[i + 1, 1] - xy[i, 1]))
        zs.append(z[i] + t * (z[i + 1] - z[i]))
        th.append(np.full(n, seg_theta[i]))
        k = np.zeros(n)
        if i + 1 < len(seg_theta):
            turn = math.atan2(math.sin(seg_theta[i + 1] - seg_theta[i]), math.cos(seg_theta[i + 1] - seg_theta[i]))
            k[-1] = turn / (d / n)
        ka.append(k)
    x, y, zz = np.concatenate(xs), np.concatenate(ys), np.concatenate(zs)
    theta = np.concatenate(th + [th[-1][-1:]])
    kappa = np.concatenate([[0.0]] + ka)
    s = np.concatenate([[0.0], np.cumsum(np.hypot(np.diff(x), np.diff(y)))])
    return Waypoints(x, y, zz, theta, kappa, np.zeros_like(x), s)
