"""2.5-D extension: z-tilt crossability probing and smooth crossing profiles.

The planar planner is reused unchanged; at every planar collision the
session first asks whether the obstacle can be climbed within the robot's
tilt limit. A crossing is a straight (zero curvature) segment whose z-slope
channel ramps up before the obstacle, levels over it and ramps back down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .curvature import CurvatureProfile, PlannerState, Waypoints, integrate, inverse_integrate
from .planner2d import FDSPCSession, PlannerConfig, PlanResult, PlanningError, _as_state
from .world import WorldModel, elevation_at, first_collision, occupied_mask


class CrossingError(PlanningError):
    """The obstacle cannot be crossed from this approach."""


@dataclass
class CrossConfig:
    """Climbing capability of the robot.

    ``theta_max = 0`` disables crossing altogether, which makes the 2.5-D
    planner behave exactly like the planar one.
    """

    theta_max: float = math.radians(30.0)
    rho_z: float = 0.4
    back_obs: float = 0.5
    clearance: float = 0.01

    def __post_init__(self):
        if not 0.0 <= self.theta_max < math.pi / 2:
            raise ValueError("theta_max must lie in [0, pi/2)")
        if not self.rho_z > 0:
            raise ValueError("rho_z must be positive")
        if not self.back_obs > 0:
            raise ValueError("back_obs must be positive")
        if self.clearance < 0:
            raise ValueError("clearance must be non-negative")


@dataclass(eq=False)
class CrossProfile:
    """Straight crossing segment with a populated z-slope channel.

    ``anchors`` maps ``s3`` ... ``s8`` to step indices within ``profile``.
    """

    profile: CurvatureProfile
    anchors: Dict[str, int] = field(default_factory=dict)
    tilt: float = 0.0
    peak_z: float = 0.0

    def __len__(self) -> int:
        return len(self.profile)


@dataclass(frozen=True)
class ObstacleSpan:
    """Where a straight line from ``origin`` enters and leaves an obstacle."""

    origin: PlannerState
    near: float
    far: float
    top: float


def _line_points(state: PlannerState, s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return state.x + np.cos(state.theta) * s, state.y + np.sin(state.theta) * s


def obstacle_span(world: WorldModel, origin: PlannerState, near: float, dt: float,
                  max_length: Optional[float] = None) -> ObstacleSpan:
    """Walk the occupancy footprint along the heading of ``origin``.

    ``near`` is the arc length of the first occupied sample. The span ends
    at the first footprint-free sample; ``top`` is the highest obstacle
    surface (elevation plus obstacle height) met in between.
    """
    if max_length is None:
        xmin, ymin, xmax, ymax = world.extent
        max_length = math.hypot(xmax - xmin, ymax - ymin)
    s = near + np.arange(0, int(math.ceil((max_length - near) / dt)) + 1) * dt
    x, y = _line_points(origin, s)
    row, col = world.cell_of(x, y)
    inb = (row >= 0) & (row < world.height) & (col >= 0) & (col < world.width)
    # leaving the map counts as an endless obstacle
    occ = np.ones(len(s), dtype=bool)
    occ[inb] = world.occupancy[row[inb], col[inb]]
    free = np.flatnonzero(~occ)
    if len(free) == 0:
        return ObstacleSpan(origin, near, math.inf, math.inf)
    end = int(free[0])
    heights = world.obstacle_height[row[:end], col[:end]] if end else np.zeros(1)
    top = float(np.max(heights)) if end else 0.0
    if end and not world._flat:
        top = float(np.max(heights + elevation_at(world, x[:end], y[:end])))
    return ObstacleSpan(origin, near, float(s[end]), top)


def _retreat_index(collision_idx: int, back_obs: float, dt: float) -> int:
    return collision_idx - int(round(back_obs / dt))


def crossability_check(world: WorldModel, profile_2d: CurvatureProfile, collision_idx: int,
                       cross_cfg: CrossConfig, entry_state=None,
                       theta_step: float = 0.02) -> Tuple[bool, float]:
    """Probe straight tilted rays from ``back_obs`` before the collision.

    Tilts grow by ``theta_step`` up to ``theta_max``. A ray clears the
    obstacle when it either stays free until past the obstacle's far edge or
    its first collision lies beyond that edge. Returns ``(crossable, tilt)``
    with ``tilt = 0`` when not crossable.
    """
    entry = _as_state(entry_state) if entry_state is not None else PlannerState()
    wp = integrate(entry, profile_2d)
    if not 0 <= collision_idx < len(wp):
        raise IndexError("collision_idx outside the profile")
    dt = profile_2d.dt
    r = _retreat_index(collision_idx, cross_cfg.back_obs, dt)
    if r < 0:
        raise CrossingError("retreat point lies before the start of the profile")
    origin = wp.state(r)
    if occupied_mask(world, origin.x, origin.y, origin.z)[0]:
        raise CrossingError("retreat point is occupied")
    if cross_cfg.theta_max <= 0:
        return False, 0.0
    near = (collision_idx - r) * dt
    span = obstacle_span(world, origin, near, dt)
    if not math.isfinite(span.top):
        return False, 0.0
    s = np.arange(0, int(math.ceil((span.far + cross_cfg.back_obs) / dt)) + 1) * dt
    x, y = _line_points(origin, s)
    n_steps = int(math.floor(cross_cfg.theta_max / theta_step + 1e-9))
    for k in range(1, n_steps + 1):
        tilt = k * theta_step
        z = origin.z + np.tan(tilt) * s
        hit = occupied_mask(world, x, y, z)
        if not hit.any() or s[int(np.argmax(hit))] > span.far:
            return True, tilt
    return False, 0.0


def _z_ramp(dz: float, rho_z: float, slope_cap: float, dt: float) -> np.ndarray:
    """Shortest G2 slope profile changing height by ``dz``; starts and ends at zero slope."""
    if abs(dz) < 1e-12:
        return np.zeros(0)
    # length of the capped trapezoid: ramp time to the cap plus the plateau
    t_cap = slope_cap / rho_z
    if abs(dz) <= rho_z * t_cap ** 2:
        length = 2 * math.sqrt(abs(dz) / rho_z)
    else:
        length = 2 * t_cap + (abs(dz) - rho_z * t_cap ** 2) / slope_cap
    length += 4 * dt
    prof = inverse_integrate(dz, rho_z, length, dt, kappa_max=slope_cap)
    taus = prof.kappas
    nz = np.flatnonzero(np.abs(taus) > 0)
    return np.concatenate([taus[: nz[-1] + 1], [0.0]])


def build_cross_profile(world: WorldModel, entry_state, obstacle_span: ObstacleSpan,
                        cross_cfg: CrossConfig, cfg: Optional[PlannerConfig] = None,
                        tilt: Optional[float] = None) -> CrossProfile:
    """Straight segment from ``entry_state`` that climbs over the obstacle.

    The ascent ends level at the obstacle's near edge and the descent starts
    at its far edge, so the whole climb stays below ``tan(tilt)`` in slope
    and above the obstacle surface over its footprint. Anchors:
    ``s3`` ascent start, ``s4`` level start, ``s5`` far edge at the top,
    ``s6`` descent start, ``s7`` ground contact, ``s8`` segment end.
    """
    cfg = cfg or PlannerConfig()
    dt = cfg.dt
    state = _as_state(entry_state)
    span = obstacle_span
    tilt = cross_cfg.theta_max if tilt is None else tilt
    if tilt <= 0:
        raise CrossingError("crossing disabled")
    if not math.isfinite(span.top) or not math.isfinite(span.far):
        raise CrossingError("obstacle has no finite top")
    # arc lengths measured from entry_state along its heading
    off = (span.origin.x - state.x) * math.cos(state.theta) + (span.origin.y - state.y) * math.sin(state.theta)
    near, far = span.near + off, span.far + off
    cap = math.tan(tilt)
    level = span.top + cross_cfg.clearance
    # nothing to climb: the obstacle surface is at or below the current height
    if span.top <= state.z + 1e-12:
        kappas = np.zeros(int(math.ceil(far / dt)) + 1)
        return CrossProfile(CurvatureProfile(dt, kappas, np.zeros_like(kappas), cfg.rho, cross_cfg.rho_z),
                            {}, 0.0, state.z)
    up = _z_ramp(level - state.z, cross_cfg.rho_z, cap, dt)
    i4 = int(math.floor(near / dt))
    i3 = i4 - len(up)
    if i3 < 0:
        raise CrossingError("not enough run-up before the obstacle")
    i6 = int(math.ceil(far / dt))
    end_x, end_y = state.x + math.cos(state.theta) * (i6 * dt), state.y + math.sin(state.theta) * (i6 * dt)
    ground = _ground(world, end_x, end_y)
    down = _z_ramp(ground - level, cross_cfg.rho_z, cap, dt)
    i7 = i6 + len(down)
    i8 = i7 + int(round(cross_cfg.back_obs / 2 / dt))
    taus = np.zeros(i8)
    taus[i3:i4] = up
    taus[i6:i7] = down
    profile = CurvatureProfile(dt, np.zeros(i8), taus, cfg.rho, cross_cfg.rho_z)
    wp = integrate(state, profile)
    if first_collision(world, wp) is not None:
        raise CrossingError("no clearance along the crossing")
    anchors = {"s3": i3, "s4": i4, "s5": int(math.floor(far / dt)), "s6": i6, "s7": i7, "s8": i8}
    return CrossProfile(profile, anchors, tilt, float(np.max(wp.z)))


def _ground(world: WorldModel, x: float, y: float) -> float:
    try:
        return float(elevation_at(world, x, y))
    except ValueError:
        raise CrossingError("crossing would leave the map") from None


class FDSPC25DSession(FDSPCSession):
    """Planar session that tries to climb an obstacle before sweeping around it."""

    def __init__(self, world: WorldModel, start, goal, cfg: PlannerConfig, cross_cfg: CrossConfig):
        super().__init__(world, start, goal, cfg)
        self.cross_cfg = cross_cfg

    def handle_collision(self, locator: str, kd: CurvatureProfile, n_turn: int,
                         wp: Waypoints, c: int) -> bool:
        cc = self.cross_cfg
        node = self.tree.node(locator)
        if cc.theta_max <= 0 or node.meta.get("no_cross"):
            return False
        r = _retreat_index(c, cc.back_obs, kd.dt)
        # crossings are straight, so the turn must be finished before the retreat point
        if r < n_turn:
            return False
        try:
            ok, tilt = crossability_check(self.world, kd, c, cc, node.exit_state, self.cfg.theta_a2)
            if not ok:
                return False
            origin = wp.state(r)
            span = obstacle_span(self.world, origin, (c - r) * kd.dt, kd.dt)
            cross = build_cross_profile(self.world, wp.state(n_turn), span, cc, self.cfg, tilt)
        except CrossingError:
            return False
        seg = kd[:n_turn] + cross.profile
        child = self._insert(locator, "L", seg, kind="frontier")
        self.tree.node(child).meta["cross"] = cross
        self.stats.crossings += 1
        return True

    def _backtrack(self) -> bool:
        if super()._backtrack():
            return True
        # planar sweeps are used up: undo the crossing nearest the goal and go around instead
        crossed = [n for n in self.tree if "cross" in n.meta]
        if not crossed:
            return False
        child = min(crossed, key=lambda n: (n.entry_state.distance_to(*self.goal), n.sequ))
        parent_loc = child.sequ[:-1]
        parent = self.tree.node(parent_loc)
        self.tree.remove_subtree(child.sequ)
        parent.meta["no_cross"] = True
        pos = (parent.exit_state.x, parent.exit_state.y)
        if pos in self.expanded:
            self.expanded.remove(pos)
        self.tree.index.push(parent.exit_state.distance_to(*self.goal), parent_loc)
        return True


def plan_25d(world: WorldModel, start, goal, cfg: Optional[PlannerConfig] = None,
             cross_cfg: Optional[CrossConfig] = None) -> PlanResult:
    """Plan over terrain, climbing obstacles the robot's tilt limit allows."""
    return FDSPC25DSession(world, start, goal, cfg or PlannerConfig(), cross_cfg or CrossConfig()).run()
