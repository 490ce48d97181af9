"""Planar FDSPC: direct planning, explore sweeps and the tree search loop."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .curvature import (
    CurvatureProfile,
    InfeasibleTurn,
    PlannerState,
    Waypoints,
    integrate,
    inverse_integrate,
    ramp_out,
    wrap_angle,
)
from .searchtree import PathTree
from .world import WorldModel, first_collision, occupied_mask

logger = logging.getLogger(__name__)


class PlanningError(ValueError):
    pass


class DegenerateSpiral(PlanningError):
    """The goal lies inside the reachable turning region; direct planning cannot align."""


@dataclass
class PlannerConfig:
    dt: float = 0.01
    rho: float = 0.4
    theta_a1: float = 0.1
    theta_a2: Optional[float] = None
    l_add: float = 0.5
    back_obs: float = 0.5
    goal_tol: Optional[float] = None
    heading_tol: float = 1e-6
    max_nodes: int = 10000

    def __post_init__(self):
        if self.theta_a2 is None:
            self.theta_a2 = self.theta_a1 / 5.0
        if self.goal_tol is None:
            self.goal_tol = 2.0 * self.dt
        for name in ("dt", "rho", "theta_a1", "theta_a2", "l_add", "back_obs", "goal_tol", "heading_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_nodes < 1:
            raise ValueError("max_nodes must be >= 1")
        if not self.theta_a2 < self.theta_a1:
            raise ValueError("theta_a2 must be smaller than theta_a1")


@dataclass
class TreeStats:
    created: int = 1
    pruned: int = 0
    popped: int = 0
    explore_calls: int = 0
    direct_calls: int = 0
    pseudo_feasible_commits: int = 0
    crossings: int = 0


@dataclass(eq=False)
class PlanResult:
    status: str
    profile: Optional[CurvatureProfile]
    waypoints: Optional[Waypoints]
    tree_stats: TreeStats
    tree: Optional[PathTree] = None

    @property
    def success(self) -> bool:
        return self.status == "success"


@dataclass(eq=False)
class ExploreResult:
    """Outcome of one explore sweep from a branch point.

    ``profile`` is the trimmed collision-free segment, ``free_profile`` the
    full probe it was cut from and ``trace`` lists every probe as
    ``(side, offset, phase, l_int, collided)``.
    """

    profile: Optional[CurvatureProfile]
    side: Optional[str]
    sweep_exhausted: bool
    free_profile: Optional[CurvatureProfile] = None
    cut_index: int = 0
    trace: List[tuple] = field(default_factory=list)
    offset: float = 0.0


def _goal_xy(goal) -> Tuple[float, float]:
    if hasattr(goal, "x"):
        return float(goal.x), float(goal.y)
    return float(goal[0]), float(goal[1])


def _as_state(start) -> PlannerState:
    if isinstance(start, PlannerState):
        return start
    vals = [float(v) for v in start]
    if len(vals) == 2:
        return PlannerState(vals[0], vals[1])
    return PlannerState(vals[0], vals[1], theta=float(wrap_angle(vals[2])))


def _bearing(state: PlannerState, gx: float, gy: float) -> float:
    return math.atan2(gy - state.y, gx - state.x)


# ---------------------------------------------------------------- direct planning

def _turn_profile(delta: float, p: int, cfg: PlannerConfig) -> CurvatureProfile:
    """Triangular ramp over ``2p + 1`` steps scaled to turn exactly ``delta``."""
    step = cfg.rho * cfg.dt
    i = np.arange(2 * p + 1, dtype=float)
    shape = np.minimum(i, 2 * p - i) * step
    total = shape.sum() * cfg.dt
    scale = delta / total if total > 0 else 0.0
    return CurvatureProfile(cfg.dt, shape * scale, rho=cfg.rho)


def _solve_turn(state: PlannerState, gx: float, gy: float, cfg: PlannerConfig) -> CurvatureProfile:
    err0 = wrap_angle(_bearing(state, gx, gy) - state.theta)
    if abs(err0) <= cfg.heading_tol:
        return CurvatureProfile.empty(cfg.dt, cfg.rho)
    sign = math.copysign(1.0, err0)

    def residual(delta: float, p: int) -> float:
        end = integrate(state, _turn_profile(delta, p, cfg)).final
        return wrap_angle(_bearing(end, gx, gy) - (state.theta + delta))

    step_heading = cfg.rho * cfg.dt ** 2
    p = max(1, math.ceil(math.sqrt(abs(err0) / step_heading)))
    p_max = math.ceil(math.sqrt(2 * math.pi / step_heading))
    while p <= p_max:
        reach = sign * step_heading * p * p
        f_hi = residual(reach, p)
        if abs(f_hi) <= cfg.heading_tol:
            return _turn_profile(reach, p, cfg)
        if math.copysign(1.0, f_hi) != sign:
            if abs(f_hi) > math.pi / 2:
                break
            f_lo = residual(0.0, p)
            if math.copysign(1.0, f_lo) == sign:
                delta = brentq(lambda d: residual(d, p), 0.0, reach, xtol=1e-13, rtol=1e-13)
                return _turn_profile(delta, p, cfg)
        p += max(1, p // 8)
    raise DegenerateSpiral("goal cannot be aligned with by a single turn")


def _direct(state: PlannerState, goal, cfg: PlannerConfig) -> Tuple[CurvatureProfile, int]:
    gx, gy = _goal_xy(goal)
    if state.distance_to(gx, gy) <= cfg.goal_tol:
        return CurvatureProfile.empty(cfg.dt, cfg.rho), 0
    turn = _solve_turn(state, gx, gy, cfg)
    end = integrate(state, turn).final if len(turn) else state
    straight = CurvatureProfile.straight(end.distance_to(gx, gy), cfg.dt, cfg.rho)
    return turn + straight, len(turn)


def direct_plan(world: Optional[WorldModel], state, goal, cfg: Optional[PlannerConfig] = None) -> CurvatureProfile:
    """Turn toward the goal with a curvature ramp, then drive straight to it.

    No collision checking; ``world`` is accepted for interface symmetry.
    """
    cfg = cfg or PlannerConfig()
    return _direct(_as_state(state), goal, cfg)[0]


# ---------------------------------------------------------------- explore planning

def _settle(state: PlannerState, profile: CurvatureProfile, wp: Waypoints, k: int,
            world: Optional[WorldModel], rho: float) -> Tuple[CurvatureProfile, int]:
    """Cut ``profile`` after ``k`` steps and ramp curvature back to zero.

    ``k`` is reduced until the ramp-out is collision-free. Returns the new
    segment and the cut actually used.
    """
    dt = profile.dt
    while k > 0:
        tail = ramp_out(profile.kappas[k - 1], rho, dt)
        seg = profile[:k]
        if len(tail):
            ramp = CurvatureProfile(dt, tail, rho=rho)
            if world is not None:
                rw = integrate(wp.state(k), ramp)
                if first_collision(world, rw) is not None:
                    k -= 1
                    continue
            seg = seg + ramp
        return seg, k
    return CurvatureProfile.empty(dt, rho), 0


def p_fimin(kappa_free: CurvatureProfile, kappa_old: CurvatureProfile, o_idx_old: int,
            entry_state: Optional[PlannerState] = None, world: Optional[WorldModel] = None,
            rho: Optional[float] = None) -> Tuple[CurvatureProfile, int]:
    """Prefix of ``kappa_free`` ending nearest the old collision point.

    Both profiles are integrated from ``entry_state``; the prefix ends at
    the free waypoint closest to ``kappa_old``'s waypoint ``o_idx_old`` and
    curvature is ramped back to zero. Returns ``(segment, cut_index)``.
    """
    if len(kappa_free) == 0:
        raise ValueError("kappa_free is empty")
    entry_state = entry_state or PlannerState()
    rho = rho if rho is not None else (kappa_free.rho or 0.4)
    wf = integrate(entry_state, kappa_free)
    wo = integrate(entry_state, kappa_old)
    o_idx_old = min(max(o_idx_old, 0), len(wo) - 1)
    q = wo.xy[o_idx_old]
    d2 = np.sum((wf.xy - q) ** 2, axis=1)
    k = int(np.argmin(d2))
    return _settle(entry_state, kappa_free, wf, k, world, rho)


def _probe(world: WorldModel, state: PlannerState, delta: float, l_int: float,
           cfg: PlannerConfig) -> Tuple[CurvatureProfile, Waypoints, Optional[int]]:
    step_heading = cfg.rho * cfg.dt ** 2
    p = math.ceil(math.sqrt(abs(delta) / step_heading)) if delta else 0
    # room for the full ramp to close at zero curvature
    l_int = max(l_int, (2 * p + 2) * cfg.dt)
    try:
        kappas = inverse_integrate(delta, cfg.rho, l_int, cfg.dt)
    except InfeasibleTurn:
        kappas = inverse_integrate(delta, cfg.rho, l_int + 2 * cfg.dt, cfg.dt)
    wp = integrate(state, kappas)
    return kappas, wp, first_collision(world, wp)


def explore_plan(world: WorldModel, state, goal, cfg: Optional[PlannerConfig] = None,
                 sides: Sequence[str] = ("L", "R"),
                 reference: Optional[Tuple[CurvatureProfile, int]] = None,
                 start_offsets: Optional[dict] = None) -> ExploreResult:
    """Two-phase angular sweep around an obstacle from ``state``.

    Coarse phase widens the target bearing by ``theta_a1`` per side,
    alternating sides in ``sides`` order; once a probe is free the fine phase
    backs off one coarse step and re-advances by ``theta_a2``. Probe length
    is the previous collision distance on that side plus ``l_add``.

    ``reference`` is the colliding direct segment and its collision index;
    when the straight-ahead probe is free it is trimmed against it so the
    node does not run past the obstacle it was meant to clear.
    ``start_offsets`` resumes an earlier sweep: each side starts one coarse
    step beyond the given offset and the straight probe is skipped.
    """
    cfg = cfg or PlannerConfig()
    state = _as_state(state)
    gx, gy = _goal_xy(goal)
    theta0 = _bearing(state, gx, gy)
    base = wrap_angle(theta0 - state.theta)
    dt = cfg.dt
    trace: List[tuple] = []

    straight = CurvatureProfile.straight(max(state.distance_to(gx, gy), cfg.l_add), dt, cfg.rho)
    wp0 = integrate(state, straight)
    o0 = first_collision(world, wp0)
    if o0 is None and not start_offsets:
        if reference is not None:
            seg, cut = p_fimin(straight, reference[0], reference[1], state, world, cfg.rho)
            if cut > 0:
                return ExploreResult(seg, None, False, straight, cut, trace)
        return ExploreResult(straight, None, False, straight, len(straight), trace)

    if o0 is None:
        o0 = len(straight)
    last = {s: (straight, o0) for s in sides}
    offsets = {s: (start_offsets or {}).get(s, 0.0) for s in sides}
    live = list(sides)
    sign = {"L": 1.0, "R": -1.0}

    while live:
        for s in list(live):
            offset = offsets[s] + cfg.theta_a1
            offsets[s] = offset
            if offset >= math.pi:
                live.remove(s)
                continue
            delta = base + sign[s] * offset
            if abs(delta) >= math.pi:
                live.remove(s)
                continue
            l_int = last[s][1] * dt + cfg.l_add
            prof, wp, o = _probe(world, state, delta, l_int, cfg)
            trace.append((s, offset, "coarse", l_int, o is not None))
            if o is not None:
                last[s] = (prof, o)
                continue
            fine_from = offset - cfg.theta_a1 if offset - cfg.theta_a1 > 0 else 0.0
            free, found = _fine_sweep(world, state, base, s, sign[s], fine_from, last, cfg, trace)
            if free is None:
                live.remove(s)
                continue
            kappa_old, o_old = last[s]
            seg, cut = p_fimin(free, kappa_old, o_old, state, world, cfg.rho)
            return ExploreResult(seg, s, False, free, cut, trace, found)
    return ExploreResult(None, None, True, None, 0, trace)


def _fine_sweep(world, state, base, side, sgn, start_offset, last, cfg, trace):
    offset = start_offset
    while True:
        offset += cfg.theta_a2
        if offset >= math.pi:
            return None, offset
        delta = base + sgn * offset
        if abs(delta) >= math.pi:
            return None, offset
        l_int = last[side][1] * cfg.dt + cfg.l_add
        prof, wp, o = _probe(world, state, delta, l_int, cfg)
        trace.append((side, offset, "fine", l_int, o is not None))
        if o is None:
            return prof, offset
        last[side] = (prof, o)


# ---------------------------------------------------------------- main loop

class FDSPCSession:
    """One planning run: owns the tree, the index and the statistics."""

    def __init__(self, world: WorldModel, start, goal, cfg: PlannerConfig):
        self.world = world
        self.cfg = cfg
        self.start = _as_state(start)
        self.goal = _goal_xy(goal)
        self.stats = TreeStats()
        self.tree = PathTree(self.start, goal=self.goal, dt=cfg.dt)
        self.expanded: List[Tuple[float, float]] = []

    # hook for the 2.5-D planner
    def handle_collision(self, locator: str, kd: CurvatureProfile, n_turn: int,
                         wp: Waypoints, c: int) -> bool:
        return False

    def _near_expanded(self, state: PlannerState) -> bool:
        if not self.expanded:
            return False
        pts = np.asarray(self.expanded)
        d = np.hypot(pts[:, 0] - state.x, pts[:, 1] - state.y)
        return bool(np.any(d <= self.cfg.dt + 1e-12))

    def _check_endpoints(self):
        w = self.world
        gx, gy = self.goal
        if occupied_mask(w, self.start.x, self.start.y, self.start.z)[0]:
            raise PlanningError("start is occupied")
        if occupied_mask(w, gx, gy, self.start.z)[0]:
            raise PlanningError("goal is occupied")

    def _insert(self, parent: str, side: str, seg: CurvatureProfile, kind: str,
                exit_state: Optional[PlannerState] = None) -> str:
        loc = self.tree.insert(parent, side, seg, self.goal, kind=kind, exit_state=exit_state)
        self.stats.created += 1
        return loc

    def run(self) -> PlanResult:
        self._check_endpoints()
        cfg = self.cfg
        tree = self.tree
        while len(tree.index) or self._backtrack():
            if len(tree) >= cfg.max_nodes:
                return self._result("budget")
            loc, _ = tree.pop_min()
            self.stats.popped += 1
            node = tree.node(loc)
            if node.kind == "branch":
                vacant = node.vacant_sides()
                if vacant:
                    self._explore_from(loc, vacant[:1])
                continue

            if self._near_expanded(node.exit_state) and self._commit_small_segment(loc):
                continue
            self.expanded.append((node.exit_state.x, node.exit_state.y))

            self.stats.direct_calls += 1
            try:
                kd, n_turn = _direct(node.exit_state, self.goal, cfg)
            except DegenerateSpiral:
                node.meta["closed"] = True
                continue
            wp = integrate(node.exit_state, kd)
            c = first_collision(self.world, wp)
            if c is None:
                return self._success(loc, kd)
            if self.handle_collision(loc, kd, n_turn, wp, c):
                continue
            b = self._retreat(loc, kd, wp, c)
            self.tree.node(b).meta["reference"] = (kd, c)
            self._explore_from(b, ("L", "R"))
        return self._result("exhausted")

    def _retreat(self, loc: str, kd: CurvatureProfile, wp: Waypoints, c: int) -> str:
        # The whole colliding segment is retraced: the branch point sits where
        # the direct segment started, which keeps the full distance to the
        # obstacle available for the curvature ramps of the sweep.
        return self._insert(loc, "L", CurvatureProfile.empty(self.cfg.dt, self.cfg.rho), kind="branch")

    def _explore_from(self, loc: str, sides: Sequence[str], resume: bool = False) -> None:
        node = self.tree.node(loc)
        self.stats.explore_calls += 1
        self.expanded.append((node.exit_state.x, node.exit_state.y))
        sweep = node.meta.setdefault("sweep", {})
        start_offsets = {s: sweep[s] + self.cfg.theta_a1 for s in sides if s in sweep} if resume else None
        res = explore_plan(self.world, node.exit_state, self.goal, self.cfg, sides,
                           reference=node.meta.get("reference"), start_offsets=start_offsets)
        if res.sweep_exhausted or res.profile is None:
            for s in sides:
                sweep[s] = math.pi
            node.meta["closed"] = True
            self.tree.close(loc)
            return
        seg, cut = self._viable_cut(node.exit_state, res)
        side = res.side if res.side in sides else sides[0]
        sweep[side] = res.offset
        child = self._insert(loc, side, seg, kind="frontier")
        cnode = self.tree.node(child)
        cnode.meta["free_profile"] = res.free_profile
        cnode.meta["cut"] = cut

    def _backtrack(self) -> bool:
        """Discard one dead subtree and resume the sweep that produced it.

        Called once every node is exhausted. Branch points closest to the
        goal are retried first; returns False when no sweep can continue.
        """
        cands = []
        for node in self.tree:
            if node.kind != "branch":
                continue
            for side, offset in node.meta.get("sweep", {}).items():
                if offset + self.cfg.theta_a1 < math.pi and node.child(side) is not None:
                    cands.append((node.exit_state.distance_to(*self.goal), node.sequ, side))
        cands.sort()
        for _, loc, side in cands:
            if len(self.tree) >= self.cfg.max_nodes:
                return False
            self.tree.remove_subtree(loc + side)
            self.tree.node(loc).meta.pop("closed", None)
            self._explore_from(loc, (side,), resume=True)
            if len(self.tree.index):
                return True
        return False

    def _viable(self, state: PlannerState) -> bool:
        probe = CurvatureProfile.straight(self.cfg.l_add, self.cfg.dt)
        return first_collision(self.world, integrate(state, probe)) is None

    def _viable_cut(self, state: PlannerState, res: ExploreResult) -> Tuple[CurvatureProfile, int]:
        """Slide the cut forward along the free probe until the node can drive on."""
        seg, cut = res.profile, res.cut_index
        free = res.free_profile
        exit_state = integrate(state, seg).final if len(seg) else state
        if free is None or self._viable(exit_state):
            return seg, cut
        wf = integrate(state, free)
        stride = max(1, int(round(0.1 * self.cfg.l_add / self.cfg.dt)))
        for k in range(cut + stride, len(free) + 1, stride):
            cand, used = _settle(state, free, wf, k, self.world, self.cfg.rho)
            if used < k:
                continue
            end = integrate(state, cand).final
            if self._viable(end):
                return cand, used
        return seg, cut

    def _commit_small_segment(self, loc: str) -> bool:
        """Advance a pseudo-feasible node along its last free profile."""
        cfg = self.cfg
        node = self.tree.node(loc)
        if node.meta.get("committed") or node.left is not None:
            return False
        node.meta["committed"] = True
        length = cfg.l_add / 2.0
        candidates = []
        free = node.meta.get("free_profile")
        if free is not None:
            fw = integrate(node.entry_state, free)
            j = min(node.meta.get("cut", 0) + int(round(length / cfg.dt)), len(fw) - 1)
            delta = wrap_angle(float(fw.theta[j]) - node.exit_state.theta)
            if abs(delta) > 1e-12:
                candidates.append(delta)
        candidates.append(0.0)
        for delta in candidates:
            prof, wp, o = _probe(self.world, node.exit_state, delta, length, cfg)
            if o is None:
                self._insert(loc, "L", prof, kind="frontier")
                self.stats.pseudo_feasible_commits += 1
                return True
        return False

    def _success(self, loc: str, kd: CurvatureProfile) -> PlanResult:
        profile = self.tree.reconstruct(loc) + kd
        wp = integrate(self.start, profile)
        gx, gy = self.goal
        if first_collision(self.world, wp) is not None:
            raise AssertionError("internal error: spliced path collides")
        if math.hypot(wp.x[-1] - gx, wp.y[-1] - gy) > self.cfg.goal_tol:
            raise AssertionError("internal error: path misses the goal")
        self._sync_stats()
        return PlanResult("success", profile, wp, self.stats, self.tree)

    def _sync_stats(self):
        self.stats.pruned = self.tree.n_pruned

    def _result(self, status: str) -> PlanResult:
        self._sync_stats()
        return PlanResult(status, None, None, self.stats, self.tree)


def plan(world: WorldModel, start, goal, cfg: Optional[PlannerConfig] = None) -> PlanResult:
    """Plan a G2 path from ``start`` (x, y, theta) to ``goal`` (x, y)."""
    return FDSPCSession(world, start, goal, cfg or PlannerConfig()).run()
