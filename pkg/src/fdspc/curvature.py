"""Curvature profiles and their forward/inverse integration.

Geometry is generated with unit pseudo-velocity, so one integration step of
``dt`` advances exactly ``dt`` meters of planar arc length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

KAPPA_EPS = 1e-9


class InfeasibleTurn(ValueError):
    """Requested heading change is out of reach for the given length/rate."""

    def __init__(self, requested: float, reachable: float):
        super().__init__(f"heading change {requested:.6g} rad exceeds reachable maximum {reachable:.6g} rad")
        self.requested = requested
        self.reachable = reachable


def wrap_angle(a):
    """Wrap to (-pi, pi]."""
    if np.ndim(a):
        a = np.asarray(a, dtype=float)
        inside = (a > -math.pi) & (a <= math.pi)
        return np.where(inside, a, -((-a + math.pi) % (2 * math.pi) - math.pi))
    a = float(a)
    if -math.pi < a <= math.pi:
        return a
    return -((-a + math.pi) % (2 * math.pi) - math.pi)


@dataclass(frozen=True)
class PlannerState:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    theta: float = 0.0
    kappa: float = 0.0
    tau_z: float = 0.0

    def __post_init__(self):
        vals = (self.x, self.y, self.z, self.theta, self.kappa, self.tau_z)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite planner state {self!r}")

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def distance_to(self, x: float, y: float) -> float:
        return math.hypot(x - self.x, y - self.y)


@dataclass(frozen=True, eq=False)
class CurvatureProfile:
    """Per-step curvature (and optional z-slope) sequence.

    ``rho`` / ``rho_z`` record the rate bounds the profile was built under;
    they are metadata for checks, not enforced on construction.
    """

    dt: float
    kappas: np.ndarray
    taus: Optional[np.ndarray] = None
    rho: Optional[float] = None
    rho_z: Optional[float] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        k = np.asarray(self.kappas, dtype=float).reshape(-1)
        object.__setattr__(self, "kappas", k)
        if self.taus is not None:
            t = np.asarray(self.taus, dtype=float).reshape(-1)
            if t.shape != k.shape:
                raise ValueError("taus must match kappas in length")
            object.__setattr__(self, "taus", t)

    @classmethod
    def empty(cls, dt: float, rho: Optional[float] = None) -> "CurvatureProfile":
        return cls(dt, np.zeros(0), rho=rho)

    @classmethod
    def straight(cls, length: float, dt: float, rho: Optional[float] = None) -> "CurvatureProfile":
        return cls(dt, np.zeros(max(0, int(round(length / dt)))), rho=rho)

    def __len__(self) -> int:
        return len(self.kappas)

    @property
    def length(self) -> float:
        return len(self) * self.dt

    @property
    def tau_values(self) -> np.ndarray:
        return self.taus if self.taus is not None else np.zeros_like(self.kappas)

    @property
    def heading_change(self) -> float:
        return float(np.sum(self.kappas) * self.dt)

    def __getitem__(self, item) -> "CurvatureProfile":
        if not isinstance(item, slice):
            raise TypeError("profiles only support slicing")
        taus = None if self.taus is None else self.taus[item]
        return CurvatureProfile(self.dt, self.kappas[item], taus, self.rho, self.rho_z)

    def __add__(self, other: "CurvatureProfile") -> "CurvatureProfile":
        if not math.isclose(self.dt, other.dt, rel_tol=1e-12):
            raise ValueError("cannot concatenate profiles with different dt")
        taus = None
        if self.taus is not None or other.taus is not None:
            taus = np.concatenate([self.tau_values, other.tau_values])
        rho = _max_opt(self.rho, other.rho)
        rho_z = _max_opt(self.rho_z, other.rho_z)
        return CurvatureProfile(self.dt, np.concatenate([self.kappas, other.kappas]), taus, rho, rho_z)

    def max_kappa_step(self, entry_kappa: Optional[float] = None) -> float:
        k = self.kappas if entry_kappa is None else np.concatenate([[entry_kappa], self.kappas])
        return float(np.max(np.abs(np.diff(k)))) if len(k) > 1 else 0.0

    def max_tau_step(self) -> float:
        t = self.tau_values
        return float(np.max(np.abs(np.diff(t)))) if len(t) > 1 else 0.0


def _max_opt(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


@dataclass(frozen=True, eq=False)
class Waypoints:
    """Integrated states; ``n + 1`` rows for an ``n``-step profile."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    theta: np.ndarray
    kappa: np.ndarray
    tau_z: np.ndarray
    s: np.ndarray

    def __len__(self) -> int:
        return len(self.x)

    @property
    def xyz(self) -> np.ndarray:
        return np.column_stack([self.x, self.y, self.z])

    @property
    def xy(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def state(self, i: int) -> PlannerState:
        return PlannerState(float(self.x[i]), float(self.y[i]), float(self.z[i]),
                            float(self.theta[i]), float(self.kappa[i]), float(self.tau_z[i]))

    @property
    def final(self) -> PlannerState:
        return self.state(len(self) - 1)

    def concat(self, other: "Waypoints") -> "Waypoints":
        """Join ``other`` (whose first row repeats our last row) onto this sequence."""
        cat = lambda a, b: np.concatenate([a, b[1:]])  # noqa: E731
        return Waypoints(cat(self.x, other.x), cat(self.y, other.y), cat(self.z, other.z),
                         cat(self.theta, other.theta), cat(self.kappa, other.kappa),
                         cat(self.tau_z, other.tau_z), cat(self.s, other.s - other.s[0] + self.s[-1]))


def integrate(start: PlannerState, profile: CurvatureProfile) -> Waypoints:
    """Forward-Euler rollout of a profile from ``start``.

    theta[i+1] = theta[i] + kappa[i]*dt, x[i+1] = x[i] + cos(theta[i])*dt,
    y likewise with sin, z[i+1] = z[i] + tau[i]*dt.
    """
    for v in (start.x, start.y, start.z, start.theta):
        if not math.isfinite(v):
            raise ValueError("non-finite start state")
    dt = profile.dt
    k = profile.kappas
    n = len(k)
    theta = np.empty(n + 1)
    theta[0] = start.theta
    np.cumsum(k * dt, out=theta[1:])
    theta[1:] += start.theta
    x = np.empty(n + 1)
    y = np.empty(n + 1)
    z = np.empty(n + 1)
    x[0], y[0], z[0] = start.x, start.y, start.z
    np.cumsum(np.cos(theta[:-1]) * dt, out=x[1:])
    np.cumsum(np.sin(theta[:-1]) * dt, out=y[1:])
    x[1:] += start.x
    y[1:] += start.y
    taus = profile.tau_values
    if profile.taus is not None and n:
        np.cumsum(taus * dt, out=z[1:])
        z[1:] += start.z
    else:
        z[1:] = start.z
    if n:
        kappa = np.concatenate([k, k[-1:]])
        tau = np.concatenate([taus, taus[-1:]])
    else:
        kappa = np.array([start.kappa])
        tau = np.array([start.tau_z])
    return Waypoints(x, y, z, wrap_angle(theta), kappa, tau, np.arange(n + 1) * dt)


def max_heading_change(rho: float, l_int: float) -> float:
    """Heading change of a full-length symmetric triangular curvature ramp."""
    if l_int <= 0:
        return 0.0
    return rho * (l_int / 2.0) ** 2


def min_turn_length(delta: float, rho: float) -> float:
    """Shortest length whose triangular ramp reaches heading change ``delta``."""
    return 2.0 * math.sqrt(abs(delta) / rho)


def _ramp_shape(m: int, n: int, step: float, cap: Optional[float]) -> np.ndarray:
    i = np.arange(n, dtype=float)
    k = np.maximum(0.0, np.minimum(i, m - i)) * step
    if cap is not None:
        k = np.minimum(k, cap)
    return k


def inverse_integrate(theta_t: float, rho: float, l_int: float, dt: float,
                      kappa_max: Optional[float] = None) -> CurvatureProfile:
    """Curvature profile of ``ceil(l_int/dt)`` steps turning by ``theta_t``.

    The turn is a symmetric triangular ramp (trapezoidal when ``kappa_max``
    caps it) that starts and, when length allows, ends at zero curvature; it
    is uniformly scaled down so the heading integral lands on ``theta_t``.
    Remaining steps are straight.
    """
    if not rho > 0 or not l_int > 0 or not dt > 0:
        raise ValueError("rho, l_int and dt must be positive")
    n = max(1, math.ceil(l_int / dt - 1e-9))
    target = abs(theta_t)
    if target == 0.0:
        return CurvatureProfile(dt, np.zeros(n), rho=rho)
    reachable = max_heading_change(rho, l_int)
    if target > reachable * (1 + 1e-12):
        raise InfeasibleTurn(theta_t, reachable)
    step = rho * dt
    heading = lambda m: float(np.sum(_ramp_shape(m, n, step, kappa_max)) * dt)  # noqa: E731
    # smallest m reaching the target; m <= n - 1 means the ramp closes at zero
    lo, hi = 0, 2 * n
    if heading(hi) < target * (1 - 1e-12):
        raise InfeasibleTurn(theta_t, heading(hi))
    while lo < hi:
        mid = (lo + hi) // 2
        if heading(mid) >= target:
            hi = mid
        else:
            lo = mid + 1
    shape = _ramp_shape(lo, n, step, kappa_max)
    total = float(np.sum(shape) * dt)
    kappas = shape * (target / total) * math.copysign(1.0, theta_t)
    return CurvatureProfile(dt, kappas, rho=rho)


def ramp_out(kappa: float, rho: float, dt: float) -> np.ndarray:
    """Curvature steps that bring ``kappa`` back to 0 at rate ``rho``; ends with 0."""
    step = rho * dt
    if abs(kappa) <= KAPPA_EPS:
        return np.zeros(0)
    count = math.ceil(abs(kappa) / step - 1e-12)
    vals = kappa - np.sign(kappa) * step * np.arange(1, count + 1)
    vals[np.sign(vals) != np.sign(kappa)] = 0.0
    vals[-1] = 0.0
    return vals
