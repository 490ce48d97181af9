"""Input checks shared by the estimator wrappers and the command line."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from .world import WorldModel, inflate, load_scenario_file

DEFAULT_ROBOT_RADIUS = 0.2


def check_world(world: Union[WorldModel, str, Path], robot_radius=None) -> WorldModel:
    """Return an inflated world; paths are loaded as scenario files.

    Already-inflated worlds pass through untouched. Otherwise the radius is
    ``robot_radius``, then the scenario's own value, then the default.
    """
    if isinstance(world, (str, Path)):
        world = load_scenario_file(world)
    if not isinstance(world, WorldModel):
        raise TypeError(f"expected a WorldModel or scenario path, got {type(world).__name__}")
    if world.inflated and robot_radius is None:
        return world
    r = robot_radius
    if r is None:
        r = world.robot_radius if world.robot_radius is not None else DEFAULT_ROBOT_RADIUS
    return inflate(world, float(r))


def check_pose(pose, name: str = "start") -> Tuple[float, float, float]:
    """``(x, y)`` or ``(x, y, theta)`` as a finite float triple."""
    vals = np.asarray(pose, dtype=float).ravel()
    if vals.shape[0] not in (2, 3):
        raise ValueError(f"{name} must be (x, y) or (x, y, theta)")
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"{name} must be finite")
    theta = float(vals[2]) if len(vals) == 3 else 0.0
    return float(vals[0]), float(vals[1]), theta


def check_point(point, name: str = "goal") -> Tuple[float, float]:
    x, y, _ = check_pose(tuple(point)[:2], name)
    return x, y


def check_positive(value, name: str) -> float:
    v = float(value)
    if not math.isfinite(v) or v <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return v


def check_fitted(estimator, attr: str = "world_") -> None:
    if not hasattr(estimator, attr):
        from sklearn.exceptions import NotFittedError

        raise NotFittedError(f"{type(estimator).__name__} is not fitted; call fit(world) first")
