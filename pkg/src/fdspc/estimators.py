"""Estimator-style wrappers: ``fit(world)`` then ``predict(start, goal)``.

Hyperparameters live in ``__init__`` so ``get_params``/``set_params`` and
``sklearn.base.clone`` work as usual.
"""

from __future__ import annotations

import math

from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_fitted, check_point, check_pose, check_world
from .baselines import RRTParams, grid_search, rrt
from .planner25d import CrossConfig, plan_25d
from .planner2d import PlannerConfig, plan
from .velocity import VelocityConfig, plan_velocity


class _WorldEstimator(BaseEstimator):
    robot_radius = None

    def fit(self, world, y=None):
        self.world_ = check_world(world, self.robot_radius)
        return self

    def _endpoints(self, start, goal):
        check_fitted(self)
        w = self.world_
        start = w.start if start is None else start
        goal = w.goal if goal is None else goal
        if start is None or goal is None:
            raise ValueError("start and goal are required when the scenario does not define them")
        return check_pose(start, "start"), check_point(goal, "goal")


class FDSPCPlanner(_WorldEstimator):
    def __init__(self, dt=0.01, rho=0.4, theta_a1=0.1, theta_a2=None, l_add=0.5, back_obs=0.5,
                 max_nodes=10000, robot_radius=None):
        self.dt = dt
        self.rho = rho
        self.theta_a1 = theta_a1
        self.theta_a2 = theta_a2
        self.l_add = l_add
        self.back_obs = back_obs
        self.max_nodes = max_nodes
        self.robot_radius = robot_radius

    def planner_config(self) -> PlannerConfig:
        return PlannerConfig(dt=self.dt, rho=self.rho, theta_a1=self.theta_a1, theta_a2=self.theta_a2,
                             l_add=self.l_add, back_obs=self.back_obs, max_nodes=self.max_nodes)

    def predict(self, start=None, goal=None):
        start, goal = self._endpoints(start, goal)
        return plan(self.world_, start, goal, self.planner_config())


class FDSPC25DPlanner(FDSPCPlanner):
    def __init__(self, dt=0.01, rho=0.4, theta_a1=0.1, theta_a2=None, l_add=0.5, back_obs=0.5,
                 max_nodes=10000, robot_radius=None, theta_max=math.radians(30.0), rho_z=0.4,
                 cross_back_obs=None):
        super().__init__(dt, rho, theta_a1, theta_a2, l_add, back_obs, max_nodes, robot_radius)
        self.theta_max = theta_max
        self.rho_z = rho_z
        self.cross_back_obs = cross_back_obs

    def cross_config(self) -> CrossConfig:
        back = self.back_obs if self.cross_back_obs is None else self.cross_back_obs
        return CrossConfig(theta_max=self.theta_max, rho_z=self.rho_z, back_obs=back)

    def predict(self, start=None, goal=None):
        start, goal = self._endpoints(start, goal)
        return plan_25d(self.world_, start, goal, self.planner_config(), self.cross_config())


class GridPlanner(_WorldEstimator):
    """A*, Dijkstra or GBFS over the inflated occupancy grid."""

    def __init__(self, mode="astar", robot_radius=None):
        self.mode = mode
        self.robot_radius = robot_radius

    def predict(self, start=None, goal=None):
        start, goal = self._endpoints(start, goal)
        return grid_search(self.world_, start[:2], goal, self.mode)


class RRTPlanner(_WorldEstimator):
    def __init__(self, step=None, goal_bias=0.05, max_iterations=20000, seed=0, robot_radius=None):
        self.step = step
        self.goal_bias = goal_bias
        self.max_iterations = max_iterations
        self.seed = seed
        self.robot_radius = robot_radius

    def predict(self, start=None, goal=None, seed=None):
        start, goal = self._endpoints(start, goal)
        params = RRTParams(step=self.step, goal_bias=self.goal_bias, max_iterations=self.max_iterations)
        return rrt(self.world_, start[:2], goal, self.seed if seed is None else seed, params)


class VelocityProfiler(TransformerMixin, BaseEstimator):
    """Turns a curvature profile (or waypoints) into a timed trajectory."""

    def __init__(self, a=0.5, v_max=1.0, v_min=0.3, v_start=0.0, v_end=0.0, lookahead=None):
        self.a = a
        self.v_max = v_max
        self.v_min = v_min
        self.v_start = v_start
        self.v_end = v_end
        self.lookahead = lookahead

    def velocity_config(self) -> VelocityConfig:
        return VelocityConfig(self.a, self.v_max, self.v_min, self.v_start, self.v_end, self.lookahead)

    def fit(self, X=None, y=None):
        self.config_ = self.velocity_config()
        return self

    def transform(self, X, start=None):
        check_fitted(self, "config_")
        if hasattr(X, "success") and hasattr(X, "profile"):
            if not X.success:
                raise ValueError("cannot profile a failed plan")
            return plan_velocity(X.waypoints, self.config_, dt=X.profile.dt)
        return plan_velocity(X, self.config_, start=start)
