"""Smooth path planning by integrating bounded-rate curvature profiles."""

from importlib import resources as _resources

from .curvature import (
    CurvatureProfile,
    InfeasibleTurn,
    PlannerState,
    Waypoints,
    integrate,
    inverse_integrate,
    ramp_out,
)
from .estimators import FDSPC25DPlanner, FDSPCPlanner, GridPlanner, RRTPlanner, VelocityProfiler
from .metrics import PathReport, instrumented_run, path_length, smoothness
from .planner25d import CrossConfig, CrossProfile, build_cross_profile, crossability_check, plan_25d
from .planner2d import PlannerConfig, PlanResult, direct_plan, explore_plan, plan
from .velocity import Trajectory, VelocityConfig, plan_velocity
from .world import Point25, ScenarioError, WorldModel, inflate, load_scenario, load_scenario_file, occupied_at

__version__ = "0.1.0"

SCENARIOS = ("long_obstacle", "long_corridor", "semi_enclosed", "random_complex", "simple_maze")
# finite-height obstacles for the 2.5-D planner
CROSSING_SCENARIOS = ("vb_corridor", "mixed_crossing")


def scenario_path(name: str):
    """Path of a bundled scenario file, e.g. ``scenario_path("simple_maze")``."""
    return _resources.files(__name__).joinpath("scenarios", f"{name}.json")
