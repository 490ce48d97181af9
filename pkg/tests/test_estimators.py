import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from fdspc import (
    CROSSING_SCENARIOS,
    SCENARIOS,
    CurvatureProfile,
    FDSPC25DPlanner,
    FDSPCPlanner,
    GridPlanner,
    RRTPlanner,
    VelocityProfiler,
    scenario_path,
)
from fdspc._validation import check_pose, check_positive, check_world
from fdspc.world import load_scenario_file


def test_get_params_and_clone():
    est = FDSPC25DPlanner(rho=0.3, theta_max=math.radians(20))
    params = est.get_params()
    assert params["rho"] == 0.3 and params["theta_max"] == pytest.approx(math.radians(20))
    twin = clone(est)
    assert twin.get_params() == params and twin is not est
    est.set_params(l_add=0.7)
    assert est.planner_config().l_add == 0.7
    assert est.cross_config().back_obs == est.back_obs


def test_not_fitted():
    with pytest.raises(NotFittedError):
        FDSPCPlanner().predict((0, 0, 0), (1, 1))
    with pytest.raises(NotFittedError):
        VelocityProfiler().transform(CurvatureProfile.straight(1.0, 0.01))


def test_fit_predict_on_scenario_path():
    est = FDSPCPlanner().fit(scenario_path("long_obstacle"))
    assert est.world_.inflated
    res = est.predict()
    assert res.success
    traj = VelocityProfiler(v_max=0.8).fit().transform(res)
    assert traj.v.max() <= 0.8 and len(traj) == len(res.waypoints)


def test_grid_and_rrt_estimators():
    world = load_scenario_file(scenario_path("long_corridor"))
    a = GridPlanner("astar").fit(world).predict()
    d = GridPlanner("dijkstra").fit(world).predict()
    assert a.cost == pytest.approx(d.cost)
    r1 = RRTPlanner(seed=5).fit(world).predict()
    r2 = RRTPlanner().fit(world).predict(seed=5)
    assert np.array_equal(r1.points, r2.points)


def test_crossing_estimator():
    est = FDSPC25DPlanner(cross_back_obs=0.75).fit(scenario_path("vb_corridor"))
    assert est.predict().waypoints.z.max() >= 0.35


def test_validation_helpers():
    assert check_pose((1, 2)) == (1.0, 2.0, 0.0)
    with pytest.raises(ValueError):
        check_pose((1, 2, 3, 4))
    with pytest.raises(ValueError):
        check_pose((1, math.inf))
    with pytest.raises(ValueError):
        check_positive(0, "dt")
    with pytest.raises(TypeError):
        check_world(42)
    world = load_scenario_file(scenario_path("simple_maze"))
    assert check_world(world).inflation_radius == pytest.approx(0.3)  # r + 0.1
    assert check_world(world, 0.3).inflation_radius == pytest.approx(0.4)


def test_bundled_scenarios_load():
    for name in SCENARIOS + CROSSING_SCENARIOS:
        w = load_scenario_file(scenario_path(name))
        assert w.start is not None and w.goal is not None and w.name == name
