import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdspc.metrics import (
    PathReport,
    REPORT_COLUMNS,
    instrumented_run,
    path_length,
    reports_to_csv,
    reports_to_json,
    smoothness,
    turning_angles,
)
from conftest import smoothness_oracle as oracle


def test_hand_cases():
    assert path_length([(0, 0), (3, 4)]) == 5.0
    assert smoothness([(0, 0), (1, 0), (2, 0)]) == (0.0, 0.0)
    s1, s2 = smoothness([(0, 0), (1, 0), (1, 1)])
    assert (s1, s2) == (45.0, 90.0)
    octagon = [(math.cos(k * math.pi / 4), math.sin(k * math.pi / 4)) for k in range(9)]
    assert smoothness(octagon)[1] == pytest.approx(45.0, abs=1e-12)
    assert path_length([(0, 0), (1, 0), (1, 1)]) == 2.0
    assert path_length([(0, 0, 0), (0, 0, 4)]) == 4.0


def test_matches_oracle_on_1000_polylines():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        n = int(rng.integers(3, 30))
        dim = int(rng.choice([2, 3]))
        pts = rng.uniform(-5, 5, size=(n, dim))
        if rng.random() < 0.2:
            pts[int(rng.integers(1, n))] = pts[int(rng.integers(0, n))]  # degenerate segments
        length, s1, s2 = oracle(pts)
        assert path_length(pts) == pytest.approx(length, abs=1e-9)
        got = smoothness(pts)
        assert got[0] == pytest.approx(s1, abs=1e-9)
        assert got[1] == pytest.approx(s2, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(-math.pi, math.pi), st.floats(0.1, 10.0),
       st.floats(-50, 50), st.floats(-50, 50))
def test_rigid_and_scale_invariance(seed, rot, scale, tx, ty):
    pts = np.random.default_rng(seed).uniform(0, 5, size=(12, 2))
    R = np.array([[math.cos(rot), -math.sin(rot)], [math.sin(rot), math.cos(rot)]])
    moved = scale * pts @ R.T + (tx, ty)
    s1, s2 = smoothness(pts)
    m1, m2 = smoothness(moved)
    assert m2 == pytest.approx(s2, rel=1e-6, abs=1e-6)
    assert m1 * scale == pytest.approx(s1, rel=1e-6, abs=1e-6)
    assert path_length(moved) == pytest.approx(scale * path_length(pts), rel=1e-9)


def test_downsampling_a_smooth_arc_raises_s2():
    t = np.linspace(0, math.pi, 1001)
    arc = np.column_stack([np.cos(t), np.sin(t)])
    assert smoothness(arc[::10])[1] > 5 * smoothness(arc)[1]


def test_turning_angles_validation():
    with pytest.raises(ValueError):
        turning_angles([(0, 0), (1, 1)])
    with pytest.raises(ValueError):
        path_length([(0, 0, 0, 0), (1, 1, 1, 1)])
    with pytest.raises(ValueError):
        path_length([(0, 0), (math.nan, 1)])


def test_instrumented_run_deterministic_planner():
    rep = instrumented_run(lambda: np.array([[0, 0], [1, 0], [1, 1]]), name="toy", scenario="s")
    assert rep.success and rep.runs == 1 and rep.length_m == 2.0 and rep.s2 == 90.0
    assert rep.time_s >= 0 and rep.memory_mb >= 0
    assert set(rep.row()) == set(REPORT_COLUMNS)


def test_instrumented_run_failures_become_reports():
    def boom():
        raise RuntimeError("nope")

    rep = instrumented_run(boom, name="boom")
    assert not rep.success and "RuntimeError" in rep.error
    rep = instrumented_run(lambda: None, name="none")
    assert not rep.success and rep.error == "no path"


def test_instrumented_run_stochastic_seeds():
    seen = []

    def planner(seed):
        seen.append(seed)
        return np.array([[0, 0], [1, 0], [1 + seed, 1]], dtype=float)

    rep = instrumented_run(planner, stochastic=True, repetitions=5, seed=10)
    assert seen == [10, 11, 12, 13, 14]
    assert rep.runs == 5 and rep.successes == 5
    lengths = [1 + math.hypot(s, 1) for s in seen]
    assert rep.length_m == pytest.approx(np.mean(lengths))
    assert rep.length_m_std == pytest.approx(np.std(lengths))
    with pytest.raises(ValueError):
        instrumented_run(planner, stochastic=True, repetitions=0)


def test_report_serialization():
    reps = [PathReport("a", "s", True, 0.1, 2.0, 3.0, 1.0, 0.5, 10), PathReport("b", "s", error="no path")]
    js = reports_to_json(reps, deterministic=True)
    assert "time_s" not in js and '"error": "no path"' in js
    csv_text = reports_to_csv(reps)
    assert csv_text.splitlines()[0] == ",".join(REPORT_COLUMNS)
    assert len(csv_text.splitlines()) == 3
    assert "memory_mb" not in reports_to_csv(reps, deterministic=True)
