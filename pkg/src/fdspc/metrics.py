"""Path length, smoothness metrics and instrumented planner runs."""

from __future__ import annotations

import csv
import io
import json
import math
import time
import tracemalloc
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

ANGLE_EPS = 1e-12

REPORT_COLUMNS = ("scenario", "planner", "success", "runs", "successes", "time_s", "time_s_std",
                  "memory_mb", "length_m", "length_m_std", "s1", "s1_std", "s2", "s2_std", "n_points")


def _points(points, minimum: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] not in (2, 3):
        raise ValueError("points must be an (n, 2) or (n, 3) array")
    if len(pts) < minimum:
        raise ValueError(f"need at least {minimum} points, got {len(pts)}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    return pts


def path_length(points) -> float:
    pts = _points(points, 2)
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


def turning_angles(points) -> np.ndarray:
    """Angle between consecutive segment vectors, 0 where a segment is degenerate."""
    pts = _points(points, 3)
    d = np.diff(pts, axis=0)
    a, b = d[:-1], d[1:]
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    dot = np.sum(a * b, axis=1)
    if pts.shape[1] == 2:
        cross = np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
    else:
        cross = np.linalg.norm(np.cross(a, b), axis=1)
    # atan2 keeps full precision for the tiny angles of dense smooth paths
    ang = np.arctan2(cross, dot)
    ang[(na == 0) | (nb == 0)] = 0.0
    return ang


def smoothness(points):
    """``(s1, s2)``: degrees of turning per meter, and mean degrees per turning vertex."""
    ang = turning_angles(points)
    total = float(np.sum(ang))
    length = path_length(points)
    s1 = math.degrees(total / length) if length > 0 else 0.0
    n_turns = int(np.count_nonzero(ang > ANGLE_EPS))
    s2 = math.degrees(total / n_turns) if n_turns else 0.0
    return s1, s2


@dataclass
class PathReport:
    planner_name: str
    scenario: str = ""
    success: bool = False
    time_s: float = 0.0
    memory_mb: float = 0.0
    length_m: float = 0.0
    s1: float = 0.0
    s2: float = 0.0
    n_points: int = 0
    runs: int = 1
    successes: int = 0
    time_s_std: float = 0.0
    length_m_std: float = 0.0
    s1_std: float = 0.0
    s2_std: float = 0.0
    error: Optional[str] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def row(self) -> Dict[str, Any]:
        return {k: self.planner_name if k == "planner" else getattr(self, k) for k in REPORT_COLUMNS}


def _measure(planner: Callable, inputs: Sequence[Any], kwargs: Dict[str, Any]):
    tracemalloc.start()
    try:
        t0 = time.perf_counter()
        try:
            out, err = planner(*inputs, **kwargs), None
        except Exception as exc:  # failures become failed reports
            out, err = None, f"{type(exc).__name__}: {exc}"
        elapsed = time.perf_counter() - t0
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    return out, err, elapsed, peak / 2 ** 20


def _extract_points(out) -> Optional[np.ndarray]:
    if out is None:
        return None
    for attr in ("points", "waypoints"):
        val = getattr(out, attr, None)
        if val is not None:
            out = val
            break
    if hasattr(out, "xyz"):
        return out.xyz
    if getattr(out, "success", True) is False:
        return None
    pts = np.asarray(out, dtype=float)
    return pts if pts.ndim == 2 and len(pts) else None


def instrumented_run(planner: Callable, inputs: Sequence[Any] = (), name: str = "", scenario: str = "",
                     stochastic: bool = False, repetitions: int = 500, seed: int = 0,
                     kwargs: Optional[Dict[str, Any]] = None) -> PathReport:
    """Time and measure ``planner(*inputs)`` and score its path.

    Stochastic planners receive ``seed=seed + k`` for run ``k`` and their
    time, length, S1 and S2 are averaged over the successful runs. Memory is
    the peak of Python-level allocations during the call. The first run's
    return value is kept in ``report.extra["output"]``.
    """
    kwargs = dict(kwargs or {})
    name = name or getattr(planner, "__name__", type(planner).__name__)
    runs = repetitions if stochastic else 1
    if runs < 1:
        raise ValueError("repetitions must be >= 1")
    times: List[float] = []
    mems: List[float] = []
    scores: List[tuple] = []
    errors: List[str] = []
    first_out = None
    for k in range(runs):
        kw = dict(kwargs, seed=seed + k) if stochastic else kwargs
        out, err, elapsed, mem = _measure(planner, inputs, kw)
        if k == 0:
            first_out = out
        times.append(elapsed)
        mems.append(mem)
        pts = None if err else _extract_points(out)
        if pts is None:
            errors.append(err or "no path")
            continue
        if len(pts) >= 3:
            s1, s2 = smoothness(pts)
        else:
            s1 = s2 = 0.0
        scores.append((path_length(pts) if len(pts) >= 2 else 0.0, s1, s2, len(pts)))
    rep = PathReport(name, scenario, runs=runs, successes=len(scores))
    # not serialized; lets callers export the first run's path
    rep.extra["output"] = first_out
    rep.time_s = float(np.mean(times))
    rep.time_s_std = float(np.std(times))
    rep.memory_mb = float(np.max(mems))
    if scores:
        arr = np.array(scores, dtype=float)
        rep.success = True
        rep.length_m, rep.s1, rep.s2 = (float(v) for v in arr[:, :3].mean(axis=0))
        rep.length_m_std, rep.s1_std, rep.s2_std = (float(v) for v in arr[:, :3].std(axis=0))
        rep.n_points = int(round(arr[:, 3].mean()))
    else:
        rep.error = errors[0] if errors else "no path"
    return rep


TIMING_COLUMNS = ("time_s", "time_s_std", "memory_mb")


def reports_to_json(reports: Sequence[PathReport], deterministic: bool = False) -> str:
    """JSON report; ``deterministic`` drops the wall-clock and memory fields."""
    rows = []
    for r in reports:
        row = r.row()
        row["error"] = r.error
        if deterministic:
            for k in TIMING_COLUMNS:
                row.pop(k)
        rows.append(row)
    return json.dumps({"metrics_on": "raw planner output", "reports": rows}, indent=2, sort_keys=True) + "\n"


def reports_to_csv(reports: Sequence[PathReport], deterministic: bool = False) -> str:
    cols = [c for c in REPORT_COLUMNS if not (deterministic and c in TIMING_COLUMNS)]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.row())
    return buf.getvalue()
