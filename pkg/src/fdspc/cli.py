"""Command line: load a scenario, run planners, write trajectories, reports and renders.

Exit codes: 0 when every planner found a path, 2 when any planner found
none, 1 on usage, configuration or file errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from ._validation import check_world
from .baselines import RRTParams, grid_search, rrt
from .metrics import PathReport, instrumented_run, reports_to_csv, reports_to_json
from .planner25d import CrossConfig, plan_25d
from .planner2d import PlannerConfig, plan
from .render import render_svg
from .velocity import VelocityConfig, plan_velocity, polyline_waypoints
from .world import ScenarioError, WorldModel, load_scenario

log = logging.getLogger("fdspc")

EXIT_OK, EXIT_ERROR, EXIT_NO_PATH = 0, 1, 2
PLANNERS = ("fdspc", "fdspc25d", "astar", "dijkstra", "gbfs", "rrt")
STOCHASTIC = {"rrt"}

# recommended tuning ranges; values outside them still run but are flagged
RANGES = {"dt": (0.01, 0.015), "rho": (0.3, 0.5), "theta_a1": (0.1, 0.2), "l_add": (0.4, 0.8)}

# option name -> default; None means "take the library default"
OVERRIDES = {
    "dt": 0.01, "rho": 0.4, "rho_z": 0.4, "theta_a1": 0.1, "theta_a2": None, "l_add": 0.5,
    "back_obs": 0.5, "theta_max": 30.0, "v_max": 1.0, "v_min": 0.3, "accel": 0.5,
    "robot_radius": None, "cross_back_obs": None, "max_nodes": 10000,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class RunConfig:
    scenario: Path
    planners: Tuple[str, ...] = ("fdspc",)
    out: Path = Path("out")
    seed: int = 0
    repetitions: int = 500
    params: Dict[str, Optional[float]] = field(default_factory=lambda: dict(OVERRIDES))
    report_format: str = "json"
    deterministic: bool = False

    def planner_config(self) -> PlannerConfig:
        p = self.params
        return PlannerConfig(dt=p["dt"], rho=p["rho"], theta_a1=p["theta_a1"], theta_a2=p["theta_a2"],
                             l_add=p["l_add"], back_obs=p["back_obs"], max_nodes=int(p["max_nodes"]))

    def cross_config(self) -> CrossConfig:
        p = self.params
        back = p["back_obs"] if p["cross_back_obs"] is None else p["cross_back_obs"]
        return CrossConfig(theta_max=math.radians(p["theta_max"]), rho_z=p["rho_z"], back_obs=back)

    def velocity_config(self) -> VelocityConfig:
        p = self.params
        return VelocityConfig(a=p["accel"], v_max=p["v_max"], v_min=p["v_min"])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fdspc", description="Curvature-integration motion planning.")
    sub = parser.add_subparsers(dest="command")
    for name, help_text in (("run", "plan and write artifacts"), ("validate", "check a configuration only")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", required=True, type=Path, help="scenario JSON file")
        p.add_argument("--planner", default="fdspc", choices=PLANNERS + ("all",))
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--repetitions", type=int, default=500, help="runs averaged for stochastic planners")
        p.add_argument("--report-format", choices=("json", "csv", "both"), default="json")
        p.add_argument("--deterministic", action="store_true",
                       help="leave wall-clock and memory columns out of the reports")
        p.add_argument("--validate-only", action="store_true")
        p.add_argument("-v", "--verbose", action="store_true")
        for key in OVERRIDES:
            flag = "--" + key.replace("_", "-")
            kind = int if key == "max_nodes" else float
            p.add_argument(flag, dest=key, type=kind, default=None)
    return parser


def _scenario_config(path: Path) -> Tuple[WorldModel, dict]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read scenario {path}: {exc.strerror or exc}") from None
    world = load_scenario(text, name=path.stem)
    cfg = json.loads(text).get("config") or {}
    if not isinstance(cfg, dict):
        raise ScenarioError("'config' must be an object")
    unknown = set(cfg) - set(OVERRIDES)
    if unknown:
        raise ScenarioError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return world, cfg


def config_from_args(args) -> Tuple[RunConfig, WorldModel]:
    world, file_cfg = _scenario_config(args.scenario)
    params = dict(OVERRIDES)
    params.update(file_cfg)
    for key in OVERRIDES:
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    planners = PLANNERS if args.planner == "all" else (args.planner,)
    cfg = RunConfig(args.scenario, planners, args.out, args.seed, args.repetitions, params,
                    args.report_format, args.deterministic)
    return cfg, world


def validate(config: RunConfig, world: Optional[WorldModel] = None) -> Tuple[List[str], List[str]]:
    """Static checks: ``(errors, warnings)``. Planners are not run."""
    errors: List[str] = []
    warnings: List[str] = []
    p = config.params
    if not Path(config.scenario).is_file():
        errors.append(f"scenario file not found: {config.scenario}")
    for key, (lo, hi) in RANGES.items():
        v = p[key]
        if v is not None and not lo <= v <= hi:
            warnings.append(f"{key}={v:g} is outside the recommended range [{lo:g}, {hi:g}]")
    for key in ("dt", "rho", "rho_z", "theta_a1", "l_add", "back_obs", "v_max", "accel"):
        if not p[key] > 0:
            errors.append(f"{key} must be positive")
    a1 = p["theta_a1"]
    a2 = p["theta_a2"] if p["theta_a2"] is not None else (a1 / 5.0 if a1 else None)
    if a2 is not None and a1 is not None and not 0 < a2 < a1:
        errors.append(f"theta_a2 ({a2:g}) must be positive and smaller than theta_a1 ({a1:g})")
    if not 0 <= p["theta_max"] < 90:
        errors.append("theta_max must lie in [0, 90) degrees")
    if not 0 <= p["v_min"] < p["v_max"]:
        errors.append("need 0 <= v_min < v_max")
    if config.repetitions < 1:
        errors.append("repetitions must be >= 1")
    if world is not None and (world.start is None or world.goal is None):
        errors.append("scenario must define start and goal")
    return errors, warnings


def _planner_call(name: str, cfg: RunConfig, world: WorldModel):
    start, goal = world.start, world.goal
    if name == "fdspc":
        pc = cfg.planner_config()
        return (lambda: plan(world, start, goal, pc)), {}
    if name == "fdspc25d":
        pc, cc = cfg.planner_config(), cfg.cross_config()
        return (lambda: plan_25d(world, start, goal, pc, cc)), {}
    if name in ("astar", "dijkstra", "gbfs"):
        return (lambda: grid_search(world, start[:2], goal, name)), {}
    params = RRTParams()
    return (lambda seed: rrt(world, start[:2], goal, seed, params)), {}


def _trajectory(name: str, out, cfg: RunConfig):
    vcfg = cfg.velocity_config()
    dt = cfg.params["dt"]
    if name.startswith("fdspc"):
        return plan_velocity(out.waypoints, vcfg, dt=dt)
    return plan_velocity(polyline_waypoints(out.points, dt), vcfg, dt=dt)


def _path_points(out):
    if hasattr(out, "waypoints") and out.waypoints is not None:
        return out.waypoints.xy
    return out.points


def run(config: RunConfig, world: WorldModel) -> int:
    world = check_world(world, config.params["robot_radius"])
    out_dir = Path(config.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out_dir}: {exc.strerror or exc}") from None
    stem = world.name or Path(config.scenario).stem
    reports: List[PathReport] = []
    # runs are serialized so timings do not compete for the CPU
    for name in config.planners:
        fn, kwargs = _planner_call(name, config, world)
        stochastic = name in STOCHASTIC
        rep = instrumented_run(fn, (), name=name, scenario=stem, stochastic=stochastic,
                               repetitions=config.repetitions, seed=config.seed, kwargs=kwargs)
        reports.append(rep)
        out = rep.extra.get("output")
        ok = out is not None and getattr(out, "success", False)
        log.info("%s: %s", name, "path found" if ok else (rep.error or "no path"))
        if not ok:
            continue
        _trajectory(name, out, config).to_csv(out_dir / f"{stem}_{name}.csv")
        pts = _path_points(out)
        svg = render_svg(world, {name: pts}, start=world.start, goal=world.goal)
        (out_dir / f"{stem}_{name}.svg").write_text(svg, encoding="utf-8")
        if name.startswith("fdspc"):
            tree_svg = render_svg(world, {name: pts}, tree=out.tree, start=world.start, goal=world.goal)
            (out_dir / f"{stem}_{name}_tree.svg").write_text(tree_svg, encoding="utf-8")
    if config.report_format in ("json", "both"):
        (out_dir / "report.json").write_text(reports_to_json(reports, config.deterministic), encoding="utf-8")
    if config.report_format in ("csv", "both"):
        (out_dir / "report.csv").write_text(reports_to_csv(reports, config.deterministic), encoding="utf-8")
    return EXIT_OK if all(r.success for r in reports) else EXIT_NO_PATH


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0].startswith("--") and argv[0] not in ("--help",):
        argv.insert(0, "run")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: run or validate")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s: %(message)s")
        cfg, world = config_from_args(args)
        errors, warnings = validate(cfg, world)
        for w in warnings:
            log.warning(w)
        if errors:
            for e in errors:
                print(f"error: {e}", file=sys.stderr)
            return EXIT_ERROR
        if args.command == "validate" or args.validate_only:
            print("configuration ok" + (f" ({len(warnings)} warning(s))" if warnings else ""))
            return EXIT_OK
        return run(cfg, world)
    except (UsageError, ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
