"""Command-line harness: ``shadowcast <subcommand> --scenario FILE [options]``.

Exit status is 0 on success, 2 for an invalid scenario or arguments, and 3
when a plan has infeasible samples or rate-limit violations (unless
``--allow-violations`` is given).
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from ..legibility import ObserverModel, OptimizerParams
from ..observer_sim import compare_methods, prediction_curve
from ..asd_planner import (
    PlanResult,
    RateConstraint,
    plan_collision_foreshadow,
    plan_legible_illusion,
    plan_motion_illusion,
)
from ..trajectory import straight_line
from . import output
from .scenario import ScenarioError, ScenarioFile, load_scenario

log = logging.getLogger("shadowcast")

SUBCOMMANDS = ("plan-motion", "plan-legible", "plan-foreshadow", "compare", "observe")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_VIOLATION = 3


class PlanRejected(RuntimeError):
    """A plan was produced but is infeasible or breaks the rate limit."""


@dataclass(frozen=True)
class Settings:
    scenario: ScenarioFile
    scenario_name: str
    out: Path
    formats: tuple[str, ...]
    dt: float
    lookahead: float
    theta: float
    constraint: RateConstraint
    allow_violations: bool
    enforce: bool

    @property
    def observer(self) -> ObserverModel:
        return replace(self.scenario.to_observer(), commit_threshold_theta=self.theta)

    @property
    def optimizer(self) -> OptimizerParams:
        return replace(self.scenario.to_optimizer(), dt=self.dt)

    def wants(self, fmt: str) -> bool:
        return fmt in self.formats


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shadowcast", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", action="append", required=True,
                       help="scenario file or bundled name (repeatable)")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--dt", type=float, help="sampling step, s")
        p.add_argument("--epsilon", type=float, help="max light change per window, deg")
        p.add_argument("--delta-t", dest="delta_t", type=float, help="rate window length, s")
        p.add_argument("--lookahead", type=float, help="foreshadow lookahead k, s")
        p.add_argument("--theta", type=float, help="observer commit threshold")
        p.add_argument("--allow-violations", action="store_true",
                       help="exit 0 even if a plan breaks the rate limit or is infeasible")
        p.add_argument("--enforce", action="store_true", help="clamp light schedules to the rate limit")
        p.add_argument("--format", default=None, help="comma-separated subset of csv,svg")
        p.add_argument("--jobs", type=int, default=1, help="scenarios to run in parallel")
    return parser


def _settings(args, name: str, multiple: bool) -> Settings:
    scn = load_scenario(name)
    if args.out is not None:
        out = args.out / Path(name).stem if multiple else args.out
    elif scn.outputs.directory is not None:
        out = Path(scn.outputs.directory)
    else:
        out = Path("out") / Path(name).stem
    if args.format is not None:
        formats = tuple(f.strip() for f in args.format.split(",") if f.strip())
        bad = [f for f in formats if f not in ("csv", "svg")]
        if bad:
            raise ScenarioError(f"--format: unknown format(s) {bad}")
    else:
        formats = tuple(scn.outputs.formats)
    c = scn.constraint
    try:
        constraint = RateConstraint(
            args.epsilon if args.epsilon is not None else c.epsilon,
            args.delta_t if args.delta_t is not None else c.delta_t,
        )
    except ValueError as exc:
        raise ScenarioError(f"constraint: {exc}") from exc
    dt = args.dt if args.dt is not None else scn.planner.dt
    if not dt > 0:
        raise ScenarioError("--dt: must be > 0")
    theta = args.theta if args.theta is not None else scn.observer.theta
    if not 0.5 < theta <= 1.0:
        raise ScenarioError("--theta: must lie in (0.5, 1]")
    lookahead = args.lookahead if args.lookahead is not None else scn.planner.lookahead_k
    return Settings(scn, name, out, formats, dt, lookahead, theta, constraint,
                    args.allow_violations, args.enforce)


def _emit_plan(s: Settings, plan: PlanResult, directory: Path, title: str, scene=None) -> None:
    if s.wants("csv"):
        output.write_plan_csv(directory / "plan.csv", plan)
        output.write_windows_csv(directory / "constraints.csv", plan)
    if s.wants("svg"):
        output.write_plan_svg(directory / "plan.svg", plan, scene, title)


def _gate(s: Settings, plans: dict[str, PlanResult]) -> None:
    problems = []
    for name, plan in plans.items():
        if plan.infeasible:
            problems.append(f"{name}: {len(plan.infeasible)} infeasible sample(s)")
        if plan.violations:
            problems.append(
                f"{name}: {plan.violations} window(s) exceed {s.constraint.epsilon:g} deg per "
                f"{s.constraint.delta_t:g} s"
            )
    if problems and not s.allow_violations:
        raise PlanRejected("; ".join(problems) + " (use --allow-violations or --enforce)")
    for p in problems:
        log.warning(p)


def run_plan_motion(s: Settings) -> None:
    targets = s.scenario.motion_targets()
    pose = s.scenario.stationary_pose()
    plans = {}
    rows = []
    for name, desired in targets.items():
        plan = plan_motion_illusion(pose, desired, s.constraint, s.dt, enforce=s.enforce)
        directory = s.out if len(targets) == 1 else s.out / name
        _emit_plan(s, plan, directory, f"motion illusion: {name}")
        plans[name] = plan
        rows.append((name, len(plan.constraint_report), plan.violations, plan.metrics["max_step_deg"]))
    if len(targets) > 1 and s.wants("csv"):
        output.write_atomic(
            s.out / "sweeps.csv",
            output.csv_text(("target", "windows", "violated_windows", "max_step_deg"), rows),
        )
    _gate(s, plans)


def run_plan_legible(s: Settings) -> None:
    scene = s.scenario.to_scene()
    observer = s.observer
    plan = plan_legible_illusion(scene, scene.target, observer, s.constraint, s.optimizer, enforce=s.enforce)
    _emit_plan(s, plan, s.out, "legible-motion illusion", scene)
    if s.wants("csv"):
        curve = prediction_curve(plan.shadow, scene, observer, s.dt)
        output.write_posterior_csv(s.out / "posterior.csv", curve)
    _gate(s, {"plan-legible": plan})


def run_plan_foreshadow(s: Settings) -> None:
    scene = s.scenario.to_scene()
    robot = straight_line(scene.start, scene.goals[scene.target], scene.duration, s.dt)
    try:
        plan = plan_collision_foreshadow(robot, s.lookahead, s.constraint, enforce=s.enforce)
    except ValueError as exc:
        raise ScenarioError(f"planner.lookahead_k: {exc}") from exc
    _emit_plan(s, plan, s.out, "imminent-collision foreshadowing", scene)
    _gate(s, {"plan-foreshadow": plan})


def run_compare(s: Settings) -> None:
    scene = s.scenario.to_scene()
    report = compare_methods(scene, s.observer, s.constraint, s.optimizer, theta=s.theta, enforce=s.enforce)
    if s.wants("csv"):
        output.write_report_csv(s.out / "report.csv", report)
    if s.wants("svg"):
        output.write_plan_svg(s.out / "plan.svg", report.asd_plan, scene, "ASD plan")


def run_observe(s: Settings) -> None:
    scene = s.scenario.to_scene()
    report = compare_methods(scene, s.observer, s.constraint, s.optimizer, theta=s.theta, enforce=s.enforce)
    if s.wants("csv"):
        output.write_posterior_csv(s.out / "posterior.csv", report.curves["ASD"])
        for method in ("BIC", "NE"):
            output.write_posterior_csv(s.out / f"posterior_{method}.csv", report.curves[method])
    if s.wants("svg"):
        output.write_plan_svg(s.out / "plan.svg", report.asd_plan, scene, "ASD plan")


RUNNERS = {
    "plan-motion": run_plan_motion,
    "plan-legible": run_plan_legible,
    "plan-foreshadow": run_plan_foreshadow,
    "compare": run_compare,
    "observe": run_observe,
}


def _run_one(command: str, s: Settings) -> tuple[int, str]:
    try:
        RUNNERS[command](s)
    except ScenarioError as exc:
        return EXIT_INVALID, f"{s.scenario_name}: {exc}"
    except PlanRejected as exc:
        return EXIT_VIOLATION, f"{s.scenario_name}: {exc}"
    return EXIT_OK, f"{s.scenario_name}: wrote {s.out}"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    multiple = len(args.scenario) > 1
    try:
        settings = [_settings(args, name, multiple) for name in args.scenario]
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    if args.jobs > 1 and multiple:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, [args.command] * len(settings), settings))
    else:
        results = [_run_one(args.command, s) for s in settings]

    status = EXIT_OK
    for code, message in results:
        if code == EXIT_OK:
            log.info(message)
        else:
            print(f"error: {message}", file=sys.stderr)
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
