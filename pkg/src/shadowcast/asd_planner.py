"""Active-shadowing planners.

Each planner picks a desired (perceived) trajectory, projects it to the ground
under a reference light to get the desired shadow, and then solves, sample by
sample, for the light direction under which the *actual* robot pose casts
that shadow. The resulting light schedule is checked against a rate
constraint: at most ``epsilon`` degrees of light motion in any window of
``delta_t`` seconds.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .geometry import (
    OVERHEAD,
    GripperPose,
    GroundPoint,
    InfeasibleLightError,
    LightDirection,
    angular_distance,
    project_shadow,
    solve_light,
)
from .legibility import ObserverModel, OptimizerParams, legibility_score, optimize_legible
from .trajectory import (
    Scene,
    ShadowTrajectory,
    Trajectory,
    deviation_cost,
    lookahead,
    path_length,
    resample,
    straight_line,
    time_grid,
)

log = logging.getLogger(__name__)

# slack for float round-off when comparing an angular change against epsilon
ANGLE_TOL = 1e-9


@dataclass(frozen=True)
class RateConstraint:
    """At most ``epsilon`` degrees of light motion per ``delta_t`` seconds."""

    epsilon: float = 15.0
    delta_t: float = 3.0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if not (math.isfinite(self.delta_t) and self.delta_t > 0):
            raise ValueError(f"delta_t must be > 0, got {self.delta_t}")


@dataclass(frozen=True, eq=False)
class LightSchedule:
    times: np.ndarray
    lights: tuple[LightDirection, ...]

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        times.flags.writeable = False
        lights = tuple(self.lights)
        if times.ndim != 1 or times.size != len(lights) or times.size < 1:
            raise ValueError("need one light per timestamp")
        if np.any(np.diff(times) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "lights", lights)

    def __len__(self) -> int:
        return len(self.lights)

    @property
    def samples(self) -> list[tuple[float, LightDirection]]:
        return list(zip((float(t) for t in self.times), self.lights))

    def step_changes(self) -> np.ndarray:
        """Angular distance between consecutive lights, degrees."""
        return np.array(
            [angular_distance(a, b) for a, b in zip(self.lights[:-1], self.lights[1:])], dtype=float
        )

    def vectors(self) -> np.ndarray:
        return np.array([light.unit_vector() for light in self.lights])


@dataclass(frozen=True)
class WindowCheck:
    start: float
    end: float
    angular_change: float
    violated: bool


@dataclass(frozen=True, eq=False)
class PlanResult:
    """Everything a planner produces, sampled on one shared time grid.

    ``infeasible`` lists sample indices where no light could realize the
    desired shadow; the last feasible light is held there.
    """

    robot: Trajectory
    desired: Trajectory
    shadow: ShadowTrajectory
    lights: LightSchedule
    constraint: RateConstraint
    constraint_report: tuple[WindowCheck, ...]
    infeasible: tuple[int, ...] = ()
    metrics: dict = field(default_factory=dict)
    converged: bool = True

    @property
    def violations(self) -> int:
        return sum(w.violated for w in self.constraint_report)

    @property
    def compliant(self) -> bool:
        return self.violations == 0 and not self.infeasible

    def violated_samples(self) -> np.ndarray:
        """Per-sample flag: the sample lies inside at least one violated window."""
        flags = np.zeros(len(self.robot), dtype=bool)
        t = self.robot.times
        for w in self.constraint_report:
            if w.violated:
                flags |= (t >= w.start) & (t <= w.end)
        return flags


def window_bounds(times: np.ndarray, delta_t: float) -> list[tuple[int, int]]:
    """Index pairs (i, j): every window starting at a grid time that spans ``delta_t``.

    ``j`` is the last sample with ``t_j <= t_i + delta_t``. A schedule shorter
    than ``delta_t`` yields one window covering all of it.
    """
    times = np.asarray(times, dtype=float)
    n = times.size
    tol = 1e-9 * max(1.0, abs(float(times[-1])))
    out = []
    for i in range(n):
        if times[i] + delta_t > times[-1] + tol and out:
            break
        j = int(np.searchsorted(times, times[i] + delta_t + tol, side="right")) - 1
        out.append((i, j))
        if times[i] + delta_t > times[-1] + tol:
            break
    return out


def check_rate(lights: LightSchedule, constraint: RateConstraint) -> tuple[WindowCheck, ...]:
    """Total angular variation of the light inside every ``delta_t`` window."""
    if len(lights) < 2:
        return (WindowCheck(float(lights.times[0]), float(lights.times[0]), 0.0, False),)
    cum = np.concatenate([[0.0], np.cumsum(lights.step_changes())])
    report = []
    for i, j in window_bounds(lights.times, constraint.delta_t):
        change = float(cum[j] - cum[i])
        report.append(
            WindowCheck(
                float(lights.times[i]),
                float(lights.times[j]),
                change,
                change > constraint.epsilon + ANGLE_TOL,
            )
        )
    return tuple(report)


@dataclass(frozen=True)
class ClampEvent:
    index: int
    t: float
    requested: LightDirection
    applied: LightDirection


def enforce_rate_limit(
    lights: LightSchedule, constraint: RateConstraint
) -> tuple[LightSchedule, tuple[ClampEvent, ...]]:
    """Clamp a schedule so that every step moves at most ``epsilon * step / delta_t`` degrees.

    Budgets add up to at most ``epsilon`` over any window of ``delta_t``. A
    sample that exceeds its budget is moved along the great circle from the
    previous output toward the requested direction, by exactly the budget.
    Compliant schedules come back unchanged.
    """
    if len(lights) < 2:
        return lights, ()
    budgets = constraint.epsilon * np.diff(lights.times) / constraint.delta_t
    vecs, clamped = kernels.rate_clamp(np.ascontiguousarray(lights.vectors()), np.ascontiguousarray(budgets))
    out = list(lights.lights)
    events = []
    for i in np.flatnonzero(clamped):
        applied = LightDirection.from_vector(vecs[i], fallback_phi=out[i - 1].azimuth_phi)
        events.append(ClampEvent(int(i), float(lights.times[i]), lights.lights[i], applied))
        out[i] = applied
    return LightSchedule(lights.times, tuple(out)), tuple(events)


def smooth_shadow(desired: ShadowTrajectory, gain: float) -> ShadowTrajectory:
    """First-order discrete-time tracking of the desired shadow.

    s_0 = d_0 and s_k = s_{k-1} + gain * (d_k - s_{k-1}); a gain of 1 is the
    identity and smaller gains lag geometrically with ratio ``1 - gain``.
    """
    if not 0.0 < gain <= 1.0:
        raise ValueError(f"gain must lie in (0, 1], got {gain}")
    pts = kernels.first_order_filter(np.ascontiguousarray(desired.points, dtype=float), float(gain))
    return ShadowTrajectory(desired.times, pts)


def perception_discrepancy(perceived: Trajectory, actual: Trajectory) -> float:
    """Mean distance between two trajectories over the union of their sample times.

    Only the overlapping part of the two time domains is compared.
    """
    lo = max(perceived.start_time, actual.start_time)
    hi = min(perceived.end_time, actual.end_time)
    if lo > hi:
        raise ValueError("trajectories have disjoint time domains")
    grid = np.union1d(perceived.times, actual.times)
    grid = grid[(grid >= lo) & (grid <= hi)]
    if grid.size == 0:
        grid = np.array([lo])
    d = np.linalg.norm(perceived.at(grid) - actual.at(grid), axis=1)
    return float(np.mean(d))


def _realize(
    robot: Trajectory,
    desired: Trajectory,
    constraint: RateConstraint,
    reference: LightDirection,
    enforce: bool,
) -> tuple[ShadowTrajectory, LightSchedule, tuple[int, ...], tuple[ClampEvent, ...]]:
    """Solve the light at every sample so the robot casts the desired shadow."""
    target = np.array(
        [project_shadow(GripperPose.from_array(p), reference).as_array() for p in desired.points]
    )
    lights = []
    infeasible = []
    previous = reference
    for i, (pose_arr, (sx, sy)) in enumerate(zip(robot.points, target)):
        pose = GripperPose.from_array(pose_arr)
        try:
            light = solve_light(pose, GroundPoint(float(sx), float(sy)), previous)
        except InfeasibleLightError:
            infeasible.append(i)
            light = previous
        lights.append(light)
        previous = light
    schedule = LightSchedule(robot.times, tuple(lights))
    events: tuple[ClampEvent, ...] = ()
    if enforce:
        schedule, events = enforce_rate_limit(schedule, constraint)
    if enforce or infeasible:
        # report where the shadow actually lands under the lights in use
        shadow_pts = np.array(
            [
                project_shadow(GripperPose.from_array(p), light).as_array()
                for p, light in zip(robot.points, schedule.lights)
            ]
        )
        if not enforce:
            keep = np.ones(len(robot), dtype=bool)
            keep[infeasible] = False
            shadow_pts[keep] = target[keep]
        target = shadow_pts
    if infeasible:
        log.warning("%d sample(s) could not be realized; holding the last feasible light", len(infeasible))
    return ShadowTrajectory(robot.times, target), schedule, tuple(infeasible), events


def _plan(robot, desired, constraint, reference, enforce, metrics=None, converged=True) -> PlanResult:
    shadow, lights, infeasible, events = _realize(robot, desired, constraint, reference, enforce)
    metrics = dict(metrics or {})
    metrics.setdefault("path_length_cm", path_length(robot))
    metrics["discrepancy_cm"] = perception_discrepancy(desired, robot)
    metrics["max_step_deg"] = float(lights.step_changes().max()) if len(lights) > 1 else 0.0
    metrics["clamped_samples"] = len(events)
    return PlanResult(
        robot=robot,
        desired=desired,
        shadow=shadow,
        lights=lights,
        constraint=constraint,
        constraint_report=check_rate(lights, constraint),
        infeasible=infeasible,
        metrics=metrics,
        converged=converged,
    )


def plan_motion_illusion(
    stationary: GripperPose,
    desired: Trajectory,
    constraint: RateConstraint,
    dt: float,
    *,
    reference: LightDirection = OVERHEAD,
    enforce: bool = False,
) -> PlanResult:
    """Keep the robot still and move only its shadow along ``desired``'s ground track."""
    desired = resample(desired, dt) if dt < desired.duration else desired
    robot = Trajectory(desired.times, np.tile(stationary.as_array(), (len(desired), 1)))
    return _plan(robot, desired, constraint, reference, enforce, {"zeta_cm2": 0.0})


def plan_legible_illusion(
    scene: Scene,
    intended_goal: str,
    observer: ObserverModel,
    constraint: RateConstraint,
    params: OptimizerParams | None = None,
    *,
    reference: LightDirection = OVERHEAD,
    enforce: bool = False,
) -> PlanResult:
    """Robot takes the straight path; its shadow traces the legible one."""
    params = params or OptimizerParams()
    goal = scene.goals[intended_goal]
    robot = straight_line(scene.start, goal, scene.duration, params.dt)
    legible = optimize_legible(scene, intended_goal, observer, params)
    desired = legible.trajectory
    plan = _plan(robot, desired, constraint, reference, enforce, converged=legible.converged)

    ground_scene = scene.on_ground(GripperPose(*plan.shadow.points[0], 0.0))
    lifted = plan.shadow.lift()
    plan.metrics.update(
        zeta_cm2=deviation_cost(robot, robot),
        zeta_shadow_cm2=deviation_cost(lifted, robot.ground_track().lift()),
        zeta_desired_cm2=deviation_cost(desired, robot),
        legibility_robot=legibility_score(robot, intended_goal, scene, observer).value,
        legibility_desired=legible.score,
        legibility_shadow=legibility_score(lifted, intended_goal, ground_scene, observer).value,
    )
    return plan


def plan_collision_foreshadow(
    robot: Trajectory,
    k: float,
    constraint: RateConstraint,
    *,
    reference: LightDirection = OVERHEAD,
    enforce: bool = False,
) -> PlanResult:
    """Shadow runs ``k`` seconds ahead of the robot, clamped at the final pose."""
    desired = lookahead(robot, k)
    return _plan(robot, desired, constraint, reference, enforce, {"zeta_cm2": 0.0, "lookahead_s": k})


def arrival_time(times: np.ndarray, ground_points: np.ndarray, target, radius: float = 1e-6) -> float | None:
    """First time a ground track comes within ``radius`` of ``target``; None if it never does."""
    d = np.linalg.norm(np.asarray(ground_points)[:, :2] - np.asarray(target, dtype=float)[:2], axis=1)
    hit = np.flatnonzero(d <= radius)
    return float(times[hit[0]]) if hit.size else None


def sweep_trajectory(
    pose: GripperPose,
    sweep_deg: float,
    sweep_time: float,
    hold_time: float = 0.0,
    azimuth_deg: float = 0.0,
    dt: float = 0.1,
) -> Trajectory:
    """Perceived motion whose shadow needs the light to drop ``sweep_deg`` from overhead, linearly in time.

    The sweep lasts ``sweep_time`` and the final position is then held for
    ``hold_time``.
    """
    times = time_grid(0.0, sweep_time + hold_time, dt)
    alpha = 90.0 - sweep_deg * np.minimum(times, sweep_time) / sweep_time
    with np.errstate(divide="ignore"):
        offset = np.where(alpha >= 90.0, 0.0, pose.h / np.tan(np.radians(alpha)))
    phi = math.radians(azimuth_deg)
    pts = np.column_stack(
        [pose.x + offset * math.cos(phi), pose.y + offset * math.sin(phi), np.full(times.size, pose.h)]
    )
    return Trajectory(times, pts)
