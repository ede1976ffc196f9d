"""Simulated observers watching a robot or its shadow, and commit-time metrics.

An observer watching a shadow sees motion on the ground plane only, so the
shadow is lifted to a height-0 trajectory and the goals are dropped to their
ground positions before inference.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .legibility import ObserverModel, OptimizerParams, posterior_matrix
from .asd_planner import PlanResult, RateConstraint, plan_legible_illusion
from .geometry import GripperPose
from .trajectory import (
    Scene,
    ShadowTrajectory,
    Trajectory,
    deviation_cost,
    path_length,
    resample,
    straight_line,
)


@dataclass(frozen=True, eq=False)
class PredictionCurve:
    times: np.ndarray
    posteriors: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        post = np.array(self.posteriors, dtype=float)
        if post.shape != (times.size, len(self.labels)):
            raise ValueError("posteriors must have one row per time and one column per label")
        if np.any(np.diff(times) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        if not np.allclose(post.sum(axis=1), 1.0, rtol=0, atol=1e-9):
            raise ValueError("every posterior must sum to 1")
        times.flags.writeable = False
        post.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "posteriors", post)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def points(self) -> list[tuple[float, dict[str, float]]]:
        return [
            (float(t), dict(zip(self.labels, (float(p) for p in row))))
            for t, row in zip(self.times, self.posteriors)
        ]

    def of(self, label: str) -> np.ndarray:
        return self.posteriors[:, self.labels.index(label)]


@dataclass(frozen=True)
class CommitResult:
    committed_goal: str | None = None
    commit_time: float | None = None
    correct: bool | None = None

    def __post_init__(self):
        if (self.committed_goal is None) != (self.commit_time is None):
            raise ValueError("committed_goal and commit_time must be given together")


def prediction_curve(
    observed: Trajectory | ShadowTrajectory,
    scene: Scene,
    observer: ObserverModel,
    dt: float,
) -> PredictionCurve:
    """Posterior over goals after each prefix of ``observed``, sampled every ``dt``.

    A :class:`ShadowTrajectory` is watched on the ground plane: it starts the
    inference from its own first point and the goals are taken at height 0.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if isinstance(observed, ShadowTrajectory):
        first = observed.points[0]
        scene = scene.on_ground(GripperPose(float(first[0]), float(first[1]), 0.0))
        observed = observed.lift()
    if dt < observed.duration:
        observed = resample(observed, dt)
    post = posterior_matrix(observed.points, scene, observer)
    return PredictionCurve(observed.times, post, scene.labels)


def time_to_commit(
    curve: PredictionCurve, theta: float = 0.8, intended: str | None = None
) -> CommitResult:
    """Earliest time at which some goal's posterior reaches ``theta``."""
    if not 0.5 < theta <= 1.0:
        raise ValueError(f"theta must lie in (0.5, 1], got {theta}")
    hits = np.argwhere(curve.posteriors >= theta)
    if hits.size == 0:
        return CommitResult()
    # argwhere is row-major, so the first hit is the earliest time
    k, g = (int(v) for v in hits[0])
    label = curve.labels[g]
    return CommitResult(label, float(curve.times[k]), None if intended is None else label == intended)


@dataclass(frozen=True)
class MethodRow:
    method: str
    zeta_cm2: float
    path_length_cm: float
    commit_time_s: float | None
    correct: bool | None


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    """One row per method: ASD (straight robot, legible shadow), BIC (legible robot), NE (straight robot)."""

    rows: tuple[MethodRow, ...]
    intended: str
    theta: float
    curves: dict = field(default_factory=dict)
    asd_plan: PlanResult | None = None

    def row(self, method: str) -> MethodRow:
        for r in self.rows:
            if r.method == method:
                return r
        raise KeyError(method)


def compare_methods(
    scene: Scene,
    observer: ObserverModel,
    constraint: RateConstraint,
    params: OptimizerParams | None = None,
    *,
    intended: str | None = None,
    theta: float | None = None,
    enforce: bool = False,
) -> ComparisonReport:
    """Deviation cost, path length and simulated commit time for ASD, BIC and NE."""
    params = params or OptimizerParams()
    intended = intended or scene.target
    theta = observer.commit_threshold_theta if theta is None else theta
    goal = scene.goals[intended]

    straight = straight_line(scene.start, goal, scene.duration, params.dt)
    asd = plan_legible_illusion(scene, intended, observer, constraint, params, enforce=enforce)
    # the BIC robot executes the same legible path the ASD shadow traces
    legible = asd.desired

    curves = {
        "ASD": prediction_curve(asd.shadow, scene, observer, params.dt),
        "BIC": prediction_curve(legible, scene, observer, params.dt),
        "NE": prediction_curve(straight, scene, observer, params.dt),
    }
    robots = {"ASD": asd.robot, "BIC": legible, "NE": straight}
    rows = []
    for method in ("ASD", "BIC", "NE"):
        commit = time_to_commit(curves[method], theta, intended)
        rows.append(
            MethodRow(
                method=method,
                zeta_cm2=deviation_cost(robots[method], straight),
                path_length_cm=path_length(robots[method]),
                commit_time_s=commit.commit_time,
                correct=commit.correct,
            )
        )
    return ComparisonReport(tuple(rows), intended, theta, curves, asd)
