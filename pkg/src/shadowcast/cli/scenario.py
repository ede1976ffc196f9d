"""Scenario files: strict YAML schema and conversion to library objects.

Example::

    scene:
      start: [0.0, 40.0, 20.0]
      goals: {right: [11.5, 0.0], left: [-11.5, 0.0]}
      intended: right
      table_height: 5.0
      duration: 10.0
    observer: {beta: 1.0, weighting: linear, theta: 0.8}
    constraint: {epsilon: 15.0, delta_t: 3.0}
    planner:
      dt: 0.1
      lookahead_k: 4.0
      optimizer: {waypoints: 8, max_iters: 200, step: 2.0, deviation_bound: 2.0}
    outputs: {directory: out/two_cups, formats: [csv, svg]}

Goals given as ``[x, y]`` sit at ``table_height``. Unknown keys are errors.
"""

from __future__ import annotations

import math
from importlib import resources
from pathlib import Path
from typing import Literal

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..geometry import GripperPose
from ..legibility import ObserverModel, OptimizerParams
from ..asd_planner import RateConstraint, sweep_trajectory
from ..trajectory import Scene, Trajectory

BUNDLED = ("two_cups.scn", "wine_glass.scn", "stationary.scn")


class ScenarioError(ValueError):
    """A scenario file that does not parse or validate."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


def _finite(values):
    if any(not math.isfinite(v) for v in values):
        raise ValueError("coordinates must be finite")
    return values


class SceneSpec(_Strict):
    start: list[float] = Field(min_length=3, max_length=3)
    goals: dict[str, list[float]] = Field(min_length=1)
    intended: str | None = None
    table_height: float = Field(default=0.0, ge=0)
    duration: float = Field(default=10.0, gt=0)

    @field_validator("start")
    @classmethod
    def _start_finite(cls, v):
        return _finite(v)

    @field_validator("goals")
    @classmethod
    def _goal_shapes(cls, v):
        for label, xyz in v.items():
            if len(xyz) not in (2, 3):
                raise ValueError(f"goal {label!r} needs [x, y] or [x, y, h]")
            _finite(xyz)
        return v


class ObserverSpec(_Strict):
    beta: float = Field(default=1.0, gt=0)
    prior: dict[str, float] | None = None
    weighting: Literal["linear", "uniform"] = "linear"
    theta: float = Field(default=0.8, gt=0.5, le=1.0)


class ConstraintSpec(_Strict):
    epsilon: float = Field(default=15.0, gt=0)
    delta_t: float = Field(default=3.0, gt=0)


class OptimizerSpec(_Strict):
    waypoints: int = Field(default=8, ge=3)
    max_iters: int = Field(default=200, ge=0)
    step: float = Field(default=2.0, gt=0)
    tol: float = Field(default=1e-9, ge=0)
    deviation_bound: float = Field(default=2.0, ge=0)


class PlannerSpec(_Strict):
    dt: float = Field(default=0.1, gt=0)
    lookahead_k: float = Field(default=4.0, gt=0)
    optimizer: OptimizerSpec = OptimizerSpec()


class MotionSpec(_Strict):
    """Illusion-of-motion setup: a stationary tip and either light sweeps or explicit waypoints."""

    stationary: list[float] | None = Field(default=None, min_length=3, max_length=3)
    sweeps_deg: list[float] | None = None
    sweep_time: float = Field(default=3.0, gt=0)
    hold_time: float = Field(default=3.0, ge=0)
    azimuth_deg: float = Field(default=0.0, ge=0, lt=360)
    desired: list[list[float]] | None = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.sweeps_deg is None) == (self.desired is None):
            raise ValueError("give exactly one of 'sweeps_deg' or 'desired'")
        if self.sweeps_deg is not None and any(not 0 <= s < 90 for s in self.sweeps_deg):
            raise ValueError("sweeps_deg entries must lie in [0, 90)")
        if self.desired is not None and any(len(row) != 4 for row in self.desired):
            raise ValueError("desired rows must be [t, x, y, h]")
        return self


class OutputSpec(_Strict):
    directory: str | None = None
    formats: list[Literal["csv", "svg"]] = ["csv", "svg"]


class ScenarioFile(_Strict):
    scene: SceneSpec
    observer: ObserverSpec = ObserverSpec()
    constraint: ConstraintSpec = ConstraintSpec()
    planner: PlannerSpec = PlannerSpec()
    motion: MotionSpec | None = None
    outputs: OutputSpec = OutputSpec()

    @model_validator(mode="after")
    def _labels(self):
        labels = set(self.scene.goals)
        if self.scene.intended is not None and self.scene.intended not in labels:
            raise ValueError(f"scene.intended {self.scene.intended!r} is not one of the goals")
        if self.observer.prior is not None and set(self.observer.prior) != labels:
            raise ValueError("observer.prior must give exactly one entry per goal label")
        return self

    # conversions to library types

    def to_scene(self) -> Scene:
        s = self.scene
        goals = {}
        for label, xyz in s.goals.items():
            h = xyz[2] if len(xyz) == 3 else s.table_height
            goals[label] = GripperPose(xyz[0], xyz[1], h)
        return Scene(GripperPose(*s.start), goals, s.table_height, s.duration, s.intended)

    def to_observer(self) -> ObserverModel:
        o = self.observer
        return ObserverModel(o.beta, o.prior, o.weighting, o.theta)

    def to_constraint(self) -> RateConstraint:
        return RateConstraint(self.constraint.epsilon, self.constraint.delta_t)

    def to_optimizer(self) -> OptimizerParams:
        o = self.planner.optimizer
        return OptimizerParams(
            waypoints=o.waypoints,
            max_iters=o.max_iters,
            step=o.step,
            tol=o.tol,
            max_deviation=o.deviation_bound,
            dt=self.planner.dt,
        )

    def stationary_pose(self) -> GripperPose:
        m = self.motion
        if m is not None and m.stationary is not None:
            return GripperPose(*m.stationary)
        return GripperPose(*self.scene.start)

    def motion_targets(self) -> dict[str, Trajectory]:
        """Desired (perceived) trajectories for the illusion of motion, keyed by name."""
        m = self.motion
        if m is None:
            raise ScenarioError("motion: section required for plan-motion")
        pose = self.stationary_pose()
        if m.desired is not None:
            rows = np.array(m.desired, dtype=float)
            return {"desired": Trajectory(rows[:, 0], rows[:, 1:])}
        return {
            f"sweep_{_tag(sweep)}": sweep_trajectory(
                pose, sweep, m.sweep_time, m.hold_time, m.azimuth_deg, self.planner.dt
            )
            for sweep in m.sweeps_deg
        }


def _tag(value: float) -> str:
    return f"{value:g}".replace(".", "p")


def format_errors(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{loc}: {e['msg']}")
    return "; ".join(lines)


def resolve_path(name: str | Path) -> Path:
    """A filesystem path, or the name of a bundled scenario."""
    path = Path(name)
    if path.exists():
        return path
    bundled = resources.files("shadowcast") / "scenarios" / path.name
    if bundled.is_file():
        return Path(str(bundled))
    raise ScenarioError(f"scenario file not found: {name}")


def parse_scenario(text: str, source: str = "<string>") -> ScenarioFile:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{source}: not valid YAML ({exc})") from exc
    if not isinstance(raw, dict):
        raise ScenarioError(f"{source}: expected a mapping at the top level")
    try:
        return ScenarioFile.model_validate(raw)
    except ValidationError as exc:
        raise ScenarioError(f"{source}: {format_errors(exc)}") from exc


def load_scenario(name: str | Path) -> ScenarioFile:
    path = resolve_path(name)
    return parse_scenario(path.read_text(), str(path))
