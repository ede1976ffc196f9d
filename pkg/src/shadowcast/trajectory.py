"""Time-stamped gripper and shadow trajectories.

Trajectories are piecewise linear between samples. Positions are in cm and
times in seconds. Both classes keep their samples as read-only numpy arrays;
``samples`` gives the ``(t, pose)`` view.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from . import kernels
from .geometry import GripperPose, GroundPoint


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.flags.writeable = False
    return out


def _check_times(times: np.ndarray) -> None:
    if times.ndim != 1 or times.size < 2:
        raise ValueError("a trajectory needs at least 2 samples")
    if not np.all(np.isfinite(times)):
        raise ValueError("timestamps must be finite")
    if np.any(np.diff(times) <= 0):
        raise ValueError("timestamps must be strictly increasing")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Gripper tip trajectory: ``times`` with shape (n,), ``points`` with shape (n, 3)."""

    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        times = _frozen(self.times)
        points = _frozen(self.points)
        _check_times(times)
        if points.shape != (times.size, 3):
            raise ValueError(f"points must have shape ({times.size}, 3), got {points.shape}")
        if not np.all(np.isfinite(points)):
            raise ValueError("poses must be finite")
        if np.any(points[:, 2] < 0):
            raise ValueError("gripper height must be >= 0")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "points", points)

    @classmethod
    def from_samples(cls, samples: Iterable[tuple[float, GripperPose]]) -> Trajectory:
        samples = list(samples)
        return cls(
            np.array([t for t, _ in samples], dtype=float),
            np.array([p.as_array() for _, p in samples], dtype=float).reshape(-1, 3),
        )

    @property
    def samples(self) -> list[tuple[float, GripperPose]]:
        return [(float(t), GripperPose.from_array(p)) for t, p in zip(self.times, self.points)]

    def __len__(self) -> int:
        return self.times.size

    @property
    def start_time(self) -> float:
        return float(self.times[0])

    @property
    def end_time(self) -> float:
        return float(self.times[-1])

    @property
    def duration(self) -> float:
        return self.end_time - self.start_time

    def pose(self, i: int) -> GripperPose:
        return GripperPose.from_array(self.points[i])

    def at(self, t) -> np.ndarray:
        """Interpolated position(s) at time(s) ``t``, clamped to the time domain."""
        return interpolate(self.times, self.points, t)

    def ground_track(self) -> ShadowTrajectory:
        """Overhead-light shadow: the ground projection of every sample."""
        return ShadowTrajectory(self.times, self.points[:, :2])


@dataclass(frozen=True, eq=False)
class ShadowTrajectory:
    """Shadow trajectory on the ground plane: ``times`` (n,), ``points`` (n, 2)."""

    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        times = _frozen(self.times)
        points = _frozen(self.points)
        _check_times(times)
        if points.shape != (times.size, 2):
            raise ValueError(f"points must have shape ({times.size}, 2), got {points.shape}")
        if not np.all(np.isfinite(points)):
            raise ValueError("shadow positions must be finite")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "points", points)

    @classmethod
    def from_samples(cls, samples: Iterable[tuple[float, GroundPoint]]) -> ShadowTrajectory:
        samples = list(samples)
        return cls(
            np.array([t for t, _ in samples], dtype=float),
            np.array([p.as_array() for _, p in samples], dtype=float).reshape(-1, 2),
        )

    @property
    def samples(self) -> list[tuple[float, GroundPoint]]:
        return [(float(t), GroundPoint(float(x), float(y))) for t, (x, y) in zip(self.times, self.points)]

    def __len__(self) -> int:
        return self.times.size

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    def at(self, t) -> np.ndarray:
        return interpolate(self.times, self.points, t)

    def lift(self) -> Trajectory:
        """The shadow as a trajectory lying on the ground plane (height 0)."""
        pts = np.column_stack([self.points, np.zeros(len(self))])
        return Trajectory(self.times, pts)


@dataclass(frozen=True)
class Scene:
    """Start pose, labelled goals and nominal task duration.

    ``table_height`` is the height above the shadow plane at which the goal
    objects are grasped; scenario files use it for goals given without a
    height.
    """

    start: GripperPose
    goals: Mapping[str, GripperPose]
    table_height: float = 0.0
    duration: float = 10.0
    intended: str | None = None
    _labels: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        goals = dict(self.goals)
        if not goals:
            raise ValueError("a scene needs at least one goal")
        if self.duration <= 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")
        for label, g in goals.items():
            if g == self.start:
                raise ValueError(f"goal {label!r} coincides with the start pose")
        if self.intended is not None and self.intended not in goals:
            raise ValueError(f"intended goal {self.intended!r} is not a scene goal")
        object.__setattr__(self, "goals", goals)
        object.__setattr__(self, "_labels", tuple(goals))

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @property
    def target(self) -> str:
        return self.intended if self.intended is not None else self._labels[0]

    def goal_array(self) -> np.ndarray:
        return np.array([g.as_array() for g in self.goals.values()], dtype=float)

    def on_ground(self, start: GripperPose | None = None) -> Scene:
        """The scene as seen in the shadow plane: every pose dropped to height 0."""
        s = start if start is not None else self.start
        return Scene(
            start=GripperPose(s.x, s.y, 0.0),
            goals={k: GripperPose(g.x, g.y, 0.0) for k, g in self.goals.items()},
            table_height=0.0,
            duration=self.duration,
            intended=self.intended,
        )


def interpolate(times: np.ndarray, points: np.ndarray, t) -> np.ndarray:
    """Piecewise-linear interpolation of ``points`` (n, d) at ``t``; clamps outside the domain."""
    t_arr = np.asarray(t, dtype=float)
    flat = np.atleast_1d(t_arr)
    out = np.column_stack([np.interp(flat, times, points[:, j]) for j in range(points.shape[1])])
    return out[0] if t_arr.ndim == 0 else out


def time_grid(t0: float, t1: float, dt: float) -> np.ndarray:
    """``t0, t0 + dt, ...`` up to and always including ``t1``."""
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    span = t1 - t0
    n = int(np.floor(span / dt + 1e-9))
    grid = t0 + dt * np.arange(n + 1)
    # drop a grid point that would sit on top of the endpoint
    if span - dt * n <= 1e-9 * max(1.0, abs(span)):
        grid = grid[:-1]
    return np.append(grid, t1)


def resample(traj: Trajectory, dt: float) -> Trajectory:
    """Resample at a fixed step; the original endpoints are kept exactly."""
    grid = time_grid(traj.start_time, traj.end_time, dt)
    pts = traj.at(grid)
    pts[0] = traj.points[0]
    pts[-1] = traj.points[-1]
    return Trajectory(grid, pts)


def straight_line(start: GripperPose, goal: GripperPose, duration: float, dt: float) -> Trajectory:
    """Constant-speed straight motion from ``start`` at t=0 to ``goal`` at ``duration``."""
    if start == goal:
        raise ValueError("start and goal coincide")
    if not duration > 0:
        raise ValueError(f"duration must be > 0, got {duration}")
    grid = time_grid(0.0, duration, dt)
    s = (grid / duration)[:, None]
    pts = (1.0 - s) * start.as_array() + s * goal.as_array()
    return Trajectory(grid, pts)


def path_length(traj: Trajectory | ShadowTrajectory) -> float:
    return float(np.sum(np.linalg.norm(np.diff(traj.points, axis=0), axis=1)))


def deviation_cost(traj: Trajectory, reference: Trajectory) -> float:
    """Sum over ``traj``'s samples of the squared distance to the ``reference`` polyline, in cm^2.

    The reference is used as a geometric path only; its timing is ignored.
    """
    d2 = kernels.polyline_sqdist(
        np.ascontiguousarray(traj.points), np.ascontiguousarray(reference.points)
    )
    return float(np.sum(d2))


def lookahead(traj: Trajectory, k: float) -> Trajectory:
    """Shift forward in time by ``k``: the output at t is the input at ``min(t + k, t_end)``."""
    if not k > 0:
        raise ValueError(f"lookahead must be > 0, got {k}")
    if k >= traj.duration:
        raise ValueError(f"lookahead {k} must be shorter than the trajectory ({traj.duration} s)")
    shifted = np.minimum(traj.times + k, traj.end_time)
    return Trajectory(traj.times, traj.at(shifted))
