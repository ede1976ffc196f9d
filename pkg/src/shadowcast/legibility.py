"""Goal inference by a Boltzmann-rational observer and legible-trajectory optimization.

The observer scores each goal G after watching the robot go from the start S
to its current position Q along a path of length C:

    P(G | S -> Q)  ∝  prior(G) * exp(-beta * (C + |Q - G|)) / exp(-beta * |S - G|)

Legibility is the time-weighted average of the intended goal's posterior
over every prefix of the trajectory, weighted by f(t) (default ``T - t``, which
favours the early part of the motion).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import kernels
from .trajectory import Scene, Trajectory, interpolate, straight_line

log = logging.getLogger(__name__)

Weighting = str | Callable[[np.ndarray, float], np.ndarray]

WEIGHTINGS = ("linear", "uniform")


@dataclass(frozen=True)
class ObserverModel:
    """Parameters of the simulated observer.

    Attributes
    ----------
    temperature_beta : float
        Rationality (inverse temperature) in 1/cm.
    prior : mapping of goal label to probability, optional
        Uniform over the scene's goals when omitted.
    weighting : {"linear", "uniform"} or callable
        Time weighting f. A callable receives the elapsed times ``u`` (array)
        and the total duration ``T``.
    commit_threshold_theta : float
        Posterior level at which the observer commits to a goal.
    """

    temperature_beta: float = 1.0
    prior: Mapping[str, float] | None = None
    weighting: Weighting = "linear"
    commit_threshold_theta: float = 0.8

    def __post_init__(self):
        if not (math.isfinite(self.temperature_beta) and self.temperature_beta > 0):
            raise ValueError(f"beta must be finite and > 0, got {self.temperature_beta}")
        if not 0.5 < self.commit_threshold_theta <= 1.0:
            raise ValueError(f"theta must lie in (0.5, 1], got {self.commit_threshold_theta}")
        if isinstance(self.weighting, str) and self.weighting not in WEIGHTINGS:
            raise ValueError(f"unknown weighting {self.weighting!r}; choose from {WEIGHTINGS}")
        if self.prior is not None:
            prior = dict(self.prior)
            if any(not (math.isfinite(p) and p >= 0) for p in prior.values()):
                raise ValueError("prior entries must be finite and >= 0")
            if abs(sum(prior.values()) - 1.0) > 1e-9:
                raise ValueError(f"prior must sum to 1, sums to {sum(prior.values())!r}")
            object.__setattr__(self, "prior", prior)

    def log_prior(self, labels) -> np.ndarray:
        if self.prior is None:
            return np.full(len(labels), -math.log(len(labels)))
        if set(self.prior) != set(labels):
            raise ValueError(f"prior labels {sorted(self.prior)} do not match goals {sorted(labels)}")
        with np.errstate(divide="ignore"):
            return np.log(np.array([self.prior[k] for k in labels], dtype=float))

    def weights(self, times: np.ndarray) -> np.ndarray:
        u = times - times[0]
        total = float(u[-1])
        if callable(self.weighting):
            return np.asarray(self.weighting(u, total), dtype=float)
        if self.weighting == "uniform":
            return np.ones_like(u)
        return total - u


@dataclass(frozen=True, order=True)
class LegibilityScore:
    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"legibility score must lie in [0, 1], got {self.value}")

    def __float__(self) -> float:
        return self.value


def _trapezoid(y: np.ndarray, t: np.ndarray) -> float:
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(t)))


def posterior_matrix(points: np.ndarray, scene: Scene, observer: ObserverModel) -> np.ndarray:
    """Posterior after every prefix of ``points``; rows follow the samples, columns ``scene.labels``."""
    if points.shape[0] < 1:
        raise ValueError("need at least one observed sample")
    return kernels.prefix_posteriors(
        np.ascontiguousarray(points, dtype=float),
        scene.start.as_array(),
        scene.goal_array(),
        observer.log_prior(scene.labels),
        float(observer.temperature_beta),
    )


def goal_posterior(partial: Trajectory | np.ndarray, scene: Scene, observer: ObserverModel) -> dict[str, float]:
    """Posterior over the scene's goals after watching ``partial`` (a trajectory or (n, 3) points)."""
    points = partial.points if isinstance(partial, Trajectory) else np.atleast_2d(partial)
    row = posterior_matrix(points, scene, observer)[-1]
    return dict(zip(scene.labels, (float(p) for p in row)))


def _weighted_score(times, points, goal_index, scene, observer) -> float:
    p = posterior_matrix(points, scene, observer)[:, goal_index]
    w = observer.weights(times)
    value = _trapezoid(p * w, times) / _trapezoid(w, times)
    return min(max(value, 0.0), 1.0)


def legibility_score(
    traj: Trajectory, intended_goal: str, scene: Scene, observer: ObserverModel
) -> LegibilityScore:
    if intended_goal not in scene.goals:
        raise KeyError(f"unknown goal {intended_goal!r}")
    if np.linalg.norm(traj.points[0] - scene.start.as_array()) > 1e-6:
        raise ValueError("trajectory does not start at the scene start")
    idx = scene.labels.index(intended_goal)
    return LegibilityScore(_weighted_score(traj.times, traj.points, idx, scene, observer))


@dataclass(frozen=True)
class OptimizerParams:
    """Settings for :func:`optimize_legible`; lengths in cm, times in s."""

    waypoints: int = 8
    max_iters: int = 200
    step: float = 2.0
    tol: float = 1e-9
    max_deviation: float = 2.0
    dt: float = 0.1
    fd_step: float = 1e-4

    def __post_init__(self):
        if self.waypoints < 3:
            raise ValueError(f"need at least 3 interior waypoints, got {self.waypoints}")
        if self.max_iters < 0 or self.step <= 0 or self.tol < 0 or self.dt <= 0:
            raise ValueError("max_iters, step, tol and dt must be non-negative (step, dt > 0)")
        if self.max_deviation < 0 or self.fd_step <= 0:
            raise ValueError("max_deviation must be >= 0 and fd_step > 0")


@dataclass(frozen=True, eq=False)
class LegibleResult:
    trajectory: Trajectory
    score: float
    baseline_score: float
    converged: bool
    iterations: int
    waypoints: np.ndarray
    history: tuple[float, ...] = field(default=())


def _perpendicular_basis(direction: np.ndarray) -> np.ndarray:
    """Two unit vectors orthogonal to ``direction``; the first is horizontal when possible."""
    d = direction / np.linalg.norm(direction)
    lateral = np.array([-d[1], d[0], 0.0])
    if np.linalg.norm(lateral) < 1e-12:
        lateral = np.array([1.0, 0.0, 0.0])
    lateral /= np.linalg.norm(lateral)
    other = np.cross(d, lateral)
    return np.vstack([lateral, other / np.linalg.norm(other)])


def _clip_offsets(offsets: np.ndarray, radius: float) -> np.ndarray:
    norm = np.linalg.norm(offsets, axis=1)
    scale = np.where(norm > radius, radius / np.where(norm > 0, norm, 1.0), 1.0)
    return offsets * scale[:, None]


def _tangent_gradient(grad: np.ndarray, offsets: np.ndarray, radius: float) -> np.ndarray:
    """Drop the outward component of the gradient at waypoints sitting on the deviation bound."""
    norm = np.linalg.norm(offsets, axis=1)
    on_bound = norm >= radius * (1 - 1e-12)
    if radius == 0.0:
        return np.zeros_like(grad)
    radial = offsets / np.where(norm > 0, norm, 1.0)[:, None]
    outward = np.einsum("ij,ij->i", grad, radial)
    drop = on_bound & (outward > 0)
    return grad - np.where(drop, outward, 0.0)[:, None] * radial


def optimize_legible(
    scene: Scene,
    intended_goal: str,
    observer: ObserverModel,
    params: OptimizerParams | None = None,
) -> LegibleResult:
    """Gradient ascent on legibility over interior waypoints, endpoints fixed.

    The path is the polyline start -> waypoints -> goal sampled every
    ``params.dt``. Waypoint i sits at fraction i/(n+1) of the straight path
    plus an offset in the plane perpendicular to it, and is reached at time
    i/(n+1) of ``scene.duration``. Fixing the waypoint times keeps a detour in
    one part of the path from speeding up the rest. Gradients
    are central finite differences; each step moves the offsets a distance
    ``step`` along the normalized gradient, halving the step until the score
    improves. Offsets are kept within ``max_deviation``. Runs are deterministic.
    """
    params = params or OptimizerParams()
    if intended_goal not in scene.goals:
        raise KeyError(f"unknown goal {intended_goal!r}")
    idx = scene.labels.index(intended_goal)
    start = scene.start.as_array()
    goal = scene.goals[intended_goal].as_array()
    baseline = straight_line(scene.start, scene.goals[intended_goal], scene.duration, params.dt)
    times = baseline.times
    knot_times = np.linspace(0.0, scene.duration, params.waypoints + 2)

    s_frac = np.arange(1, params.waypoints + 1) / (params.waypoints + 1)
    anchors = (1.0 - s_frac)[:, None] * start + s_frac[:, None] * goal
    basis = _perpendicular_basis(goal - start)

    def knots_of(offsets: np.ndarray) -> np.ndarray:
        interior = anchors + offsets @ basis
        interior[:, 2] = np.maximum(interior[:, 2], 0.0)
        return np.vstack([start, interior, goal])

    def sample(offsets: np.ndarray) -> np.ndarray:
        return interpolate(knot_times, knots_of(offsets), times)

    weights = np.ascontiguousarray(observer.weights(times), dtype=float)
    goal_arr = scene.goal_array()
    log_prior = observer.log_prior(scene.labels)

    def score(offsets: np.ndarray) -> float:
        value = kernels.knot_legibility(
            knot_times, knots_of(offsets), times, weights, start, goal_arr, log_prior,
            float(observer.temperature_beta), idx,
        )
        return min(max(value, 0.0), 1.0)

    offsets = np.zeros((params.waypoints, 2))
    base_score = _weighted_score(times, baseline.points, idx, scene, observer)
    current = base_score
    history = [current]
    step = params.step
    converged = False
    accepted = 0
    it = 0
    for it in range(1, params.max_iters + 1):
        grad = np.zeros_like(offsets)
        for i in range(offsets.shape[0]):
            for j in range(2):
                plus = offsets.copy()
                minus = offsets.copy()
                plus[i, j] += params.fd_step
                minus[i, j] -= params.fd_step
                grad[i, j] = (score(plus) - score(minus)) / (2 * params.fd_step)
        grad = _tangent_gradient(grad, offsets, params.max_deviation)
        norm = float(np.linalg.norm(grad))
        if norm < 1e-12:
            converged = True
            break
        direction = grad / norm
        improved = False
        while step >= 1e-6:
            candidate = _clip_offsets(offsets + step * direction, params.max_deviation)
            value = score(candidate)
            if value > current:
                improved = True
                break
            step /= 2
        if not improved:
            converged = True
            break
        gain = value - current
        offsets, current = candidate, value
        history.append(current)
        accepted += 1
        step = min(step * 2, params.step)
        if gain < params.tol:
            converged = True
            break
    else:
        log.warning("legibility optimizer stopped after %d iterations without converging", params.max_iters)

    knots = knots_of(offsets)
    traj = baseline if accepted == 0 else Trajectory(times, sample(offsets))
    return LegibleResult(
        trajectory=traj,
        score=current,
        baseline_score=base_score,
        converged=converged,
        iterations=it,
        waypoints=knots,
        history=tuple(history),
    )
