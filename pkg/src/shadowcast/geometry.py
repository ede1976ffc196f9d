"""Shadow projection of a gripper tip under a directional light, and its inverse.

Angles are in degrees throughout. Elevation is measured from the ground plane,
so an elevation of 90 degrees is an overhead light casting the shadow directly
below the tip. The shadow is displaced from the tip's ground projection along
the azimuth direction ``(cos phi, sin phi)`` by ``h / tan(elevation)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class InfeasibleLightError(ValueError):
    """No light direction can place the shadow where requested."""


def _check_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class GroundPoint:
    """A point on the ground (table) plane, in cm."""

    x: float
    y: float

    def __post_init__(self):
        _check_finite(x=self.x, y=self.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


@dataclass(frozen=True)
class GripperPose:
    """Gripper tip position: lateral ``x``, depth ``y`` and height ``h`` above the ground, in cm."""

    x: float
    y: float
    h: float

    def __post_init__(self):
        _check_finite(x=self.x, y=self.y, h=self.h)
        if self.h < 0:
            raise ValueError(f"gripper height must be >= 0, got {self.h}")

    @classmethod
    def from_array(cls, arr) -> GripperPose:
        x, y, h = (float(v) for v in arr)
        return cls(x, y, h)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.h], dtype=float)

    @property
    def ground(self) -> GroundPoint:
        return GroundPoint(self.x, self.y)


@dataclass(frozen=True)
class LightDirection:
    """Directional light given by elevation above the ground and azimuth, in degrees."""

    elevation_alpha: float
    azimuth_phi: float = 0.0

    def __post_init__(self):
        _check_finite(elevation_alpha=self.elevation_alpha, azimuth_phi=self.azimuth_phi)
        if not 0.0 < self.elevation_alpha <= 90.0:
            raise ValueError(f"elevation must lie in (0, 90], got {self.elevation_alpha}")
        if not 0.0 <= self.azimuth_phi < 360.0:
            raise ValueError(f"azimuth must lie in [0, 360), got {self.azimuth_phi}")

    def unit_vector(self) -> np.ndarray:
        return light_vector(self.elevation_alpha, self.azimuth_phi)

    @classmethod
    def from_vector(cls, v, fallback_phi: float = 0.0) -> LightDirection:
        """Inverse of :meth:`unit_vector`; the azimuth of a vertical vector is ``fallback_phi``."""
        x, y, z = (float(c) for c in v)
        horiz = math.hypot(x, y)
        alpha = math.degrees(math.atan2(z, horiz))
        if horiz == 0.0 or alpha >= 90.0:
            return cls(90.0, fallback_phi)
        if alpha <= 0.0:
            raise InfeasibleLightError("light direction at or below the horizon")
        return cls(alpha, normalize_azimuth(math.degrees(math.atan2(y, x))))


OVERHEAD = LightDirection(90.0, 0.0)


def normalize_azimuth(phi: float) -> float:
    phi = phi % 360.0
    # -tiny % 360 rounds to 360.0
    if phi >= 360.0:
        phi -= 360.0
    return phi


def light_vector(alpha_deg: float, phi_deg: float) -> np.ndarray:
    a = math.radians(alpha_deg)
    p = math.radians(phi_deg)
    return np.array([math.cos(a) * math.cos(p), math.cos(a) * math.sin(p), math.sin(a)])


def shadow_offset(h: float, alpha_deg: float) -> float:
    """Horizontal distance between the tip's ground projection and its shadow."""
    if alpha_deg == 90.0:
        return 0.0
    return h / math.tan(math.radians(alpha_deg))


def project_shadow(pose: GripperPose, light: LightDirection) -> GroundPoint:
    """Ground position of the shadow cast by ``pose`` under ``light``.

    >>> project_shadow(GripperPose(0, 0, 10), LightDirection(45, 0))
    GroundPoint(x=10.000000000000002, y=0.0)
    """
    r = shadow_offset(pose.h, light.elevation_alpha)
    if r == 0.0:
        return GroundPoint(pose.x, pose.y)
    p = math.radians(light.azimuth_phi)
    return GroundPoint(pose.x + r * math.cos(p), pose.y + r * math.sin(p))


def solve_light(
    pose: GripperPose, desired_shadow: GroundPoint, previous: LightDirection = OVERHEAD
) -> LightDirection:
    """Light direction under which ``pose`` casts its shadow at ``desired_shadow``.

    When the desired shadow sits directly below the tip the light is overhead
    and the azimuth of ``previous`` is kept, so a schedule does not jump in
    azimuth at the degenerate point.

    Raises
    ------
    InfeasibleLightError
        The tip rests on the ground (``h == 0``) but the shadow is requested
        elsewhere, or the requested offset is too large to represent.
    """
    dx = desired_shadow.x - pose.x
    dy = desired_shadow.y - pose.y
    r = math.hypot(dx, dy)
    if r == 0.0:
        return LightDirection(90.0, previous.azimuth_phi)
    if pose.h == 0.0:
        raise InfeasibleLightError(
            f"tip at ({pose.x}, {pose.y}) lies on the ground and cannot cast a shadow "
            f"{r:.6g} cm away"
        )
    alpha = math.degrees(math.atan2(pose.h, r))
    if alpha <= 0.0:
        raise InfeasibleLightError(f"shadow offset {r:.6g} cm needs a light at the horizon")
    return LightDirection(alpha, normalize_azimuth(math.degrees(math.atan2(dy, dx))))


def vector_angle(u, v) -> float:
    """Angle between two 3-vectors in degrees, accurate near 0 and 180."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    cross = np.linalg.norm(np.cross(u, v))
    return math.degrees(math.atan2(cross, float(np.dot(u, v))))


def angular_distance(a: LightDirection, b: LightDirection) -> float:
    """Great-circle angle between two light directions, in degrees."""
    if a == b:
        return 0.0
    return vector_angle(a.unit_vector(), b.unit_vector())
