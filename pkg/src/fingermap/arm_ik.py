"""Analytic two-bone inverse kinematics for the virtual arm.

Given the shoulder and a wrist target, places the elbow with the law of
cosines inside the plane spanned by the shoulder-to-target axis and a
pole direction. Targets outside the reachable annulus are clamped, and
a minimum elbow bend angle keeps the arm out of hyper-flexed poses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import Vec3, any_perpendicular, project_onto_plane
from .errors import DegenerateTarget

DEFAULT_MIN_ELBOW_DEG = 5.0
DEFAULT_MAX_ELBOW_DEG = 180.0


@dataclass(frozen=True, slots=True)
class IkConfig:
    """Bone lengths, elbow plane hint, and bend-angle limits (degrees).

    The pole defaults to straight down; the mapping layer overrides it
    each frame with a down-and-outward direction in the headset frame.
    """

    upper_len: float = 0.30
    lower_len: float = 0.30
    pole_direction: Vec3 = Vec3(0.0, -1.0, 0.0)
    min_elbow_deg: float = DEFAULT_MIN_ELBOW_DEG
    max_elbow_deg: float = DEFAULT_MAX_ELBOW_DEG

    def validate(self) -> None:
        if self.upper_len <= 0.0 or self.lower_len <= 0.0:
            raise ValueError("bone lengths must be positive")
        if not 0.0 < self.min_elbow_deg < self.max_elbow_deg <= 180.0:
            raise ValueError("need 0 < min_elbow_deg < max_elbow_deg <= 180")

    def reach_bounds(self) -> tuple[float, float]:
        """Shoulder-to-wrist distance range [c_min, c_max] the arm can realize."""
        u, l = self.upper_len, self.lower_len
        c_min = _chord(u, l, math.radians(self.min_elbow_deg))
        if self.max_elbow_deg >= 180.0 - 1e-12:
            c_max = u + l
        else:
            c_max = _chord(u, l, math.radians(self.max_elbow_deg))
        return c_min, c_max


def _chord(u: float, l: float, elbow_angle: float) -> float:
    # side opposite the elbow vertex for the given interior bend angle
    return math.sqrt(max(u * u + l * l - 2.0 * u * l * math.cos(elbow_angle), 0.0))


def clamp_target(shoulder: Vec3, target: Vec3, cfg: IkConfig) -> Vec3:
    """Target pulled onto the reachable annulus along the shoulder-target ray."""
    offset = target - shoulder
    c = offset.norm()
    if c < 1e-9:
        raise DegenerateTarget("wrist target coincides with the shoulder")
    c_min, c_max = cfg.reach_bounds()
    if c_min <= c <= c_max:
        return target
    return shoulder + offset * (min(max(c, c_min), c_max) / c)


def solve_two_bone(
    shoulder: Vec3,
    target: Vec3,
    cfg: IkConfig,
    plane_hint: Vec3 | None = None,
) -> Vec3:
    """Elbow position for the (annulus-clamped) wrist target.

    plane_hint is a fallback in-plane direction used when the pole is
    parallel to the shoulder-target axis; callers that solve frame
    sequences pass the previous frame's bend direction to avoid pops at
    the singularity.
    """
    clamped = clamp_target(shoulder, target, cfg)
    offset = clamped - shoulder
    c = offset.norm()
    axis = offset * (1.0 / c)

    bend = project_onto_plane(cfg.pole_direction, axis)
    if bend.norm() < 1e-9 and plane_hint is not None:
        bend = project_onto_plane(plane_hint, axis)
    if bend.norm() < 1e-9:
        bend = any_perpendicular(axis)
    bend = bend.normalized()

    u, l = cfg.upper_len, cfg.lower_len
    proj = (u * u - l * l + c * c) / (2.0 * c)
    h = math.sqrt(max(u * u - proj * proj, 0.0))
    return shoulder + axis * proj + bend * h


def bend_direction(shoulder: Vec3, elbow: Vec3, wrist: Vec3) -> Vec3 | None:
    """In-plane unit direction of the elbow bend, or None for a straight arm.

    Feed this back as plane_hint on the next frame to keep the elbow
    plane steady through the pole singularity.
    """
    axis = wrist - shoulder
    if axis.norm() < 1e-9:
        return None
    off = project_onto_plane(elbow - shoulder, axis.normalized())
    if off.norm() < 1e-9:
        return None
    return off.normalized()
