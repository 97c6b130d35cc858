"""Geometry primitives and the domain types shared by every module.

World frame convention: right-handed, Y up, +Z is the user's initial
forward direction, origin on the floor under the headset's start
position, all lengths in meters. With an identity headset rotation the
user's right-hand side is +X.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import MissingJoint, NoIntersection

# Joint names carried by a tracked hand. The mappings and gestures only
# ever read from this set; extra joints are allowed and passed through.
JOINT_NAMES = (
    "thumb_tip",
    "index_mcp",
    "index_pip",
    "index_tip",
    "middle_pip",
    "middle_tip",
    "ring_tip",
    "pinky_tip",
)

SIDES = ("left", "right")


@dataclass(frozen=True, slots=True)
class Vec3:
    """Immutable 3D vector (meters in the world frame)."""

    x: float
    y: float
    z: float

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> "Vec3":
        return Vec3(-self.x, -self.y, -self.z)

    def __mul__(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    __rmul__ = __mul__

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Vec3") -> "Vec3":
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def norm_sq(self) -> float:
        return self.dot(self)

    def distance(self, other: "Vec3") -> float:
        return (self - other).norm()

    def normalized(self) -> "Vec3":
        n = self.norm()
        if n < 1e-12:
            raise ValueError("cannot normalize a (near-)zero vector")
        return Vec3(self.x / n, self.y / n, self.z / n)

    def lerp(self, other: "Vec3", t: float) -> "Vec3":
        return Vec3(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
            self.z + (other.z - self.z) * t,
        )

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)

    def to_list(self) -> list[float]:
        return [self.x, self.y, self.z]

    @staticmethod
    def from_list(v) -> "Vec3":
        return Vec3(float(v[0]), float(v[1]), float(v[2]))

    @staticmethod
    def zero() -> "Vec3":
        return Vec3(0.0, 0.0, 0.0)


def any_perpendicular(v: Vec3) -> Vec3:
    """Deterministic unit vector orthogonal to v (v must be nonzero)."""
    if abs(v.x) <= abs(v.y) and abs(v.x) <= abs(v.z):
        base = Vec3(1.0, 0.0, 0.0)
    elif abs(v.y) <= abs(v.z):
        base = Vec3(0.0, 1.0, 0.0)
    else:
        base = Vec3(0.0, 0.0, 1.0)
    return v.cross(base).normalized()


@dataclass(frozen=True, slots=True)
class Rotation:
    """Unit quaternion (w, x, y, z).

    Serialization canonicalizes the double cover to w >= 0 so that
    equal rotations always produce identical bytes.
    """

    w: float
    x: float
    y: float
    z: float

    def norm(self) -> float:
        return math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)

    def normalized(self) -> "Rotation":
        n = self.norm()
        if n < 1e-12:
            raise ValueError("cannot normalize a (near-)zero quaternion")
        return Rotation(self.w / n, self.x / n, self.y / n, self.z / n)

    def canonical(self) -> "Rotation":
        """Same rotation with w >= 0 (flip the double cover if needed)."""
        if self.w < 0.0:
            return Rotation(-self.w, -self.x, -self.y, -self.z)
        return self

    def conjugate(self) -> "Rotation":
        return Rotation(self.w, -self.x, -self.y, -self.z)

    inverse = conjugate  # unit quaternions only

    def compose(self, other: "Rotation") -> "Rotation":
        """Rotation equal to applying `other` first, then self."""
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = other.w, other.x, other.y, other.z
        return Rotation(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    def apply(self, v: Vec3) -> Vec3:
        # q v q* with the usual two-cross shortcut
        u = Vec3(self.x, self.y, self.z)
        t = u.cross(v) * 2.0
        return v + t * self.w + u.cross(t)

    def right_axis(self) -> Vec3:
        return self.apply(Vec3(1.0, 0.0, 0.0))

    def up_axis(self) -> Vec3:
        return self.apply(Vec3(0.0, 1.0, 0.0))

    def forward_axis(self) -> Vec3:
        return self.apply(Vec3(0.0, 0.0, 1.0))

    def to_list(self) -> list[float]:
        return [self.w, self.x, self.y, self.z]

    @staticmethod
    def from_list(q) -> "Rotation":
        return Rotation(float(q[0]), float(q[1]), float(q[2]), float(q[3]))

    @staticmethod
    def identity() -> "Rotation":
        return Rotation(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def from_axis_angle(axis: Vec3, angle: float) -> "Rotation":
        a = axis.normalized()
        h = 0.5 * angle
        s = math.sin(h)
        return Rotation(math.cos(h), a.x * s, a.y * s, a.z * s)

    @staticmethod
    def from_two_vectors(v_from: Vec3, v_to: Vec3) -> "Rotation":
        """Shortest-arc rotation taking v_from to v_to."""
        a = v_from.normalized()
        b = v_to.normalized()
        d = a.dot(b)
        if d > 1.0 - 1e-12:
            return Rotation.identity()
        if d < -1.0 + 1e-12:
            # opposite vectors: 180 degrees about any perpendicular axis
            axis = any_perpendicular(a)
            return Rotation(0.0, axis.x, axis.y, axis.z)
        axis = a.cross(b)
        s = math.sqrt((1.0 + d) * 2.0)
        return Rotation(0.5 * s, axis.x / s, axis.y / s, axis.z / s).normalized()

    @staticmethod
    def from_basis(right: Vec3, up: Vec3, forward: Vec3) -> "Rotation":
        """Rotation whose column axes are (right, up, forward); inputs orthonormal."""
        m00, m01, m02 = right.x, up.x, forward.x
        m10, m11, m12 = right.y, up.y, forward.y
        m20, m21, m22 = right.z, up.z, forward.z
        tr = m00 + m11 + m22
        if tr > 0.0:
            s = math.sqrt(tr + 1.0) * 2.0
            return Rotation(0.25 * s, (m21 - m12) / s, (m02 - m20) / s, (m10 - m01) / s).normalized()
        if m00 > m11 and m00 > m22:
            s = math.sqrt(1.0 + m00 - m11 - m22) * 2.0
            return Rotation((m21 - m12) / s, 0.25 * s, (m01 + m10) / s, (m02 + m20) / s).normalized()
        if m11 > m22:
            s = math.sqrt(1.0 + m11 - m00 - m22) * 2.0
            return Rotation((m02 - m20) / s, (m01 + m10) / s, 0.25 * s, (m12 + m21) / s).normalized()
        s = math.sqrt(1.0 + m22 - m00 - m11) * 2.0
        return Rotation((m10 - m01) / s, (m02 + m20) / s, (m12 + m21) / s, 0.25 * s).normalized()

    def slerp(self, other: "Rotation", t: float) -> "Rotation":
        d = self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
        q2 = other
        if d < 0.0:
            d = -d
            q2 = Rotation(-other.w, -other.x, -other.y, -other.z)
        if d > 1.0 - 1e-10:
            return Rotation(
                self.w + (q2.w - self.w) * t,
                self.x + (q2.x - self.x) * t,
                self.y + (q2.y - self.y) * t,
                self.z + (q2.z - self.z) * t,
            ).normalized()
        theta = math.acos(min(1.0, d))
        sa = math.sin(theta)
        w1 = math.sin((1.0 - t) * theta) / sa
        w2 = math.sin(t * theta) / sa
        return Rotation(
            self.w * w1 + q2.w * w2,
            self.x * w1 + q2.x * w2,
            self.y * w1 + q2.y * w2,
            self.z * w1 + q2.z * w2,
        ).normalized()


def twist_about(q: Rotation, axis: Vec3) -> Rotation:
    """Twist component of q about a unit axis (swing-twist split, q = swing * twist)."""
    a = axis.normalized()
    proj = Vec3(q.x, q.y, q.z).dot(a)
    tw = Rotation(q.w, a.x * proj, a.y * proj, a.z * proj)
    if tw.norm() < 1e-12:
        # pure 180-degree swing: twist is ambiguous, take identity
        return Rotation.identity()
    return tw.normalized()


@dataclass(frozen=True, slots=True)
class Pose:
    """Rigid transform: rotate then translate."""

    position: Vec3
    rotation: Rotation

    def compose(self, other: "Pose") -> "Pose":
        return Pose(
            self.position + self.rotation.apply(other.position),
            self.rotation.compose(other.rotation),
        )

    def inverse(self) -> "Pose":
        inv_rot = self.rotation.conjugate()
        return Pose(inv_rot.apply(-self.position), inv_rot)

    def transform_point(self, p: Vec3) -> Vec3:
        return self.position + self.rotation.apply(p)

    @staticmethod
    def identity() -> "Pose":
        return Pose(Vec3.zero(), Rotation.identity())


@dataclass(frozen=True, slots=True)
class HandTrack:
    """One hand inside a frame: wrist pose plus named joint positions."""

    wrist: Pose
    joints: dict[str, Vec3]

    def joint(self, name: str, side: str = "") -> Vec3:
        try:
            return self.joints[name]
        except KeyError:
            raise MissingJoint(name, side) from None


@dataclass(frozen=True, slots=True)
class HandFrame:
    """One timestamped tracking sample: headset pose and one or both hands."""

    t: float
    hmd: Pose
    hands: dict[str, HandTrack]
    extra: dict = field(default_factory=dict)

    def hand(self, side: str) -> HandTrack:
        try:
            return self.hands[side]
        except KeyError:
            raise MissingJoint("wrist", side) from None


@dataclass(frozen=True, slots=True)
class BodyCalibration:
    """User dimensions plus the fixed anthropometric offsets.

    arm_length is shoulder-to-wrist; the vertical drops hang the modeled
    shoulder/chest/elbow below the headset for a seated posture.
    """

    arm_length: float = 0.60
    index_finger_length: float = 0.095
    arm_span: float = 1.70
    shoulder_drop: float = 0.20
    chest_drop: float = 0.37
    elbow_drop: float = 0.335
    shoulder_half_width: float = 0.18

    def validate(self) -> None:
        for name in (
            "arm_length",
            "index_finger_length",
            "arm_span",
            "shoulder_drop",
            "chest_drop",
            "elbow_drop",
            "shoulder_half_width",
        ):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.index_finger_length >= self.arm_length:
            raise ValueError("index_finger_length must be smaller than arm_length")


@dataclass(frozen=True, slots=True)
class ArmPose:
    """Output skeleton for one side: two-bone arm, hand orientation, fingers."""

    side: str
    shoulder: Vec3
    elbow: Vec3
    wrist: Vec3
    hand_rotation: Rotation
    virtual_finger_joints: dict[str, Vec3]


def ray_sphere_intersect(origin: Vec3, direction: Vec3, center: Vec3, radius: float) -> Vec3:
    """First intersection of the forward ray with the sphere surface.

    The returned point p satisfies |p - center| == radius (to 1e-9) and
    lies at parameter t >= 0 along the ray. An origin inside the sphere
    always hits; an origin on the surface pointing outward returns the
    origin itself (t = 0). Raises NoIntersection when the forward ray
    misses entirely.
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    d = direction.normalized()
    oc = origin - center
    # |oc + t d|^2 = r^2 with unit d: t^2 + 2 t (d.oc) + (|oc|^2 - r^2) = 0
    b = d.dot(oc)
    c = oc.norm_sq() - radius * radius
    disc = b * b - c
    if disc < 0.0:
        raise NoIntersection("ray misses the sphere")
    sq = math.sqrt(disc)
    t0 = -b - sq
    t1 = -b + sq
    if t1 < 0.0:
        raise NoIntersection("sphere is behind the ray origin")
    t = t0 if t0 >= 0.0 else max(t1, 0.0)
    hit = origin + d * t
    # re-project to kill accumulated rounding; keeps |hit - center| == radius
    return center + (hit - center).normalized() * radius


def project_onto_plane(v: Vec3, normal: Vec3) -> Vec3:
    """Component of v orthogonal to the unit plane normal."""
    return v - normal * v.dot(normal)
