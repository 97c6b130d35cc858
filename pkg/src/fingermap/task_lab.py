"""Reaching-study geometry and synthetic motion generation.

Builds the two-layer target wall scaled by the user's arm span,
classifies target-pair distances into short/medium/long by quantiles,
draws balanced seeded task sequences, and synthesizes hand-tracking
traces: plain minimum-jerk reaches plus technique-aware virtual users
that steer each mapping the way a person would, for desk-scale
comparisons between techniques.
"""

from __future__ import annotations

import math
import random
import statistics
from dataclasses import dataclass, field
from itertools import combinations

from .core import (
    BodyCalibration,
    HandFrame,
    HandTrack,
    Pose,
    Rotation,
    Vec3,
    project_onto_plane,
    ray_sphere_intersect,
)
from .errors import InfeasibleClass, NoIntersection
from .mapping import (
    TECH_ATTACH,
    TECH_DIRECT,
    TECH_HAND,
    TECH_RAY,
    MappingParams,
    estimate_anchors,
)

CLASS_SHORT = "short"
CLASS_MEDIUM = "medium"
CLASS_LONG = "long"
CLASSES = (CLASS_SHORT, CLASS_MEDIUM, CLASS_LONG)

# hand skeleton proportions used by the synthetic generator (meters)
PALM_LENGTH = 0.08
PROXIMAL_LEN = 0.045
DISTAL_LEN = 0.05
FINGER_LENGTH = PROXIMAL_LEN + DISTAL_LEN

_UP = Vec3(0.0, 1.0, 0.0)

DEFAULT_HMD = Pose(Vec3(0.0, 1.2, 0.0), Rotation.identity())


@dataclass(frozen=True, slots=True)
class Target:
    id: int
    position: Vec3
    radius: float = 0.03


@dataclass(frozen=True, slots=True)
class TargetLayout:
    """The target wall: two depth layers in front of the user, floor-referenced."""

    arm_span: float
    targets: tuple[Target, ...]

    def get(self, target_id: int) -> Target:
        return self.targets[target_id]

    def spheres(self) -> list[tuple[Vec3, float]]:
        return [(t.position, t.radius) for t in self.targets]


@dataclass(frozen=True, slots=True)
class TaskSpec:
    """One reach: touch start_id, then end_id."""

    start_id: int
    end_id: int
    distance_class: str


@dataclass(frozen=True, slots=True)
class DistanceClasses:
    q25: float
    q50: float
    classes: dict[tuple[int, int], str]


def generate_layout(
    arm_span: float, radius: float = 0.03, swap_layer_widths: bool = False
) -> TargetLayout:
    """18 targets on two layers, all dimensions fractions of arm span.

    Near layer at depth 0.22A holds 3 rows x 4 columns over a 0.76A
    width; far layer at 0.44A holds 3 rows x 2 columns over 0.25A.
    Rows sit at heights 0.4A/0.6A/0.8A; columns are centered on the
    midline. swap_layer_widths exchanges the two width spans for the
    alternative reading of the layer description.
    """
    if arm_span <= 0.0:
        raise ValueError("arm_span must be positive")
    a = arm_span
    near_width, far_width = (0.25 * a, 0.76 * a) if swap_layer_widths else (0.76 * a, 0.25 * a)
    # computed as fraction*A so e.g. A=1 gives heights 0.4/0.6/0.8 bit-exactly
    heights = (0.4 * a, 0.6 * a, 0.8 * a)

    targets: list[Target] = []
    for depth, width, cols in ((0.22 * a, near_width, 4), (0.44 * a, far_width, 2)):
        xs = [width * (c / (cols - 1) - 0.5) for c in range(cols)]
        for y in heights:
            for x in xs:
                targets.append(Target(id=len(targets), position=Vec3(x, y, depth), radius=radius))
    return TargetLayout(arm_span=arm_span, targets=tuple(targets))


def classify_distances(layout: TargetLayout) -> DistanceClasses:
    """Thresholds at the 25th/50th distance quantiles; class per unordered pair."""
    ids = [t.id for t in layout.targets]
    pairs = list(combinations(ids, 2))
    dists = {p: layout.get(p[0]).position.distance(layout.get(p[1]).position) for p in pairs}
    q25, q50, _ = statistics.quantiles(sorted(dists.values()), n=4, method="inclusive")
    classes = {
        p: (CLASS_SHORT if d <= q25 else CLASS_MEDIUM if d <= q50 else CLASS_LONG)
        for p, d in dists.items()
    }
    return DistanceClasses(q25=q25, q50=q50, classes=classes)


def make_task_sequence(layout: TargetLayout, n_tasks: int = 30, seed: int = 0) -> list[TaskSpec]:
    """Balanced, seeded task draw: n_tasks/3 per distance class, shuffled."""
    if n_tasks <= 0 or n_tasks % 3 != 0:
        raise ValueError("task count must be divisible by 3")
    classified = classify_distances(layout)
    pools: dict[str, list[tuple[int, int]]] = {c: [] for c in CLASSES}
    for pair in sorted(classified.classes):
        pools[classified.classes[pair]].append(pair)

    rng = random.Random(seed)
    quota = n_tasks // 3
    tasks: list[TaskSpec] = []
    for cls in CLASSES:
        pool = pools[cls]
        if not pool:
            raise InfeasibleClass(f"no target pairs in class {cls!r}")
        if len(pool) >= quota:
            chosen = rng.sample(pool, quota)
        else:
            chosen = [rng.choice(pool) for _ in range(quota)]
        for a, b in chosen:
            if rng.random() < 0.5:
                a, b = b, a
            tasks.append(TaskSpec(start_id=a, end_id=b, distance_class=cls))
    rng.shuffle(tasks)
    return tasks


def min_jerk(tau: float) -> float:
    """Smooth 0-to-1 motion profile with zero endpoint velocity/acceleration."""
    tau = min(max(tau, 0.0), 1.0)
    return tau * tau * tau * (10.0 - 15.0 * tau + 6.0 * tau * tau)


def make_hand(
    wrist: Vec3,
    *,
    aim: Rotation = Rotation.identity(),
    side: str = "right",
    curl: float = 0.0,
    grab: float = 0.0,
    thumb_close: float = 0.0,
) -> HandTrack:
    """Synthesize a geometrically consistent hand skeleton.

    aim orients the hand (identity points along +Z). curl in [0, 1]
    flexes the index finger so the fingertip-to-knuckle distance falls
    monotonically from the full finger length to near zero. grab pulls
    the middle/ring/pinky tips toward the wrist; thumb_close brings the
    thumb tip toward the middle knuckle. Segment lengths are fixed so
    the same calibration fits every generated frame.
    """
    fwd = aim.forward_axis()
    up = aim.up_axis()
    right = aim.right_axis()
    lat = 1.0 if side == "right" else -1.0

    def bend(phi: float) -> Vec3:
        return fwd * math.cos(phi) - up * math.sin(phi)

    mcp = wrist + fwd * PALM_LENGTH
    pip = mcp + bend(curl * (0.5 * math.pi)) * PROXIMAL_LEN
    tip = pip + bend(curl * (1.5 * math.pi)) * DISTAL_LEN

    middle_pip = wrist + fwd * 0.10 + right * (-lat * 0.012)
    thumb_dir = (right * (-lat) - up * 0.5).normalized()
    thumb_tip = middle_pip + thumb_dir * (0.05 - 0.04 * thumb_close)

    reachers = (("middle_tip", 0.18, 0.0), ("ring_tip", 0.17, 0.12), ("pinky_tip", 0.16, 0.24))
    shrink = 1.0 - 0.65 * grab
    joints: dict[str, Vec3] = {
        "index_mcp": mcp,
        "index_pip": pip,
        "index_tip": tip,
        "middle_pip": middle_pip,
        "thumb_tip": thumb_tip,
    }
    for name, dist, spread in reachers:
        direction = (fwd + right * (-lat * spread)).normalized()
        joints[name] = wrist + direction * (dist * shrink)
    return HandTrack(wrist=Pose(wrist, aim), joints=joints)


def curl_for_retraction(r: float) -> float:
    """Invert the synthetic hand's curl so tip-to-knuckle distance is r * L_f."""
    d = min(max(r, 0.0), 1.0) * FINGER_LENGTH
    a, b = PROXIMAL_LEN, DISTAL_LEN
    cos_gap = (d * d - a * a - b * b) / (2.0 * a * b)
    return math.acos(min(max(cos_gap, -1.0), 1.0)) / math.pi


@dataclass(frozen=True, slots=True)
class ReachSpec:
    """One straight synthetic reach of the wrist, minimum-jerk timed."""

    start: Vec3
    end: Vec3
    duration: float = 1.0
    rate: float = 90.0
    side: str = "right"
    hmd: Pose = DEFAULT_HMD
    aim: Rotation = field(default_factory=Rotation.identity)
    curl_start: float = 0.0
    curl_end: float = 0.0
    t0: float = 0.0

    def validate(self) -> None:
        if self.duration <= 0.0:
            raise ValueError("duration must be positive")
        if self.rate < 30.0:
            raise ValueError("rate must be at least 30 Hz")


def synth_reach(spec: ReachSpec) -> list[HandFrame]:
    """Sample the reach; endpoints are exact, interior follows the profile."""
    spec.validate()
    n = int(round(spec.duration * spec.rate)) + 1
    frames: list[HandFrame] = []
    for i in range(n):
        tau = i / (n - 1)
        s = min_jerk(tau)
        if i == 0:
            wrist = spec.start
        elif i == n - 1:
            wrist = spec.end
        else:
            wrist = spec.start.lerp(spec.end, s)
        curl = spec.curl_start + (spec.curl_end - spec.curl_start) * s
        hand = make_hand(wrist, aim=spec.aim, side=spec.side, curl=curl)
        frames.append(
            HandFrame(t=spec.t0 + tau * spec.duration, hmd=spec.hmd, hands={spec.side: hand})
        )
    return frames


# --- technique-aware synthetic users -------------------------------------
#
# Each user solves the inverse problem of its technique: given where the
# virtual pointer should be, place the physical hand the way a person
# driving that mapping would. The resulting frames are then run through
# the real forward pipeline; nothing below feeds the metrics directly.

_LOCAL_FWD = Vec3(0.0, 0.0, 1.0)
_FINGERTIP_OFFSET = PALM_LENGTH + FINGER_LENGTH


def _bend_local(phi: float) -> Vec3:
    # finger segment direction in hand-local coordinates at bend angle phi
    return Vec3(0.0, -math.sin(phi), math.cos(phi))


def _local_index_tip(curl: float) -> Vec3:
    """Index fingertip offset from the wrist in hand-local coordinates."""
    tip = _LOCAL_FWD * PALM_LENGTH
    tip = tip + _bend_local(curl * 0.5 * math.pi) * PROXIMAL_LEN
    return tip + _bend_local(curl * 1.5 * math.pi) * DISTAL_LEN


@dataclass(frozen=True, slots=True)
class _HandConfig:
    wrist: Vec3
    aim: Rotation
    curl: float


def _extension_radius_for(offset_needed: float, params: MappingParams) -> float:
    """Wrist-to-chest horizontal distance producing a given positive reach offset."""
    d, k = params.extension_deadzone, params.extension_gain
    if offset_needed <= 0.0:
        return max(d + offset_needed, 0.0)
    if k == 0.0:
        return d + offset_needed
    # invert offset = x + k x^2 with x = R - D
    x = (-1.0 + math.sqrt(1.0 + 4.0 * k * offset_needed)) / (2.0 * k)
    return d + x


def _extension_offset_at(radius: float, params: MappingParams) -> float:
    d, k = params.extension_deadzone, params.extension_gain
    if radius < d:
        return radius - d
    over = radius - d
    return radius + k * over * over - d


class _UserBase:
    def __init__(self, side: str, hmd: Pose, calib: BodyCalibration, params: MappingParams):
        self.side = side
        self.hmd = hmd
        self.calib = calib
        self.params = params
        self.anchors = estimate_anchors(hmd, calib, side)
        self.grab = 0.0
        self.thumb = 0.0

    def hand_for_pointer(self, pointer: Vec3) -> _HandConfig:
        raise NotImplementedError

    def frame(self, t: float, config: _HandConfig) -> HandFrame:
        hand = make_hand(
            config.wrist,
            aim=config.aim,
            side=self.side,
            curl=config.curl,
            grab=self.grab,
            thumb_close=self.thumb,
        )
        return HandFrame(t=t, hmd=self.hmd, hands={self.side: hand})


class _HandUser(_UserBase):
    """Raw passthrough: the fingertip must physically visit the pointer."""

    def hand_for_pointer(self, pointer: Vec3) -> _HandConfig:
        wrist = pointer - _LOCAL_FWD * _FINGERTIP_OFFSET
        return _HandConfig(wrist=wrist, aim=Rotation.identity(), curl=0.0)


class _RayUser(_UserBase):
    """Pointing: wrist parked at a home spot, straight finger aimed at the pointer.

    With zero curl the whole finger chain is collinear with the hand's
    forward axis, so aiming that axis from the wrist through the goal
    puts the cast ray through the goal regardless of fingertip offset.
    """

    def __init__(self, *args) -> None:
        super().__init__(*args)
        chest = self.anchors.chest
        lat = 1.0 if self.side == "right" else -1.0
        self.home = chest + Vec3(lat * 0.12, 0.08, 0.28)

    def hand_for_pointer(self, pointer: Vec3) -> _HandConfig:
        toward = pointer - self.home
        if toward.norm() < 1e-9:
            return _HandConfig(wrist=self.home, aim=Rotation.identity(), curl=0.0)
        aim = Rotation.from_two_vectors(_LOCAL_FWD, toward.normalized())
        return _HandConfig(wrist=self.home, aim=aim, curl=0.0)


class _AttachUser(_UserBase):
    """Sphere-cast driver: steer by finger direction, reach by curl + extension.

    The hand stays in a compact region near the torso; depth beyond the
    base arm length is bought with the nonlinear extension by nudging
    the wrist outward, never by reaching to the target itself.
    """

    def __init__(self, *args) -> None:
        super().__init__(*args)
        self.home_radius = self.params.extension_deadzone + 0.02
        base = self.params.base_arm_length(self.calib)
        self.home_reach = base + _extension_offset_at(self.home_radius, self.params)

    def hand_for_pointer(self, pointer: Vec3) -> _HandConfig:
        shoulder = self.anchors.shoulder
        chest = self.anchors.chest
        base = self.params.base_arm_length(self.calib)

        # the pointer is the virtual fingertip, so the virtual wrist goal
        # sits short of it by the carried-along hand; walk it back while
        # correcting the cast direction for the off-axis knuckle
        goal = pointer
        cast_dir: Vec3 | None = None
        wrist, aim, curl = chest, Rotation.identity(), 0.0
        for _ in range(12):
            to_goal = goal - shoulder
            dist = to_goal.norm()
            want = to_goal.normalized()
            if dist <= 0.97 * self.home_reach:
                radius, reach = self.home_radius, self.home_reach
            else:
                radius = _extension_radius_for(dist - base, self.params)
                reach = dist
            r = min(max(dist / reach, self.params.retraction_min), 1.0)
            curl = curl_for_retraction(r)
            bend = _bend_local(curl * 0.5 * math.pi)

            horiz = project_onto_plane(want, _UP)
            horiz = horiz.normalized() if horiz.norm() > 1e-9 else _LOCAL_FWD
            wrist = chest + horiz * radius + _UP * 0.12

            if cast_dir is None:
                cast_dir = want
            aim = Rotation.from_two_vectors(bend, cast_dir)
            mcp = wrist + aim.apply(_LOCAL_FWD * PALM_LENGTH)
            try:
                hit = ray_sphere_intersect(mcp, aim.apply(bend), shoulder, reach)
                got = (hit - shoulder).normalized()
                cast_dir = Rotation.from_two_vectors(got, want).apply(cast_dir).normalized()
                aim = Rotation.from_two_vectors(bend, cast_dir)
            except NoIntersection:
                pass
            goal = pointer - aim.apply(_local_index_tip(curl))
        return _HandConfig(wrist=wrist, aim=aim, curl=curl)


class _DirectUser(_UserBase):
    """Segment driver: the finger's shape is the arm's shape.

    Depth inside base reach comes from curling (which both retracts and
    folds the virtual elbow); depth beyond it from extension with a
    straight finger.
    """

    def __init__(self, *args) -> None:
        super().__init__(*args)
        self.home_radius = self.params.extension_deadzone + 0.02
        base = self.params.base_arm_length(self.calib)
        self.home_reach = base + _extension_offset_at(self.home_radius, self.params)

    def _pointer_fraction(self, curl: float) -> float:
        # |P_w - P_s| / L for the synthetic finger at this curl
        r = max(
            self.params.retraction_min,
            min(_tip_distance(curl) / FINGER_LENGTH, 1.0),
        )
        return r * math.cos(curl * 0.5 * math.pi)

    def hand_for_pointer(self, pointer: Vec3) -> _HandConfig:
        shoulder = self.anchors.shoulder
        chest = self.anchors.chest
        base = self.params.base_arm_length(self.calib)

        # walk the virtual wrist goal back from the pointer by the
        # re-aimed virtual fingertip offset
        goal = pointer
        wrist, aim, curl = chest, Rotation.identity(), 0.0
        for _ in range(8):
            to_goal = goal - shoulder
            dist = to_goal.norm()
            want = to_goal.normalized()

            if dist >= 0.97 * self.home_reach:
                radius = _extension_radius_for(dist - base, self.params)
                reach, curl = dist, 0.0
            else:
                radius, reach = self.home_radius, self.home_reach
                lo, hi = 0.0, 1.0
                frac = dist / reach
                for _ in range(48):
                    mid = 0.5 * (lo + hi)
                    if self._pointer_fraction(mid) > frac:
                        lo = mid
                    else:
                        hi = mid
                curl = 0.5 * (lo + hi)

            # wrist direction of v1+v2 in hand-local coordinates at this curl
            local = _bend_local(curl * 0.5 * math.pi) + _bend_local(curl * 1.5 * math.pi)
            aim = (
                Rotation.from_two_vectors(local, want)
                if local.norm() > 1e-9
                else Rotation.from_two_vectors(_LOCAL_FWD, want)
            )
            horiz = project_onto_plane(want, _UP)
            horiz = horiz.normalized() if horiz.norm() > 1e-9 else _LOCAL_FWD
            wrist = chest + horiz * radius + _UP * 0.12

            hand_rot = Rotation.from_two_vectors(aim.forward_axis(), want).compose(aim)
            goal = pointer - hand_rot.apply(_local_index_tip(curl))
        return _HandConfig(wrist=wrist, aim=aim, curl=curl)


def _tip_distance(curl: float) -> float:
    a, b = PROXIMAL_LEN, DISTAL_LEN
    return math.sqrt(a * a + b * b + 2.0 * a * b * math.cos(math.pi * curl))


_USERS = {
    TECH_HAND: _HandUser,
    TECH_RAY: _RayUser,
    TECH_ATTACH: _AttachUser,
    TECH_DIRECT: _DirectUser,
}


def simulate_study(
    technique: str,
    layout: TargetLayout,
    tasks: list[TaskSpec],
    calib: BodyCalibration,
    params: MappingParams,
    *,
    side: str = "right",
    rate: float = 90.0,
    dwell: float = 0.45,
    hmd: Pose = DEFAULT_HMD,
) -> list[HandFrame]:
    """One continuous synthetic session driving the given technique.

    The virtual pointer visits each task's start then end target along
    minimum-jerk paths, with a dwell at every touch; the physical hand
    moves however the technique demands. Deterministic.
    """
    user = _USERS[technique](side, hmd, calib, params)
    waypoints: list[Vec3] = []
    for task in tasks:
        waypoints.append(layout.get(task.start_id).position)
        waypoints.append(layout.get(task.end_id).position)

    frames: list[HandFrame] = []
    t = 0.0
    dt = 1.0 / rate
    current = waypoints[0]

    def emit(pointer: Vec3) -> None:
        nonlocal t
        frames.append(user.frame(t, user.hand_for_pointer(pointer)))
        t += dt

    # settle at the first waypoint so filters start converged
    for _ in range(int(round(dwell * rate))):
        emit(current)
    for goal in waypoints:
        span = current.distance(goal)
        if span > 1e-9:
            duration = min(max(0.35 + 0.9 * span, 0.5), 1.6)
            steps = max(int(round(duration * rate)), 2)
            for i in range(1, steps + 1):
                s = min_jerk(i / steps)
                emit(goal if i == steps else current.lerp(goal, s))
        for _ in range(int(round(dwell * rate))):
            emit(goal)
        current = goal
    return frames
