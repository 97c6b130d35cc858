"""Finger-to-arm retargeting: the per-frame mapping pipeline.

Two retargeting techniques re-associate the tracked index finger with a
virtual arm anchored at a modeled shoulder:

* attach: a ray from the index knuckle along the proximal phalanx is
  cast onto the maximum-reach sphere; finger curl retracts the virtual
  wrist along the shoulder-to-casting-point direction.
* direct: the proximal phalanx direction becomes the upper arm and the
  distal finger direction becomes the forearm, scaled to arm length.

Two baselines ship alongside for comparison studies: hand (raw wrist
passthrough) and ray (pointing from the fingertip). A nonlinear reach
extension grows the effective arm length when the physical wrist moves
past a dead-zone distance from the chest, and a speed-adaptive low-pass
filter smooths the tracked joints driving the two retargeting
techniques.

Per-frame state (filters, extension, sticky cast direction, triggers,
elbow plane hint) lives in MappingSession; frames must be fed in
timestamp order. A frame that raises leaves the session untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import arm_ik
from .core import (
    JOINT_NAMES,
    ArmPose,
    BodyCalibration,
    HandFrame,
    HandTrack,
    Pose,
    Rotation,
    Vec3,
    project_onto_plane,
    ray_sphere_intersect,
)
from .errors import NoIntersection, NonMonotonicTime
from .euro_filter import EuroParams, Vec3States, filter_vec3, fresh_vec3_states
from .selection import TriggerConfig, TriggerState, step_triggers

TECH_ATTACH = "attach"
TECH_DIRECT = "direct"
TECH_HAND = "hand"
TECH_RAY = "ray"
TECHNIQUES = (TECH_ATTACH, TECH_DIRECT, TECH_HAND, TECH_RAY)

# techniques whose inputs are smoothed and whose reach extends
RETARGETED = (TECH_ATTACH, TECH_DIRECT)

FILTER_PRE = "pre"
FILTER_POST = "post"
FILTER_OFF = "off"

_WORLD_UP = Vec3(0.0, 1.0, 0.0)
_FILTERED_CHANNELS = ("wrist",) + JOINT_NAMES


@dataclass(frozen=True, slots=True)
class BodyAnchors:
    """Per-frame body frame for one side, derived from the headset pose."""

    shoulder: Vec3
    chest: Vec3
    head_up: Vec3


@dataclass(frozen=True, slots=True)
class MappingParams:
    """Everything tunable about the pipeline, serialized into trace headers.

    arm_length of None defers to the calibration; reach_floor stops a
    large negative extension offset from collapsing the reach sphere.
    """

    technique: str = TECH_ATTACH
    retraction_min: float = 0.15
    extension_deadzone: float = 0.18
    extension_gain: float = 0.6
    arm_length: float | None = None
    reach_floor: float = 0.05
    ray_max_length: float = 5.0
    filter_stage: str = FILTER_PRE
    euro: EuroParams = field(default_factory=EuroParams)
    trigger: TriggerConfig = field(default_factory=TriggerConfig)

    def validate(self) -> None:
        if self.technique not in TECHNIQUES:
            raise ValueError(f"unknown technique {self.technique!r}")
        if not 0.0 < self.retraction_min < 1.0:
            raise ValueError("retraction_min must lie in (0, 1)")
        if self.extension_deadzone <= 0.0:
            raise ValueError("extension_deadzone must be positive")
        if self.extension_gain < 0.0:
            raise ValueError("extension_gain must be nonnegative")
        if self.arm_length is not None and self.arm_length <= 0.0:
            raise ValueError("arm_length override must be positive")
        if self.reach_floor <= 0.0:
            raise ValueError("reach_floor must be positive")
        if self.ray_max_length <= 0.0:
            raise ValueError("ray_max_length must be positive")
        if self.filter_stage not in (FILTER_PRE, FILTER_POST, FILTER_OFF):
            raise ValueError(f"unknown filter_stage {self.filter_stage!r}")
        self.euro.validate()
        self.trigger.validate()

    def base_arm_length(self, calib: BodyCalibration) -> float:
        return self.arm_length if self.arm_length is not None else calib.arm_length

    def to_dict(self) -> dict:
        return {
            "technique": self.technique,
            "retraction_min": self.retraction_min,
            "extension_deadzone": self.extension_deadzone,
            "extension_gain": self.extension_gain,
            "arm_length": self.arm_length,
            "reach_floor": self.reach_floor,
            "ray_max_length": self.ray_max_length,
            "filter_stage": self.filter_stage,
            "euro": {
                "min_cutoff": self.euro.min_cutoff,
                "beta": self.euro.beta,
                "d_cutoff": self.euro.d_cutoff,
            },
            "trigger": {
                "thumb_press_dist": self.trigger.thumb_press_dist,
                "thumb_release_dist": self.trigger.thumb_release_dist,
                "grab_press_dist": self.trigger.grab_press_dist,
                "grab_release_dist": self.trigger.grab_release_dist,
            },
        }

    @staticmethod
    def from_dict(d: dict) -> "MappingParams":
        base = MappingParams()
        euro = d.get("euro", {})
        trigger = d.get("trigger", {})
        params = MappingParams(
            technique=d.get("technique", base.technique),
            retraction_min=d.get("retraction_min", base.retraction_min),
            extension_deadzone=d.get("extension_deadzone", base.extension_deadzone),
            extension_gain=d.get("extension_gain", base.extension_gain),
            arm_length=d.get("arm_length", base.arm_length),
            reach_floor=d.get("reach_floor", base.reach_floor),
            ray_max_length=d.get("ray_max_length", base.ray_max_length),
            filter_stage=d.get("filter_stage", base.filter_stage),
            euro=EuroParams(
                min_cutoff=euro.get("min_cutoff", base.euro.min_cutoff),
                beta=euro.get("beta", base.euro.beta),
                d_cutoff=euro.get("d_cutoff", base.euro.d_cutoff),
            ),
            trigger=TriggerConfig(
                thumb_press_dist=trigger.get("thumb_press_dist", base.trigger.thumb_press_dist),
                thumb_release_dist=trigger.get(
                    "thumb_release_dist", base.trigger.thumb_release_dist
                ),
                grab_press_dist=trigger.get("grab_press_dist", base.trigger.grab_press_dist),
                grab_release_dist=trigger.get(
                    "grab_release_dist", base.trigger.grab_release_dist
                ),
            ),
        )
        params.validate()
        return params


def merge_params(current: MappingParams, patch: dict) -> MappingParams:
    """Deep-merge a partial params dict over the current values."""
    base = current.to_dict()
    for key, value in patch.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            base[key].update(value)
        else:
            base[key] = value
    return MappingParams.from_dict(base)


@dataclass(frozen=True, slots=True)
class ExtensionState:
    """Last signed reach offset (meters); kept for continuity inspection."""

    offset: float = 0.0


@dataclass(frozen=True, slots=True)
class AttachState:
    """Sticky cast memory: unit shoulder-to-casting-point direction and last r."""

    cast_dir: Vec3 | None = None
    r: float = 1.0


def estimate_anchors(hmd: Pose, calib: BodyCalibration, side: str) -> BodyAnchors:
    """Shoulder/chest/head-up for one side, hung below the headset.

    The shoulder sits shoulder_drop below the headset and half a
    shoulder width to the side along the headset's horizontal right
    axis, so head roll does not lift a shoulder.
    """
    lateral = project_onto_plane(hmd.rotation.right_axis(), _WORLD_UP)
    if lateral.norm() < 1e-9:
        lateral = Vec3(1.0, 0.0, 0.0)
    else:
        lateral = lateral.normalized()
    sign = 1.0 if side == "right" else -1.0
    shoulder = (
        hmd.position
        - Vec3(0.0, calib.shoulder_drop, 0.0)
        + lateral * (sign * calib.shoulder_half_width)
    )
    chest = hmd.position - Vec3(0.0, calib.chest_drop, 0.0)
    return BodyAnchors(shoulder=shoulder, chest=chest, head_up=hmd.rotation.up_axis())


def retraction_fraction(
    frame: HandFrame, side: str, calib: BodyCalibration, r_min: float = 0.15
) -> float:
    """Index curl as a reach fraction: tip-to-knuckle distance over finger length."""
    hand = frame.hand(side)
    d = hand.joint("index_tip", side).distance(hand.joint("index_mcp", side))
    return min(max(d / calib.index_finger_length, r_min), 1.0)


def extension_offset(
    frame: HandFrame,
    side: str,
    anchors: BodyAnchors,
    params: MappingParams,
    prev: ExtensionState,
) -> tuple[float, ExtensionState]:
    """Signed reach offset from the wrist's horizontal distance to the chest.

    Inside the dead zone the offset shrinks reach linearly (R - D);
    outside it grows super-linearly, R + k(R-D)^2 - D, continuous at D.
    """
    wrist = frame.hand(side).wrist.position
    radial = project_onto_plane(wrist - anchors.chest, anchors.head_up)
    r_dist = radial.norm()
    d = params.extension_deadzone
    if r_dist < d:
        offset = r_dist - d
    else:
        over = r_dist - d
        offset = r_dist + params.extension_gain * over * over - d
    return offset, ExtensionState(offset=offset)


def effective_reach(calib: BodyCalibration, params: MappingParams, offset: float) -> float:
    """Arm length plus extension offset, floored away from zero."""
    return max(params.base_arm_length(calib) + offset, params.reach_floor)


def map_attach(
    frame: HandFrame,
    side: str,
    anchors: BodyAnchors,
    calib: BodyCalibration,
    params: MappingParams,
    state: AttachState,
    offset: float = 0.0,
) -> tuple[Vec3, AttachState]:
    """Sphere-cast mapping: returns (virtual wrist, next state).

    The proximal-phalanx ray hits the reach sphere at the casting
    point; the virtual wrist sits at fraction r of the way out from the
    shoulder. When the ray misses (hand outside the sphere pointing
    away) the last cast direction is reused so the arm freezes instead
    of snapping.
    """
    hand = frame.hand(side)
    mcp = hand.joint("index_mcp", side)
    pip = hand.joint("index_pip", side)
    rho = effective_reach(calib, params, offset)
    try:
        cast = ray_sphere_intersect(mcp, pip - mcp, anchors.shoulder, rho)
        direction = (cast - anchors.shoulder).normalized()
    except NoIntersection:
        if state.cast_dir is not None:
            direction = state.cast_dir
        else:
            # no history yet: aim through the hand
            direction = (mcp - anchors.shoulder).normalized()
    r = retraction_fraction(frame, side, calib, params.retraction_min)
    wrist = anchors.shoulder + direction * (r * rho)
    return wrist, AttachState(cast_dir=direction, r=r)


def map_direct(
    frame: HandFrame,
    side: str,
    anchors: BodyAnchors,
    calib: BodyCalibration,
    params: MappingParams,
    offset: float = 0.0,
) -> tuple[Vec3, Vec3]:
    """Segment mapping: returns (virtual wrist, elbow).

    The proximal phalanx aims the upper arm and the knuckle-to-tip
    segment aims the forearm, each r * L/2 long, so the finger's shape
    IS the arm's shape. The elbow needs no solver.
    """
    hand = frame.hand(side)
    mcp = hand.joint("index_mcp", side)
    pip = hand.joint("index_pip", side)
    tip = hand.joint("index_tip", side)
    v1 = (pip - mcp).normalized()
    distal = tip - pip
    # collapsed distal segment: keep the forearm following the upper arm
    v2 = v1 if distal.norm() < 1e-9 else distal.normalized()
    r = retraction_fraction(frame, side, calib, params.retraction_min)
    half = r * effective_reach(calib, params, offset) * 0.5
    elbow = anchors.shoulder + v1 * half
    wrist = anchors.shoulder + (v1 + v2) * half
    return wrist, elbow


def map_ray(frame: HandFrame, side: str) -> tuple[Vec3, Vec3]:
    """Pointing baseline: ray origin at the index tip, aimed along the fingertip."""
    hand = frame.hand(side)
    pip = hand.joint("index_pip", side)
    tip = hand.joint("index_tip", side)
    return tip, (tip - pip).normalized()


def ray_pointer(
    origin: Vec3,
    direction: Vec3,
    targets: list[tuple[Vec3, float]],
    max_length: float,
) -> Vec3:
    """Nearest forward target intersection, else the ray end at max_length."""
    best: float | None = None
    for center, radius in targets:
        try:
            hit = ray_sphere_intersect(origin, direction, center, radius)
        except NoIntersection:
            continue
        t = (hit - origin).dot(direction)
        if best is None or t < best:
            best = t
    if best is None:
        best = max_length
    return origin + direction * best


@dataclass(frozen=True, slots=True)
class EventRecord:
    side: str
    gesture: str
    kind: str


@dataclass(frozen=True, slots=True)
class FrameResult:
    """One mapped frame: per-side arm poses, pointers, and trigger events.

    reach holds the per-side effective arm length behind each pose
    (sphere radius for attach, segment length for direct); extension is
    the signed offset that produced it.
    """

    t: float
    poses: dict[str, ArmPose]
    pointers: dict[str, Vec3]
    events: list[EventRecord]
    extension: dict[str, float]
    reach: dict[str, float]


@dataclass(frozen=True, slots=True)
class _SideState:
    pre_filters: dict[str, Vec3States] = field(default_factory=dict)
    post_wrist: Vec3States | None = None
    post_elbow: Vec3States | None = None
    extension: ExtensionState = field(default_factory=ExtensionState)
    attach: AttachState = field(default_factory=AttachState)
    trigger: TriggerState = field(default_factory=TriggerState)
    elbow_hint: Vec3 | None = None


def _transport_hand(
    phys_wrist: Pose, virt_wrist: Pose, joints: dict[str, Vec3]
) -> dict[str, Vec3]:
    """Carry finger joints rigidly from the physical wrist frame to the virtual one."""
    to_local = phys_wrist.inverse()
    return {
        name: virt_wrist.transform_point(to_local.transform_point(p))
        for name, p in joints.items()
    }


class MappingSession:
    """Stateful frame-by-frame mapper for one technique and calibration.

    Feed timestamp-ordered frames to step(); each call returns a
    FrameResult. All state mutation happens after the frame fully
    succeeds, so a raising frame leaves the session unchanged and the
    caller may continue with the next frame.

    targets, when provided, are (center, radius) spheres the ray
    baseline's pointer can land on.
    """

    def __init__(
        self,
        calib: BodyCalibration,
        params: MappingParams,
        targets: list[tuple[Vec3, float]] | None = None,
    ) -> None:
        calib.validate()
        params.validate()
        self.calib = calib
        self.params = params
        self.targets = targets or []
        self._sides: dict[str, _SideState] = {}
        self._last_t: float | None = None
        self._pending_params: MappingParams | None = None

    def request_params(self, params: MappingParams) -> None:
        """Swap parameters starting with the NEXT frame (not mid-frame)."""
        params.validate()
        self._pending_params = params

    def step(self, frame: HandFrame) -> FrameResult:
        if self._pending_params is not None:
            self.params = self._pending_params
            self._pending_params = None
        if self._last_t is not None and frame.t <= self._last_t:
            raise NonMonotonicTime(
                f"frame at t={frame.t} does not advance past t={self._last_t}"
            )

        poses: dict[str, ArmPose] = {}
        pointers: dict[str, Vec3] = {}
        events: list[EventRecord] = []
        extension: dict[str, float] = {}
        reach: dict[str, float] = {}
        staged: dict[str, _SideState] = {}

        for side in sorted(frame.hands):
            state = self._sides.get(side, _SideState())
            pose, pointer, ext, rho, new_state, side_events = self._map_side(
                frame, side, state
            )
            poses[side] = pose
            pointers[side] = pointer
            extension[side] = ext
            reach[side] = rho
            staged[side] = new_state
            events.extend(side_events)

        # commit only after every side mapped cleanly
        self._sides.update(staged)
        self._last_t = frame.t
        return FrameResult(
            t=frame.t,
            poses=poses,
            pointers=pointers,
            events=events,
            extension=extension,
            reach=reach,
        )

    def _map_side(
        self, frame: HandFrame, side: str, state: _SideState
    ) -> tuple[ArmPose, Vec3, float, float, _SideState, list[EventRecord]]:
        params = self.params
        technique = params.technique
        retargeted = technique in RETARGETED

        work = frame
        pre_filters = state.pre_filters
        if retargeted and params.filter_stage == FILTER_PRE:
            work, pre_filters = self._filter_inputs(frame, side, state.pre_filters)

        anchors = estimate_anchors(work.hmd, self.calib, side)
        hand = work.hand(side)
        phys_wrist = hand.wrist

        if retargeted:
            offset, ext_state = extension_offset(work, side, anchors, params, state.extension)
        else:
            offset, ext_state = 0.0, state.extension

        attach_state = state.attach
        post_wrist = state.post_wrist
        post_elbow = state.post_elbow

        if technique == TECH_ATTACH:
            reach = effective_reach(self.calib, params, offset)
            wrist, attach_state = map_attach(
                work, side, anchors, self.calib, params, state.attach, offset
            )
            if params.filter_stage == FILTER_POST:
                wrist, post_wrist = self._post_filter(wrist, work.t, post_wrist)
            elbow, hint = self._solve_elbow(anchors, wrist, reach, side, state.elbow_hint)
            hand_rot = phys_wrist.rotation
        elif technique == TECH_DIRECT:
            reach = effective_reach(self.calib, params, offset)
            wrist, elbow = map_direct(work, side, anchors, self.calib, params, offset)
            if params.filter_stage == FILTER_POST:
                wrist, post_wrist = self._post_filter(wrist, work.t, post_wrist)
                elbow, post_elbow = self._post_filter(elbow, work.t, post_elbow)
            hint = state.elbow_hint
            hand_rot = _direct_hand_rotation(phys_wrist.rotation, wrist - anchors.shoulder)
        else:
            wrist = phys_wrist.position
            reach = max(
                params.base_arm_length(self.calib), wrist.distance(anchors.shoulder)
            )
            elbow, hint = self._solve_elbow(anchors, wrist, reach, side, state.elbow_hint)
            hand_rot = phys_wrist.rotation

        virt_wrist = Pose(wrist, hand_rot)
        fingers = _transport_hand(phys_wrist, virt_wrist, hand.joints)

        if technique == TECH_RAY:
            origin, direction = map_ray(work, side)
            pointer = ray_pointer(origin, direction, self.targets, params.ray_max_length)
        else:
            pointer = fingers.get("index_tip", wrist)

        gesture_events, trig_state = step_triggers(work, side, params.trigger, state.trigger)
        side_events = [
            EventRecord(side=side, gesture=gesture, kind=kind)
            for gesture, kind in gesture_events
        ]

        pose = ArmPose(
            side=side,
            shoulder=anchors.shoulder,
            elbow=elbow,
            wrist=wrist,
            hand_rotation=hand_rot.canonical(),
            virtual_finger_joints=fingers,
        )
        new_state = _SideState(
            pre_filters=pre_filters,
            post_wrist=post_wrist,
            post_elbow=post_elbow,
            extension=ext_state,
            attach=attach_state,
            trigger=trig_state,
            elbow_hint=hint,
        )
        return pose, pointer, offset, reach, new_state, side_events

    def _filter_inputs(
        self, frame: HandFrame, side: str, filters: dict[str, Vec3States]
    ) -> tuple[HandFrame, dict[str, Vec3States]]:
        hand = frame.hand(side)
        next_filters = dict(filters)

        def run(channel: str, value: Vec3) -> Vec3:
            states = next_filters.get(channel)
            if states is None:
                states = fresh_vec3_states()
            smoothed, states = filter_vec3(states, self.params.euro, value, frame.t)
            next_filters[channel] = states
            return smoothed

        wrist = replace(hand.wrist, position=run("wrist", hand.wrist.position))
        joints = {
            name: (run(name, p) if name in _FILTERED_CHANNELS else p)
            for name, p in hand.joints.items()
        }
        hands = dict(frame.hands)
        hands[side] = HandTrack(wrist=wrist, joints=joints)
        return replace(frame, hands=hands), next_filters

    def _post_filter(
        self, point: Vec3, t: float, states: Vec3States | None
    ) -> tuple[Vec3, Vec3States]:
        if states is None:
            states = fresh_vec3_states()
        return filter_vec3(states, self.params.euro, point, t)

    def _solve_elbow(
        self,
        anchors: BodyAnchors,
        wrist: Vec3,
        reach: float,
        side: str,
        hint: Vec3 | None,
    ) -> tuple[Vec3, Vec3 | None]:
        outward = Vec3(1.0, 0.0, 0.0) if side == "right" else Vec3(-1.0, 0.0, 0.0)
        pole = (-anchors.head_up + outward * 0.5).normalized()
        cfg = arm_ik.IkConfig(
            upper_len=reach * 0.5, lower_len=reach * 0.5, pole_direction=pole
        )
        elbow = arm_ik.solve_two_bone(anchors.shoulder, wrist, cfg, plane_hint=hint)
        new_hint = arm_ik.bend_direction(anchors.shoulder, elbow, wrist)
        return elbow, new_hint if new_hint is not None else hint


def _direct_hand_rotation(phys_rot: Rotation, arm_offset: Vec3) -> Rotation:
    """Re-aim the hand along the virtual arm, preserving wrist roll.

    Rotating the physical wrist about its own forward axis rolls the
    result about the arm axis, which is how the whole virtual arm spins
    with the wrist.
    """
    if arm_offset.norm() < 1e-9:
        return phys_rot
    forward = phys_rot.forward_axis()
    aim = Rotation.from_two_vectors(forward, arm_offset.normalized())
    return aim.compose(phys_rot)
