"""Deterministic file formats: traces, layouts, task lists, results.

Traces are UTF-8 line-delimited JSON: one header object, then one
object per frame. Every float is rounded to 9 significant digits
before serialization and keys are sorted, so identical data always
produces identical bytes. Unknown fields on frames survive a
read/write round trip.

Extensions: .fmtrace (hand frames), .fmtrace as mapped output too,
.fmlayout (targets), .fmtasks (task sequence); results as .csv/.json.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import IO, Iterable

from .core import BodyCalibration, HandFrame, HandTrack, Pose, Rotation, Vec3
from .errors import MalformedFrame, MalformedHeader, NonMonotonicTime
from .mapping import ArmPose, EventRecord, FrameResult, MappingParams
from .metrics import TaskRecord, path_ratio
from .task_lab import Target, TargetLayout, TaskSpec

FORMAT_VERSION = 1
EPOCH = "1970-01-01T00:00:00Z"

_FRAME_KEYS = {"t", "hmd", "hands"}
_HEADER_KEYS = {"version", "created_at", "calibration", "params", "technique"}


def round9(x: float) -> float:
    """Quantize to 9 significant digits; the serialization-wide float policy."""
    return float(f"{x:.9g}")


def _vec(v: Vec3) -> list[float]:
    return [round9(v.x), round9(v.y), round9(v.z)]


def _rot(q: Rotation) -> list[float]:
    c = q.canonical()
    return [round9(c.w), round9(c.x), round9(c.y), round9(c.z)]


def _pose(p: Pose) -> dict:
    return {"position": _vec(p.position), "rotation": _rot(p.rotation)}


def _parse_vec(v, line: int) -> Vec3:
    if not isinstance(v, list) or len(v) != 3:
        raise MalformedFrame("expected a 3-element position array", line)
    return Vec3(float(v[0]), float(v[1]), float(v[2]))


def _parse_pose(d, line: int) -> Pose:
    if not isinstance(d, dict) or "position" not in d or "rotation" not in d:
        raise MalformedFrame("pose needs position and rotation", line)
    q = d["rotation"]
    if not isinstance(q, list) or len(q) != 4:
        raise MalformedFrame("expected a 4-element rotation array", line)
    return Pose(
        _parse_vec(d["position"], line),
        Rotation(float(q[0]), float(q[1]), float(q[2]), float(q[3])),
    )


def dumps(obj: dict) -> str:
    """The one JSON encoder: sorted keys, compact, no NaN."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def calibration_to_dict(calib: BodyCalibration) -> dict:
    return {
        "arm_length": round9(calib.arm_length),
        "index_finger_length": round9(calib.index_finger_length),
        "arm_span": round9(calib.arm_span),
        "shoulder_drop": round9(calib.shoulder_drop),
        "chest_drop": round9(calib.chest_drop),
        "elbow_drop": round9(calib.elbow_drop),
        "shoulder_half_width": round9(calib.shoulder_half_width),
    }


def calibration_from_dict(d: dict) -> BodyCalibration:
    base = BodyCalibration()
    calib = BodyCalibration(
        arm_length=d.get("arm_length", base.arm_length),
        index_finger_length=d.get("index_finger_length", base.index_finger_length),
        arm_span=d.get("arm_span", base.arm_span),
        shoulder_drop=d.get("shoulder_drop", base.shoulder_drop),
        chest_drop=d.get("chest_drop", base.chest_drop),
        elbow_drop=d.get("elbow_drop", base.elbow_drop),
        shoulder_half_width=d.get("shoulder_half_width", base.shoulder_half_width),
    )
    calib.validate()
    return calib


def _params_rounded(params: MappingParams) -> dict:
    d = params.to_dict()

    def walk(node):
        if isinstance(node, dict):
            return {k: walk(v) for k, v in node.items()}
        if isinstance(node, float):
            return round9(node)
        return node

    return walk(d)


def header_dict(
    calib: BodyCalibration, params: MappingParams, created_at: str = EPOCH
) -> dict:
    return {
        "version": FORMAT_VERSION,
        "created_at": created_at,
        "calibration": calibration_to_dict(calib),
        "params": _params_rounded(params),
        "technique": params.technique,
    }


def parse_header(line: str) -> tuple[dict, BodyCalibration, MappingParams]:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as e:
        raise MalformedHeader(f"header is not valid JSON: {e}") from None
    if not isinstance(raw, dict) or not _HEADER_KEYS.issubset(raw):
        missing = _HEADER_KEYS - set(raw) if isinstance(raw, dict) else _HEADER_KEYS
        raise MalformedHeader(f"header missing keys: {sorted(missing)}")
    if raw["version"] != FORMAT_VERSION:
        raise MalformedHeader(f"unsupported format version {raw['version']!r}")
    try:
        calib = calibration_from_dict(raw["calibration"])
        params = MappingParams.from_dict(raw["params"])
    except (TypeError, ValueError, AttributeError) as e:
        raise MalformedHeader(f"bad calibration or params: {e}") from None
    return raw, calib, params


def frame_to_dict(frame: HandFrame) -> dict:
    d = dict(frame.extra)
    d["t"] = round9(frame.t)
    d["hmd"] = _pose(frame.hmd)
    d["hands"] = {
        side: {
            "wrist": _pose(hand.wrist),
            "joints": {name: _vec(p) for name, p in sorted(hand.joints.items())},
        }
        for side, hand in sorted(frame.hands.items())
    }
    return d


def frame_from_dict(d: dict, line: int) -> HandFrame:
    if not isinstance(d, dict) or not _FRAME_KEYS.issubset(d):
        raise MalformedFrame("frame needs t, hmd, and hands", line)
    try:
        t = float(d["t"])
    except (TypeError, ValueError):
        raise MalformedFrame("t must be a number", line) from None
    hands: dict[str, HandTrack] = {}
    raw_hands = d["hands"]
    if not isinstance(raw_hands, dict) or not raw_hands:
        raise MalformedFrame("hands must be a non-empty object", line)
    for side, raw in raw_hands.items():
        if not isinstance(raw, dict) or "wrist" not in raw:
            raise MalformedFrame(f"hand {side!r} needs a wrist pose", line)
        joints = {
            name: _parse_vec(p, line) for name, p in raw.get("joints", {}).items()
        }
        hands[side] = HandTrack(wrist=_parse_pose(raw["wrist"], line), joints=joints)
    extra = {k: v for k, v in d.items() if k not in _FRAME_KEYS}
    return HandFrame(t=t, hmd=_parse_pose(d["hmd"], line), hands=hands, extra=extra)


def write_trace(
    dest: IO[str],
    frames: Iterable[HandFrame],
    calib: BodyCalibration,
    params: MappingParams,
    created_at: str = EPOCH,
) -> None:
    dest.write(dumps(header_dict(calib, params, created_at)) + "\n")
    for frame in frames:
        dest.write(dumps(frame_to_dict(frame)) + "\n")


def read_trace(
    source: IO[str],
) -> tuple[dict, BodyCalibration, MappingParams, list[HandFrame]]:
    """Returns (header, calibration, params, frames); errors carry line numbers."""
    header_line = source.readline()
    if not header_line.strip():
        raise MalformedHeader("empty file: missing header line")
    header, calib, params = parse_header(header_line)
    frames: list[HandFrame] = []
    prev_t: float | None = None
    for line_no, line in enumerate(source, start=2):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as e:
            raise MalformedFrame(f"invalid JSON: {e}", line_no) from None
        frame = frame_from_dict(raw, line_no)
        if prev_t is not None and frame.t <= prev_t:
            raise NonMonotonicTime(
                f"t={frame.t} does not advance past t={prev_t}", line=line_no
            )
        prev_t = frame.t
        frames.append(frame)
    return header, calib, params, frames


# --- mapped output traces -------------------------------------------------


@dataclass(frozen=True, slots=True)
class MappedFrame:
    """One replayed frame: mapped poses plus the physical points metrics need."""

    t: float
    poses: dict[str, ArmPose]
    pointers: dict[str, Vec3]
    events: list[EventRecord]
    extension: dict[str, float]
    reach: dict[str, float]
    physical_wrist: dict[str, Vec3]
    physical_index_tip: dict[str, Vec3]


def mapped_from_result(result: FrameResult, frame: HandFrame) -> MappedFrame:
    wrists: dict[str, Vec3] = {}
    tips: dict[str, Vec3] = {}
    for side, hand in frame.hands.items():
        wrists[side] = hand.wrist.position
        tip = hand.joints.get("index_tip")
        if tip is not None:
            tips[side] = tip
    return MappedFrame(
        t=result.t,
        poses=result.poses,
        pointers=result.pointers,
        events=result.events,
        extension=result.extension,
        reach=result.reach,
        physical_wrist=wrists,
        physical_index_tip=tips,
    )


def _arm_pose_to_dict(pose: ArmPose) -> dict:
    return {
        "side": pose.side,
        "shoulder": _vec(pose.shoulder),
        "elbow": _vec(pose.elbow),
        "wrist": _vec(pose.wrist),
        "hand_rotation": _rot(pose.hand_rotation),
        "fingers": {name: _vec(p) for name, p in sorted(pose.virtual_finger_joints.items())},
    }


def _arm_pose_from_dict(d: dict, line: int) -> ArmPose:
    q = d["hand_rotation"]
    return ArmPose(
        side=d["side"],
        shoulder=_parse_vec(d["shoulder"], line),
        elbow=_parse_vec(d["elbow"], line),
        wrist=_parse_vec(d["wrist"], line),
        hand_rotation=Rotation(float(q[0]), float(q[1]), float(q[2]), float(q[3])),
        virtual_finger_joints={
            name: _parse_vec(p, line) for name, p in d.get("fingers", {}).items()
        },
    )


def mapped_frame_to_dict(m: MappedFrame) -> dict:
    return {
        "t": round9(m.t),
        "poses": {side: _arm_pose_to_dict(p) for side, p in sorted(m.poses.items())},
        "pointers": {side: _vec(p) for side, p in sorted(m.pointers.items())},
        "events": [
            {"side": e.side, "gesture": e.gesture, "kind": e.kind} for e in m.events
        ],
        "extension": {side: round9(v) for side, v in sorted(m.extension.items())},
        "reach": {side: round9(v) for side, v in sorted(m.reach.items())},
        "physical": {
            side: {
                "wrist": _vec(m.physical_wrist[side]),
                **(
                    {"index_tip": _vec(m.physical_index_tip[side])}
                    if side in m.physical_index_tip
                    else {}
                ),
            }
            for side in sorted(m.physical_wrist)
        },
    }


def mapped_frame_from_dict(d: dict, line: int) -> MappedFrame:
    try:
        poses = {s: _arm_pose_from_dict(p, line) for s, p in d["poses"].items()}
        pointers = {s: _parse_vec(p, line) for s, p in d["pointers"].items()}
        events = [
            EventRecord(side=e["side"], gesture=e["gesture"], kind=e["kind"])
            for e in d.get("events", [])
        ]
        physical = d.get("physical", {})
        wrists = {
            s: _parse_vec(b["wrist"], line) for s, b in physical.items() if "wrist" in b
        }
        tips = {
            s: _parse_vec(b["index_tip"], line)
            for s, b in physical.items()
            if "index_tip" in b
        }
        return MappedFrame(
            t=float(d["t"]),
            poses=poses,
            pointers=pointers,
            events=events,
            extension={s: float(v) for s, v in d.get("extension", {}).items()},
            reach={s: float(v) for s, v in d.get("reach", {}).items()},
            physical_wrist=wrists,
            physical_index_tip=tips,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedFrame(f"bad mapped frame: {e}", line) from None


def write_mapped_trace(
    dest: IO[str],
    frames: Iterable[MappedFrame],
    calib: BodyCalibration,
    params: MappingParams,
    created_at: str = EPOCH,
) -> None:
    dest.write(dumps(header_dict(calib, params, created_at)) + "\n")
    for m in frames:
        dest.write(dumps(mapped_frame_to_dict(m)) + "\n")


def read_mapped_trace(
    source: IO[str],
) -> tuple[dict, BodyCalibration, MappingParams, list[MappedFrame]]:
    header_line = source.readline()
    if not header_line.strip():
        raise MalformedHeader("empty file: missing header line")
    header, calib, params = parse_header(header_line)
    frames: list[MappedFrame] = []
    prev_t: float | None = None
    for line_no, line in enumerate(source, start=2):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as e:
            raise MalformedFrame(f"invalid JSON: {e}", line_no) from None
        m = mapped_frame_from_dict(raw, line_no)
        if prev_t is not None and m.t <= prev_t:
            raise NonMonotonicTime(
                f"t={m.t} does not advance past t={prev_t}", line=line_no
            )
        prev_t = m.t
        frames.append(m)
    return header, calib, params, frames


# --- layouts, tasks, results ----------------------------------------------


def write_layout(dest: IO[str], layout: TargetLayout, created_at: str = EPOCH) -> None:
    dest.write(
        dumps(
            {
                "version": FORMAT_VERSION,
                "created_at": created_at,
                "arm_span": round9(layout.arm_span),
                "targets": [
                    {"id": t.id, "position": _vec(t.position), "radius": round9(t.radius)}
                    for t in layout.targets
                ],
            }
        )
        + "\n"
    )


def read_layout(source: IO[str]) -> TargetLayout:
    try:
        raw = json.loads(source.read())
        targets = tuple(
            Target(
                id=int(t["id"]),
                position=_parse_vec(t["position"], 1),
                radius=float(t["radius"]),
            )
            for t in raw["targets"]
        )
        return TargetLayout(arm_span=float(raw["arm_span"]), targets=targets)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise MalformedHeader(f"bad layout file: {e}") from None


def write_tasks(
    dest: IO[str], tasks: list[TaskSpec], seed: int | None = None, created_at: str = EPOCH
) -> None:
    payload: dict = {
        "version": FORMAT_VERSION,
        "created_at": created_at,
        "tasks": [
            {"start_id": t.start_id, "end_id": t.end_id, "distance_class": t.distance_class}
            for t in tasks
        ],
    }
    if seed is not None:
        payload["seed"] = seed
    dest.write(dumps(payload) + "\n")


def read_tasks(source: IO[str]) -> list[TaskSpec]:
    try:
        raw = json.loads(source.read())
        return [
            TaskSpec(
                start_id=int(t["start_id"]),
                end_id=int(t["end_id"]),
                distance_class=t["distance_class"],
            )
            for t in raw["tasks"]
        ]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise MalformedHeader(f"bad tasks file: {e}") from None


RESULT_COLUMNS = (
    "task_index",
    "start_id",
    "end_id",
    "distance_class",
    "start_t",
    "end_t",
    "duration",
    "physical_wrist_path",
    "virtual_pointer_path",
    "target_distance",
    "physical_ratio",
    "virtual_ratio",
    "success",
)


def record_row(index: int, record: TaskRecord) -> dict:
    phys, virt = (
        path_ratio(record) if record.target_distance > 0 else (0.0, 0.0)
    )
    return {
        "task_index": index,
        "start_id": record.task.start_id,
        "end_id": record.task.end_id,
        "distance_class": record.task.distance_class,
        "start_t": round9(record.start_t),
        "end_t": round9(record.end_t),
        "duration": round9(record.duration),
        "physical_wrist_path": round9(record.physical_wrist_path),
        "virtual_pointer_path": round9(record.virtual_pointer_path),
        "target_distance": round9(record.target_distance),
        "physical_ratio": round9(phys),
        "virtual_ratio": round9(virt),
        "success": record.success,
    }


def write_results_csv(dest: IO[str], records: list[TaskRecord]) -> None:
    writer = csv.DictWriter(dest, fieldnames=RESULT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for i, record in enumerate(records):
        writer.writerow(record_row(i, record))


def write_results_json(dest: IO[str], payload: dict) -> None:
    dest.write(dumps(payload) + "\n")
