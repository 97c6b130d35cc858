"""Quantitative measures over replayed sessions.

Everything a technique comparison needs: per-task wrist/pointer path
lengths normalized by target distance, the per-second fingertip
bounding-box interaction volume, touch-based task segmentation, and
confinement violations against a desk-scale motion box.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

from .core import HandFrame, Vec3
from .errors import EmptyTrace
from .task_lab import TargetLayout, TaskSpec

_CONTACT_EPS = 1e-9


@dataclass(frozen=True, slots=True)
class TaskRecord:
    """Measured outcome of one reach task."""

    task: TaskSpec
    start_t: float
    end_t: float
    physical_wrist_path: float
    virtual_pointer_path: float
    target_distance: float
    success: bool

    @property
    def duration(self) -> float:
        return self.end_t - self.start_t


@dataclass(frozen=True, slots=True)
class VolumeReport:
    """Axis-aligned bounding box of resampled fingertip positions."""

    box_min: Vec3
    box_max: Vec3
    volume: float
    samples: int


def path_length(points: list[Vec3]) -> float:
    """Sum of consecutive Euclidean distances; zero for a single point."""
    if not points:
        raise EmptyTrace("path_length needs at least one point")
    total = 0.0
    for a, b in zip(points, points[1:]):
        total += a.distance(b)
    return total


def path_ratio(record: TaskRecord) -> tuple[float, float]:
    """Per-task (physical, virtual) path lengths over the target distance."""
    if record.target_distance <= 0.0:
        raise ValueError("target_distance must be positive")
    return (
        record.physical_wrist_path / record.target_distance,
        record.virtual_pointer_path / record.target_distance,
    )


def interaction_volume(
    samples: list[tuple[float, Vec3]], sample_period: float = 1.0
) -> VolumeReport:
    """Bounding-box volume of positions resampled once per period.

    Resampling picks the nearest-in-time sample at each period tick
    (no interpolation). The trace must span at least one period.
    """
    if not samples:
        raise EmptyTrace("no fingertip samples")
    if sample_period <= 0.0:
        raise ValueError("sample_period must be positive")
    t0, t1 = samples[0][0], samples[-1][0]
    if t1 - t0 < sample_period:
        raise EmptyTrace(
            f"trace spans {t1 - t0:.3f} s, shorter than the {sample_period:.3f} s period"
        )

    picked: list[Vec3] = []
    idx = 0
    tick = t0
    while tick <= t1 + 1e-9:
        while idx + 1 < len(samples) and abs(samples[idx + 1][0] - tick) <= abs(
            samples[idx][0] - tick
        ):
            idx += 1
        picked.append(samples[idx][1])
        tick += sample_period

    mn = Vec3(
        min(p.x for p in picked), min(p.y for p in picked), min(p.z for p in picked)
    )
    mx = Vec3(
        max(p.x for p in picked), max(p.y for p in picked), max(p.z for p in picked)
    )
    extent = mx - mn
    return VolumeReport(
        box_min=mn, box_max=mx, volume=extent.x * extent.y * extent.z, samples=len(picked)
    )


def segment_tasks(
    times: list[float],
    wrists: list[Vec3],
    pointers: list[Vec3],
    tasks: list[TaskSpec],
    layout: TargetLayout,
    ray_pause: bool = False,
) -> list[TaskRecord]:
    """Split a session into per-task records by target touches.

    A task starts at the first sample whose pointer is inside the start
    target and ends at the first later sample inside the end target;
    scanning is strictly sequential, so stray contact with other
    spheres never affects segmentation. A task the trace never finishes
    is recorded with success=False and zero paths. With ray_pause,
    pointer path segments that begin or end inside any target are not
    counted, matching how pointing techniques are scored.
    """
    if not len(times) == len(wrists) == len(pointers):
        raise ValueError("times, wrists, and pointers must be aligned")
    spheres = layout.spheres()
    records: list[TaskRecord] = []
    cursor = 0
    n = len(times)
    last_t = times[-1] if times else 0.0

    # boundary contact counts: ray pointers sit exactly on the surface
    def inside(p: Vec3, target_id: int) -> bool:
        target = layout.get(target_id)
        return p.distance(target.position) <= target.radius + _CONTACT_EPS

    def inside_any(p: Vec3) -> bool:
        return any(p.distance(c) <= r + _CONTACT_EPS for c, r in spheres)

    for task in tasks:
        distance = layout.get(task.start_id).position.distance(
            layout.get(task.end_id).position
        )
        start_i = next(
            (i for i in range(cursor, n) if inside(pointers[i], task.start_id)), None
        )
        end_i = (
            None
            if start_i is None
            else next(
                (i for i in range(start_i + 1, n) if inside(pointers[i], task.end_id)),
                None,
            )
        )
        if start_i is None or end_i is None:
            records.append(
                TaskRecord(
                    task=task,
                    start_t=last_t,
                    end_t=last_t,
                    physical_wrist_path=0.0,
                    virtual_pointer_path=0.0,
                    target_distance=distance,
                    success=False,
                )
            )
            cursor = n
            continue

        virtual = 0.0
        for i in range(start_i, end_i):
            if ray_pause and (inside_any(pointers[i]) or inside_any(pointers[i + 1])):
                continue
            virtual += pointers[i].distance(pointers[i + 1])
        records.append(
            TaskRecord(
                task=task,
                start_t=times[start_i],
                end_t=times[end_i],
                physical_wrist_path=path_length(wrists[start_i : end_i + 1]),
                virtual_pointer_path=virtual,
                target_distance=distance,
                success=True,
            )
        )
        cursor = end_i
    return records


def segment_trace(
    frames: list[HandFrame],
    pointers: list[Vec3],
    tasks: list[TaskSpec],
    layout: TargetLayout,
    side: str = "right",
    ray_pause: bool = False,
) -> list[TaskRecord]:
    """segment_tasks over raw hand frames, reading the given side's wrist."""
    times = [f.t for f in frames]
    wrists = [f.hand(side).wrist.position for f in frames]
    return segment_tasks(times, wrists, pointers, tasks, layout, ray_pause=ray_pause)


def confinement_violations(
    times: list[float], joint_sets: list[list[Vec3]], box_min: Vec3, box_max: Vec3
) -> tuple[int, list[tuple[float, float]]]:
    """Maximal contiguous intervals where any tracked point leaves the box.

    joint_sets holds, per sample, every physical point to confine.
    """
    for axis in ("x", "y", "z"):
        if getattr(box_min, axis) > getattr(box_max, axis):
            raise ValueError("box_min must not exceed box_max")
    if len(times) != len(joint_sets):
        raise ValueError("times and joint_sets must be aligned")

    def outside(p: Vec3) -> bool:
        return (
            p.x < box_min.x
            or p.y < box_min.y
            or p.z < box_min.z
            or p.x > box_max.x
            or p.y > box_max.y
            or p.z > box_max.z
        )

    intervals: list[tuple[float, float]] = []
    open_start: float | None = None
    last_t = 0.0
    for t, points in zip(times, joint_sets):
        last_t = t
        if any(outside(p) for p in points):
            if open_start is None:
                open_start = t
        elif open_start is not None:
            intervals.append((open_start, t))
            open_start = None
    if open_start is not None:
        intervals.append((open_start, last_t))
    return len(intervals), intervals


def confine_frames(
    frames: list[HandFrame], box_min: Vec3, box_max: Vec3
) -> tuple[int, list[tuple[float, float]]]:
    """confinement_violations over raw hand frames (wrist plus all joints)."""
    times = [f.t for f in frames]
    joint_sets = [
        [hand.wrist.position for hand in f.hands.values()]
        + [p for hand in f.hands.values() for p in hand.joints.values()]
        for f in frames
    ]
    return confinement_violations(times, joint_sets, box_min, box_max)


@dataclass(frozen=True, slots=True)
class Summary:
    """Aggregate of successful task records, optionally outlier-filtered."""

    tasks: int
    successes: int
    outliers_dropped: int
    mean_physical_ratio: float
    mean_virtual_ratio: float
    mean_duration: float


def summarize(records: list[TaskRecord], outlier_sd: float | None = None) -> Summary:
    """Means over successful tasks; outlier_sd drops tasks whose physical
    ratio sits more than that many standard deviations from the mean."""
    successes = [r for r in records if r.success]
    ok = successes
    if outlier_sd is not None and len(ok) >= 3:
        ratios = [path_ratio(r)[0] for r in ok]
        mean = statistics.fmean(ratios)
        sd = statistics.pstdev(ratios)
        if sd > 0.0:
            ok = [r for r, x in zip(ok, ratios) if abs(x - mean) <= outlier_sd * sd]
    dropped = len(successes) - len(ok)
    if not ok:
        return Summary(
            tasks=len(records),
            successes=len(successes),
            outliers_dropped=dropped,
            mean_physical_ratio=math.nan,
            mean_virtual_ratio=math.nan,
            mean_duration=math.nan,
        )
    pairs = [path_ratio(r) for r in ok]
    return Summary(
        tasks=len(records),
        successes=len(successes),
        outliers_dropped=dropped,
        mean_physical_ratio=statistics.fmean(p for p, _ in pairs),
        mean_virtual_ratio=statistics.fmean(v for _, v in pairs),
        mean_duration=statistics.fmean(r.duration for r in ok),
    )
