"""Finger-motion to virtual-arm retargeting engine.

Maps tracked index-finger motion onto a full virtual arm so large
reaches can be performed with small hand movements, with selection
gestures, a nonlinear reach extension, replayable trace files, study
tooling, and a streaming session endpoint.
"""

from .arm_ik import IkConfig, clamp_target, solve_two_bone
from .core import (
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
from .errors import (
    DegenerateTarget,
    EmptyTrace,
    FingermapError,
    InfeasibleClass,
    MalformedFrame,
    MalformedHeader,
    MissingJoint,
    NoIntersection,
    NonMonotonicTime,
    ProtocolError,
)
from .euro_filter import EuroParams, EuroState, euro_step, filter_vec3
from .mapping import (
    TECH_ATTACH,
    TECH_DIRECT,
    TECH_HAND,
    TECH_RAY,
    TECHNIQUES,
    BodyAnchors,
    EventRecord,
    FrameResult,
    MappingParams,
    MappingSession,
    estimate_anchors,
    extension_offset,
    map_attach,
    map_direct,
    map_ray,
    merge_params,
    retraction_fraction,
)
from .metrics import (
    Summary,
    TaskRecord,
    VolumeReport,
    confinement_violations,
    interaction_volume,
    path_length,
    path_ratio,
    segment_tasks,
    segment_trace,
    summarize,
)
from .selection import TriggerConfig, TriggerState, grab_select, thumb_button
from .task_lab import (
    ReachSpec,
    Target,
    TargetLayout,
    TaskSpec,
    classify_distances,
    generate_layout,
    make_hand,
    make_task_sequence,
    min_jerk,
    simulate_study,
    synth_reach,
)

__version__ = "0.1.0"

__all__ = [
    "ArmPose",
    "BodyAnchors",
    "BodyCalibration",
    "DegenerateTarget",
    "EmptyTrace",
    "EuroParams",
    "EuroState",
    "EventRecord",
    "FingermapError",
    "FrameResult",
    "HandFrame",
    "HandTrack",
    "IkConfig",
    "InfeasibleClass",
    "MalformedFrame",
    "MalformedHeader",
    "MappingParams",
    "MappingSession",
    "MissingJoint",
    "NoIntersection",
    "NonMonotonicTime",
    "Pose",
    "ProtocolError",
    "ReachSpec",
    "Rotation",
    "Summary",
    "Target",
    "TargetLayout",
    "TaskRecord",
    "TaskSpec",
    "TECH_ATTACH",
    "TECH_DIRECT",
    "TECH_HAND",
    "TECH_RAY",
    "TECHNIQUES",
    "TriggerConfig",
    "TriggerState",
    "Vec3",
    "VolumeReport",
    "clamp_target",
    "classify_distances",
    "confinement_violations",
    "estimate_anchors",
    "euro_step",
    "extension_offset",
    "filter_vec3",
    "generate_layout",
    "grab_select",
    "interaction_volume",
    "make_hand",
    "make_task_sequence",
    "map_attach",
    "map_direct",
    "map_ray",
    "merge_params",
    "min_jerk",
    "path_length",
    "path_ratio",
    "project_onto_plane",
    "ray_sphere_intersect",
    "retraction_fraction",
    "segment_tasks",
    "segment_trace",
    "simulate_study",
    "solve_two_bone",
    "summarize",
    "synth_reach",
    "thumb_button",
]
