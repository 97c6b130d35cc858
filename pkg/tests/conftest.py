"""Shared builders for the test suite."""

from __future__ import annotations

import math
import random

import pytest

from fingermap.core import BodyCalibration, HandFrame, HandTrack, Pose, Rotation, Vec3

IDENTITY_HMD = Pose(Vec3(0.0, 1.2, 0.0), Rotation.identity())


def t3(v: Vec3) -> tuple[float, float, float]:
    return (v.x, v.y, v.z)


def v3(t: tuple[float, float, float]) -> Vec3:
    return Vec3(t[0], t[1], t[2])


def hand_from_joints(
    wrist: Vec3,
    joints: dict[str, Vec3],
    rotation: Rotation = Rotation.identity(),
) -> HandTrack:
    """A hand with exactly the given joints; the rest filled in nearby."""
    base = {
        "index_mcp": wrist + Vec3(0.0, 0.0, 0.08),
        "index_pip": wrist + Vec3(0.0, 0.0, 0.125),
        "index_tip": wrist + Vec3(0.0, 0.0, 0.175),
        "middle_pip": wrist + Vec3(-0.012, 0.0, 0.10),
        "middle_tip": wrist + Vec3(-0.02, 0.0, 0.17),
        "ring_tip": wrist + Vec3(-0.04, 0.0, 0.165),
        "pinky_tip": wrist + Vec3(-0.055, 0.0, 0.15),
        "thumb_tip": wrist + Vec3(-0.05, -0.02, 0.10),
    }
    base.update(joints)
    return HandTrack(wrist=Pose(wrist, rotation), joints=base)


def frame_at(
    t: float,
    wrist: Vec3,
    joints: dict[str, Vec3] | None = None,
    side: str = "right",
    hmd: Pose = IDENTITY_HMD,
    rotation: Rotation = Rotation.identity(),
) -> HandFrame:
    hand = hand_from_joints(wrist, joints or {}, rotation)
    return HandFrame(t=t, hmd=hmd, hands={side: hand})


def random_unit(rng: random.Random) -> Vec3:
    while True:
        v = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))
        n = v.norm()
        if 1e-3 < n <= 1.0:
            return v * (1.0 / n)


def random_rotation(rng: random.Random) -> Rotation:
    axis = random_unit(rng)
    return Rotation.from_axis_angle(axis, rng.uniform(-math.pi, math.pi))


@pytest.fixture
def calib() -> BodyCalibration:
    return BodyCalibration()
