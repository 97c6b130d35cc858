"""Hysteresis triggers: spec fixtures plus chatter-free alternation."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from conftest import frame_at
from fingermap.core import Vec3
from fingermap.selection import (
    GESTURE_GRAB,
    GESTURE_THUMB,
    PRESS,
    RELEASE,
    TriggerConfig,
    TriggerState,
    grab_select,
    step_triggers,
    thumb_button,
)


def thumb_frame(dist: float, t: float = 0.0):
    # thumb tip exactly dist from the middle knuckle
    middle_pip = Vec3(0.0, 1.0, 0.1)
    return frame_at(
        t,
        Vec3(0.0, 1.0, 0.0),
        joints={"middle_pip": middle_pip, "thumb_tip": middle_pip + Vec3(dist, 0.0, 0.0)},
    )


def grab_frame(mean_dist: float, t: float = 0.0):
    wrist = Vec3(0.0, 1.0, 0.0)
    return frame_at(
        t,
        wrist,
        joints={
            "middle_tip": wrist + Vec3(0.0, 0.0, mean_dist),
            "ring_tip": wrist + Vec3(0.0, mean_dist, 0.0),
            "pinky_tip": wrist + Vec3(mean_dist, 0.0, 0.0),
        },
    )


def run_thumb(dists: list[float], cfg: TriggerConfig = TriggerConfig()) -> list[str]:
    state = TriggerState()
    events = []
    for i, d in enumerate(dists):
        event, state = thumb_button(thumb_frame(d, i * 0.01), "right", cfg, state)
        if event is not None:
            events.append(event)
    return events


def run_grab(dists: list[float], cfg: TriggerConfig = TriggerConfig()) -> list[str]:
    state = TriggerState()
    events = []
    for i, d in enumerate(dists):
        event, state = grab_select(grab_frame(d, i * 0.01), "right", cfg, state)
        if event is not None:
            events.append(event)
    return events


def test_open_hand_no_thumb_event() -> None:
    assert run_thumb([0.08]) == []


def test_thumb_press_fires_exactly_once() -> None:
    assert run_thumb([0.03, 0.012]) == [PRESS]


def test_thumb_band_oscillation_after_press_is_silent() -> None:
    dists = [0.03, 0.012] + [0.014, 0.022] * 10
    assert run_thumb(dists) == [PRESS]


def test_thumb_full_cycle() -> None:
    assert run_thumb([0.03, 0.012, 0.020, 0.030, 0.012]) == [PRESS, RELEASE, PRESS]


def test_open_grab_no_event() -> None:
    assert run_grab([0.17]) == []


def test_grab_press_once() -> None:
    assert run_grab([0.17, 0.07]) == [PRESS]


def test_grab_hover_below_release_stays_pressed() -> None:
    assert run_grab([0.17, 0.07, 0.10, 0.10, 0.11]) == [PRESS]


def test_grab_release_above_band() -> None:
    assert run_grab([0.17, 0.07, 0.13]) == [PRESS, RELEASE]


def test_step_triggers_reports_both_gestures() -> None:
    cfg = TriggerConfig()
    state = TriggerState()
    wrist = Vec3(0.0, 1.0, 0.0)
    middle_pip = wrist + Vec3(0.0, 0.0, 0.1)
    frame = frame_at(
        0.0,
        wrist,
        joints={
            "middle_pip": middle_pip,
            "thumb_tip": middle_pip + Vec3(0.01, 0.0, 0.0),
            "middle_tip": wrist + Vec3(0.0, 0.0, 0.05),
            "ring_tip": wrist + Vec3(0.0, 0.05, 0.0),
            "pinky_tip": wrist + Vec3(0.05, 0.0, 0.0),
        },
    )
    events, state = step_triggers(frame, "right", cfg, state)
    assert sorted(g for g, _ in events) == [GESTURE_GRAB, GESTURE_THUMB]
    assert all(kind == PRESS for _, kind in events)
    assert state.thumb_pressed and state.grab_pressed


def test_config_validation() -> None:
    TriggerConfig().validate()
    with pytest.raises(ValueError):
        TriggerConfig(thumb_press_dist=0.03, thumb_release_dist=0.02).validate()
    with pytest.raises(ValueError):
        TriggerConfig(grab_press_dist=0.0).validate()


def assert_strict_alternation(events: list[str]) -> None:
    expected = PRESS
    for e in events:
        assert e == expected
        expected = RELEASE if expected == PRESS else PRESS


@given(st.integers(min_value=0, max_value=100_000))
def test_random_walk_events_strictly_alternate(seed: int) -> None:
    rng = random.Random(seed)
    d = rng.uniform(0.005, 0.04)
    dists = []
    for _ in range(120):
        d = min(max(d + rng.uniform(-0.006, 0.006), 0.001), 0.05)
        dists.append(d)
    assert_strict_alternation(run_thumb(dists))


@given(st.integers(min_value=0, max_value=100_000))
def test_grab_random_walk_alternates(seed: int) -> None:
    rng = random.Random(seed)
    d = rng.uniform(0.05, 0.2)
    dists = []
    for _ in range(120):
        d = min(max(d + rng.uniform(-0.02, 0.02), 0.01), 0.25)
        dists.append(d)
    assert_strict_alternation(run_grab(dists))
