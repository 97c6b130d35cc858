"""Selection gestures detected from the physical hand skeleton.

Two triggers, both hysteresis-gated so a noisy distance hovering near a
threshold cannot chatter:

* thumb_button: thumb tip touching the middle-finger knuckle.
* grab_select: middle/ring/pinky tips curling toward the wrist.

Pinch (thumb-index) is deliberately not offered; the index finger is
reserved for driving the arm mapping.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .core import HandFrame

PRESS = "press"
RELEASE = "release"

GESTURE_THUMB = "thumb_button"
GESTURE_GRAB = "grab_select"


@dataclass(frozen=True, slots=True)
class TriggerConfig:
    """Press/release distance pairs (meters); release above press for hysteresis."""

    thumb_press_dist: float = 0.015
    thumb_release_dist: float = 0.025
    grab_press_dist: float = 0.09
    grab_release_dist: float = 0.12

    def validate(self) -> None:
        if not 0.0 < self.thumb_press_dist < self.thumb_release_dist:
            raise ValueError("need 0 < thumb_press_dist < thumb_release_dist")
        if not 0.0 < self.grab_press_dist < self.grab_release_dist:
            raise ValueError("need 0 < grab_press_dist < grab_release_dist")


@dataclass(frozen=True, slots=True)
class TriggerState:
    """Pressed flags for one hand, one per gesture."""

    thumb_pressed: bool = False
    grab_pressed: bool = False


def _hysteresis(pressed: bool, dist: float, press_at: float, release_at: float) -> tuple[str | None, bool]:
    if not pressed and dist < press_at:
        return PRESS, True
    if pressed and dist > release_at:
        return RELEASE, False
    return None, pressed


def thumb_button(
    frame: HandFrame, side: str, cfg: TriggerConfig, state: TriggerState
) -> tuple[str | None, TriggerState]:
    """Press when the thumb tip reaches the middle knuckle; returns (event, state)."""
    hand = frame.hand(side)
    dist = hand.joint("thumb_tip", side).distance(hand.joint("middle_pip", side))
    event, pressed = _hysteresis(
        state.thumb_pressed, dist, cfg.thumb_press_dist, cfg.thumb_release_dist
    )
    return event, replace(state, thumb_pressed=pressed)


def grab_select(
    frame: HandFrame, side: str, cfg: TriggerConfig, state: TriggerState
) -> tuple[str | None, TriggerState]:
    """Press when middle/ring/pinky tips curl toward the wrist (mean distance)."""
    hand = frame.hand(side)
    wrist = hand.wrist.position
    dist = (
        hand.joint("middle_tip", side).distance(wrist)
        + hand.joint("ring_tip", side).distance(wrist)
        + hand.joint("pinky_tip", side).distance(wrist)
    ) / 3.0
    event, pressed = _hysteresis(
        state.grab_pressed, dist, cfg.grab_press_dist, cfg.grab_release_dist
    )
    return event, replace(state, grab_pressed=pressed)


def step_triggers(
    frame: HandFrame, side: str, cfg: TriggerConfig, state: TriggerState
) -> tuple[list[tuple[str, str]], TriggerState]:
    """Run both gestures; returns ([(gesture, event), ...], next state)."""
    events: list[tuple[str, str]] = []
    thumb_event, state = thumb_button(frame, side, cfg, state)
    if thumb_event is not None:
        events.append((GESTURE_THUMB, thumb_event))
    grab_event, state = grab_select(frame, side, cfg, state)
    if grab_event is not None:
        events.append((GESTURE_GRAB, grab_event))
    return events, state
