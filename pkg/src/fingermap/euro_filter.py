"""Speed-adaptive low-pass smoothing for tracked joint positions.

Implements the 1-euro filter recurrence: each scalar channel is
exponentially smoothed with a cutoff that rises with the (itself
low-passed) signal speed, trading jitter suppression at rest for low
lag during fast motion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import Vec3
from .errors import NonMonotonicTime


@dataclass(frozen=True, slots=True)
class EuroParams:
    """Tuning for one filter: cutoff floor, speed coefficient, derivative cutoff."""

    min_cutoff: float = 1.0
    beta: float = 0.5
    d_cutoff: float = 1.0

    def validate(self) -> None:
        if self.min_cutoff <= 0.0:
            raise ValueError("min_cutoff must be positive")
        if self.d_cutoff <= 0.0:
            raise ValueError("d_cutoff must be positive")
        if self.beta < 0.0:
            raise ValueError("beta must be nonnegative")


@dataclass(frozen=True, slots=True)
class EuroState:
    """Per-channel filter memory. The zero value means `not initialized`."""

    value: float = 0.0
    derivative: float = 0.0
    t: float = 0.0
    initialized: bool = False


def smoothing_factor(cutoff: float, dt: float) -> float:
    """EMA weight for a first-order low-pass with the given cutoff and period."""
    tau = 1.0 / (2.0 * math.pi * cutoff)
    return 1.0 / (1.0 + tau / dt)


def euro_step(
    state: EuroState, params: EuroParams, x: float, t: float
) -> tuple[float, EuroState]:
    """Advance one channel by one sample; returns (smoothed x, next state).

    The first sample passes through unchanged. Timestamps must strictly
    increase once initialized.
    """
    if not state.initialized:
        return x, EuroState(value=x, derivative=0.0, t=t, initialized=True)
    dt = t - state.t
    if dt <= 0.0:
        raise NonMonotonicTime(f"timestamp {t} does not advance past {state.t}")

    dx = (x - state.value) / dt
    a_d = smoothing_factor(params.d_cutoff, dt)
    dx_hat = a_d * dx + (1.0 - a_d) * state.derivative

    cutoff = params.min_cutoff + params.beta * abs(dx_hat)
    a = smoothing_factor(cutoff, dt)
    x_hat = a * x + (1.0 - a) * state.value
    return x_hat, EuroState(value=x_hat, derivative=dx_hat, t=t, initialized=True)


Vec3States = tuple[EuroState, EuroState, EuroState]


def fresh_vec3_states() -> Vec3States:
    return (EuroState(), EuroState(), EuroState())


def filter_vec3(
    states: Vec3States, params: EuroParams, v: Vec3, t: float
) -> tuple[Vec3, Vec3States]:
    """Apply euro_step independently to each axis of a point."""
    x, sx = euro_step(states[0], params, v.x, t)
    y, sy = euro_step(states[1], params, v.y, t)
    z, sz = euro_step(states[2], params, v.z, t)
    return Vec3(x, y, z), (sx, sy, sz)
