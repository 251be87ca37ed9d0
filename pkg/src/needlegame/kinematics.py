"""Planar circular-arc kinematics of a bevel-tip needle.

The tip moves forward along an arc of fixed radius. The bevel orientation
selects the turning side (``dir`` = +1 turns left, -1 turns right) and a
rotation of the needle flips it. Positions are kept as floats in
micrometers and only quantized when exported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import ConfigError, InvalidPlanError, PlanInfeasibleError
from .units import UM_PER_MM, quantize

MAX_ROTATIONS = 2


@dataclass(frozen=True)
class KinematicsConfig:
    v: float = 700.0  # um / s
    dt: float = 1000.0  # ms
    radius: float = 50_000.0  # um
    rotation_dwell: int = 0  # steps consumed by a rotation
    scale: int = 1000  # integer units per mm
    bevel_angle: float = 45.0  # deg, metadata only
    motor_step: float = 1.8  # deg, metadata only

    def __post_init__(self):
        for name in ("v", "dt", "radius"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive and finite, got {value!r}")
        if not isinstance(self.scale, int) or self.scale <= 0:
            raise ConfigError(f"scale must be a positive integer, got {self.scale!r}")
        if not isinstance(self.rotation_dwell, int) or self.rotation_dwell < 0:
            raise ConfigError(f"rotation_dwell must be a nonnegative integer, got {self.rotation_dwell!r}")
        if self.step_length >= math.pi * self.radius:
            raise ConfigError(
                f"step length {self.step_length} um is not small against the arc radius {self.radius} um"
            )

    @property
    def step_length(self) -> float:
        """Arc length fed per time step, in micrometers."""
        return self.v * self.dt / 1000.0

    @property
    def curvature(self) -> float:
        return 1.0 / self.radius

    @property
    def turn_per_step(self) -> float:
        """Heading change per step in radians (curvature times arc length)."""
        return self.step_length / self.radius

    @property
    def chord(self) -> float:
        return 2.0 * self.radius * math.sin(self.step_length / (2.0 * self.radius))

    @property
    def units_per_um(self) -> float:
        return self.scale / UM_PER_MM

    def half_step_units(self) -> int:
        """Smallest integer window half-width covering half a feed step."""
        return math.ceil(self.step_length * self.units_per_um / 2.0)


@dataclass(frozen=True)
class NeedleState:
    x: float  # um
    y: float  # um
    theta: float  # rad
    dir: int = 1
    rotations_used: int = 0
    step_index: int = 0

    def __post_init__(self):
        if self.dir not in (1, -1):
            raise ConfigError(f"dir must be +1 or -1, got {self.dir!r}")

    def fixed(self, scale: int = 1000) -> tuple[int, int]:
        """Tip position in integer units."""
        f = scale / UM_PER_MM
        return quantize(self.x * f), quantize(self.y * f)


@dataclass(frozen=True)
class MotionPlan:
    """Rotation step indices of a deterministic control sequence.

    A rotation at index k flips the bevel immediately before the step that
    takes the needle from step k to step k + 1.
    """

    rotations: tuple[int, ...] = ()
    initial: NeedleState | None = None

    def __post_init__(self):
        object.__setattr__(self, "rotations", tuple(int(k) for k in self.rotations))

    def sort_key(self) -> tuple:
        return (len(self.rotations), self.rotations)

    def shifted(self, offset: int) -> "MotionPlan":
        return replace(self, rotations=tuple(k + offset for k in self.rotations))


Trace = tuple[NeedleState, ...]


def arc_step(state: NeedleState, cfg: KinematicsConfig) -> NeedleState:
    """Advance the tip by one feed step along its current arc.

    Uses the chord form of the exact arc update: the tip moves by the chord
    2 r sin(s / 2r) in the direction of the mean heading over the step.
    """
    d = state.dir
    turn = cfg.turn_per_step
    mid = state.theta + d * (turn / 2.0)
    c = cfg.chord
    return NeedleState(
        x=state.x + c * math.cos(mid),
        y=state.y + c * math.sin(mid),
        theta=state.theta + d * turn,
        dir=d,
        rotations_used=state.rotations_used,
        step_index=state.step_index + 1,
    )


def flip_direction(state: NeedleState, max_rotations: int = MAX_ROTATIONS, dwell: int = 0) -> NeedleState:
    if state.rotations_used >= max_rotations:
        raise PlanInfeasibleError(
            f"rotation budget exhausted ({state.rotations_used} of {max_rotations} used)"
        )
    return replace(
        state,
        dir=-state.dir,
        rotations_used=state.rotations_used + 1,
        step_index=state.step_index + dwell,
    )


def validate_plan(rotations: Sequence[int], horizon: int, max_rotations: int = MAX_ROTATIONS) -> None:
    if len(rotations) > max_rotations:
        raise InvalidPlanError(f"{len(rotations)} rotations exceed the budget of {max_rotations}")
    prev = -1
    for k in rotations:
        if not isinstance(k, int) or k < 0 or k >= horizon:
            raise InvalidPlanError(f"rotation index {k!r} outside [0, {horizon})")
        if k <= prev:
            raise InvalidPlanError(f"rotation indices must be strictly increasing, got {tuple(rotations)}")
        prev = k


def simulate_plan(
    init: NeedleState,
    plan: MotionPlan,
    cfg: KinematicsConfig,
    horizon: int,
    max_rotations: int = MAX_ROTATIONS,
) -> Trace:
    """Play a plan for ``horizon`` feed steps; returns ``horizon + 1`` states."""
    if horizon < 0:
        raise ConfigError(f"horizon must be nonnegative, got {horizon}")
    validate_plan(plan.rotations, horizon, max_rotations)
    pending = set(plan.rotations)
    state = init
    out = [state]
    for k in range(horizon):
        if k in pending:
            state = flip_direction(state, max_rotations + init.rotations_used, cfg.rotation_dwell)
        state = arc_step(state, cfg)
        out.append(state)
    return tuple(out)


def trace_points(trace: Sequence[NeedleState], scale: int = 1000) -> list[tuple[int, int]]:
    return [s.fixed(scale) for s in trace]
