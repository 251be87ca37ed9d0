"""Discretized reachability game over needle states.

The needle (controller) decides at every ``PHASE`` location whether to
rotate the bevel or let the uncontrollable feed step happen. Target windows
are checked after each feed step, in order; reaching the last one moves the
game through ``STRATEGY`` (tagged with the rotation count) into ``SUCCESS``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .errors import ConfigError, IllegalActionError
from .kinematics import (
    MAX_ROTATIONS,
    KinematicsConfig,
    MotionPlan,
    NeedleState,
    arc_step,
    flip_direction,
    validate_plan,
)


class Phase(enum.Enum):
    PHASE = "Phase"
    WAIT = "Wait"
    TURN = "Turn"
    FAIL = "Fail"
    STRATEGY = "StrategyWithTurn"
    SUCCESS = "Success"


class Action(enum.Enum):
    ROTATE = "rotate"
    STEP = "step"


@dataclass(frozen=True)
class TargetSpec:
    tx: int
    ty: int
    dev: int = 0

    def __post_init__(self):
        if self.dev < 0:
            raise ConfigError(f"dev must be nonnegative, got {self.dev}")

    def with_dev(self, dev: int) -> "TargetSpec":
        return replace(self, dev=dev)


@dataclass(frozen=True)
class GameConfig:
    targets: tuple[TargetSpec, ...]
    horizon: int
    kinematics: KinematicsConfig = field(default_factory=KinematicsConfig)
    max_rotations: int = MAX_ROTATIONS
    prune: bool = False

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if not self.targets:
            raise ConfigError("at least one target is required")
        if not isinstance(self.horizon, int) or self.horizon <= 0:
            raise ConfigError(f"horizon must be a positive integer, got {self.horizon!r}")
        if not 0 <= self.max_rotations <= MAX_ROTATIONS:
            raise ConfigError(f"max_rotations must be in 0..{MAX_ROTATIONS}, got {self.max_rotations}")

    def with_dev(self, dev: int) -> "GameConfig":
        return replace(self, targets=tuple(t.with_dev(dev) for t in self.targets))


@dataclass(frozen=True)
class GameState:
    phase: Phase
    needle: NeedleState
    next_target: int = 0
    feeds: int = 0  # feed steps taken; the horizon is counted in these
    trail: tuple[Phase, ...] = ()  # transient locations passed by the last move

    @property
    def terminal(self) -> bool:
        return self.phase in (Phase.SUCCESS, Phase.FAIL)

    @property
    def label(self) -> str:
        """Location name with the rotation index, e.g. ``Phase1`` or ``Turn2``."""
        if self.phase in (Phase.PHASE, Phase.TURN):
            return f"{self.phase.value}{self.needle.rotations_used}"
        return self.phase.value


@dataclass(frozen=True)
class Outcome:
    success: bool
    rotations: int  # flips performed before the run ended
    step: int  # feed step at which Success/Fail was entered

    def __str__(self):
        return f"Success({self.rotations})" if self.success else "Fail"


def in_window(pos: tuple[int, int], target: TargetSpec) -> bool:
    x, y = pos
    return (
        target.tx - target.dev <= x <= target.tx + target.dev
        and target.ty - target.dev <= y <= target.ty + target.dev
    )


def initial_game_state(needle: NeedleState) -> GameState:
    return GameState(Phase.PHASE, needle)


def _window_unreachable(pos: tuple[int, int], target: TargetSpec, budget: float) -> bool:
    # chord never exceeds arc length, so a box farther than the remaining feed is out of reach
    dx = max(0, abs(pos[0] - target.tx) - target.dev)
    dy = max(0, abs(pos[1] - target.ty) - target.dev)
    return math.hypot(dx, dy) > budget + 1.0


def advance(gs: GameState, action: Action, cfg: GameConfig) -> GameState:
    """Play one controllable decision from a ``PHASE`` location."""
    if gs.phase is not Phase.PHASE:
        raise IllegalActionError(f"no decision possible in location {gs.label}")
    kin = cfg.kinematics

    if action is Action.ROTATE:
        if gs.needle.rotations_used >= cfg.max_rotations:
            raise IllegalActionError(
                f"rotation budget exhausted ({gs.needle.rotations_used} of {cfg.max_rotations})"
            )
        needle = flip_direction(gs.needle, cfg.max_rotations, kin.rotation_dwell)
        # position is unchanged, and it already failed the current window after the last step
        return replace(gs, needle=needle, trail=(Phase.TURN, Phase.PHASE))

    if action is not Action.STEP:
        raise IllegalActionError(f"unknown action {action!r}")

    needle = arc_step(gs.needle, kin)
    feeds = gs.feeds + 1
    pos = needle.fixed(kin.scale)
    nxt = gs.next_target
    while nxt < len(cfg.targets) and in_window(pos, cfg.targets[nxt]):
        nxt += 1
    if nxt == len(cfg.targets):
        return GameState(Phase.SUCCESS, needle, nxt, feeds, (Phase.WAIT, Phase.STRATEGY, Phase.SUCCESS))
    if feeds >= cfg.horizon:
        return GameState(Phase.FAIL, needle, nxt, feeds, (Phase.WAIT, Phase.FAIL))
    if cfg.prune:
        budget = (cfg.horizon - feeds) * kin.step_length * kin.units_per_um
        if _window_unreachable(pos, cfg.targets[nxt], budget):
            return GameState(Phase.FAIL, needle, nxt, feeds, (Phase.WAIT, Phase.FAIL))
    return GameState(Phase.PHASE, needle, nxt, feeds, (Phase.WAIT, Phase.PHASE))


def play(init: NeedleState | GameState, plan: MotionPlan, cfg: GameConfig) -> list[GameState]:
    """All decision/terminal states visited when playing ``plan``."""
    validate_plan(plan.rotations, cfg.horizon, cfg.max_rotations)
    gs = init if isinstance(init, GameState) else initial_game_state(init)
    pending = set(plan.rotations)
    states = [gs]
    while not gs.terminal:
        if gs.feeds in pending and gs.needle.rotations_used < cfg.max_rotations:
            pending.discard(gs.feeds)
            gs = advance(gs, Action.ROTATE, cfg)
            states.append(gs)
        gs = advance(gs, Action.STEP, cfg)
        states.append(gs)
    return states


def classify_run(init: NeedleState | GameState, plan: MotionPlan, cfg: GameConfig) -> Outcome:
    """Success(X) or Fail for a plan; X counts the flips done before Success."""
    start = init.needle if isinstance(init, GameState) else init
    final = play(init, plan, cfg)[-1]
    flips = final.needle.rotations_used - start.rotations_used
    return Outcome(final.phase is Phase.SUCCESS, flips, final.feeds)


def first_hits(points: Sequence[tuple[int, int]], targets: Iterable[TargetSpec]) -> list[int] | None:
    """Greedy in-order window hits over post-step points.

    ``points[0]`` is the starting state and never counts. Returns the index of
    the point that consumed each target, or None if some target is missed.
    """
    hits = []
    t = 1
    for target in targets:
        while t < len(points) and not in_window(points[t], target):
            t += 1
        if t >= len(points):
            return None
        hits.append(t)
    return hits
