"""Observation traces: CSV ingestion, synthetic generation, target selection.

File format::

    # rotations: 30,75
    # label: One_Rot_1
    step,x_um,y_um
    0,0,0
    1,700,5

Comment lines are optional and may appear before the header. All numbers
are decimal integers in scaled units.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, TraceParseError
from .game import TargetSpec
from .kinematics import KinematicsConfig, MotionPlan, NeedleState, simulate_plan
from .units import Units, from_fixed, to_fixed

__all__ = [
    "ObservationTrace",
    "TracePoint",
    "Units",
    "to_fixed",
    "from_fixed",
    "load_trace",
    "save_trace",
    "dumps_trace",
    "loads_trace",
    "select_targets",
    "select_indices",
    "generate_trace",
]

HEADER = "step,x_um,y_um"


@dataclass(frozen=True)
class TracePoint:
    step: int
    x: int
    y: int

    @property
    def pos(self) -> tuple[int, int]:
        return (self.x, self.y)


@dataclass(frozen=True)
class ObservationTrace:
    points: tuple[TracePoint, ...]
    actual_rotations: tuple[int, ...] | None = None
    label: str = ""

    def __post_init__(self):
        pts = tuple(p if isinstance(p, TracePoint) else TracePoint(*p) for p in self.points)
        object.__setattr__(self, "points", pts)
        if not pts:
            raise ConfigError("trace is empty")
        for a, b in zip(pts, pts[1:]):
            if b.step <= a.step:
                raise ConfigError(f"step indices must increase strictly ({a.step} then {b.step})")
        if self.actual_rotations is not None:
            object.__setattr__(self, "actual_rotations", tuple(self.actual_rotations))

    def __len__(self):
        return len(self.points)

    @property
    def positions(self) -> list[tuple[int, int]]:
        return [p.pos for p in self.points]

    def window(self, first_step: int, last_step: int | None = None, rebase: bool = True) -> "ObservationTrace":
        """Points with ``first_step <= step <= last_step``; optionally re-indexed to start at 0."""
        pts = [p for p in self.points if p.step >= first_step and (last_step is None or p.step <= last_step)]
        if rebase:
            pts = [TracePoint(p.step - first_step, p.x, p.y) for p in pts]
        rots = self.actual_rotations
        if rots is not None and rebase:
            rots = tuple(k - first_step for k in rots if k >= first_step)
        return ObservationTrace(tuple(pts), rots, self.label)


def _parse_int(text: str, lineno: int, what: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise TraceParseError(f"{what} {text.strip()!r} is not an integer", lineno) from None


def loads_trace(text: str) -> ObservationTrace:
    rotations = None
    label = ""
    header_seen = False
    points: list[TracePoint] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            key = key.strip().lower()
            if key == "rotations":
                value = value.strip()
                rotations = tuple(_parse_int(v, lineno, "rotation") for v in value.split(",")) if value else ()
            elif key == "label":
                label = value.strip()
            continue
        if not header_seen:
            if line.replace(" ", "") != HEADER:
                raise TraceParseError(f"expected header {HEADER!r}", lineno)
            header_seen = True
            continue
        cells = line.split(",")
        if len(cells) != 3:
            raise TraceParseError(f"expected 3 fields, got {len(cells)}", lineno)
        step, x, y = (_parse_int(c, lineno, name) for c, name in zip(cells, ("step", "x", "y")))
        if points and step <= points[-1].step:
            raise TraceParseError(f"step {step} does not increase (previous {points[-1].step})", lineno)
        points.append(TracePoint(step, x, y))
    if not points:
        raise TraceParseError("trace contains no data rows", None if header_seen else 1)
    return ObservationTrace(tuple(points), rotations, label)


def load_trace(path: str | os.PathLike) -> ObservationTrace:
    with open(path, encoding="utf-8", newline="") as fh:
        return loads_trace(fh.read())


def dumps_trace(trace: ObservationTrace) -> str:
    lines = []
    if trace.actual_rotations is not None:
        lines.append("# rotations: " + ",".join(str(k) for k in trace.actual_rotations))
    if trace.label:
        lines.append(f"# label: {trace.label}")
    lines.append(HEADER)
    lines.extend(f"{p.step},{p.x},{p.y}" for p in trace.points)
    return "\n".join(lines) + "\n"


def save_trace(trace: ObservationTrace, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_trace(trace))


def select_indices(length: int, n_p: int) -> list[int]:
    """Equally spaced indices into a trace of ``length`` points, last one included."""
    if not 1 <= n_p <= length:
        raise ConfigError(f"n_p must be in 1..{length}, got {n_p}")
    if n_p == 1:
        return [length - 1]
    span = length - 1
    # round half up in integer arithmetic
    return [(2 * i * span + (n_p - 1)) // (2 * (n_p - 1)) for i in range(n_p)]


def select_targets(
    trace: ObservationTrace,
    n_p: int,
    dev: int = 0,
    initial: tuple[int, int] | None = None,
) -> list[TargetSpec]:
    idx = select_indices(len(trace), n_p)
    pts = [trace.points[i] for i in idx]
    if initial is not None and len(pts) > 1 and pts[0].pos == tuple(initial):
        pts = pts[1:]
    return [TargetSpec(p.x, p.y, dev) for p in pts]


def generate_trace(
    plan: MotionPlan,
    cfg: KinematicsConfig,
    horizon: int,
    init: NeedleState | None = None,
    noise: int = 0,
    seed: int | None = None,
    label: str = "",
) -> ObservationTrace:
    """Simulate ``plan`` and export it as a trace, optionally with bounded noise.

    Noise is uniform over the integers in ``[-noise, noise]``, drawn
    independently per coordinate from a generator seeded with ``seed``.
    """
    if init is None:
        init = plan.initial if plan.initial is not None else NeedleState(0.0, 0.0, 0.0, 1)
    states = simulate_plan(init, plan, cfg, horizon)
    xy = np.array([s.fixed(cfg.scale) for s in states], dtype=np.int64)
    if noise:
        if noise < 0:
            raise ConfigError(f"noise bound must be nonnegative, got {noise}")
        if seed is None:
            raise ConfigError("a seed is required for noisy traces")
        rng = np.random.default_rng(seed)
        xy = xy + rng.integers(-noise, noise, size=xy.shape, endpoint=True)
    points = tuple(TracePoint(s.step_index, int(x), int(y)) for s, (x, y) in zip(states, xy))
    return ObservationTrace(points, plan.rotations, label)

