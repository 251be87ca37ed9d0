"""Flat ``key = value`` run configuration shared by all CLI commands.

Example file::

    # kinematics
    v = 700
    dt = 1000
    radius = 50000
    # game
    horizon = 120
    dev = 350
    points = 5

Every key has a matching command-line flag (``dev_bounds`` is
``--dev-bounds``); flags override file values.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass

from .calibration import angle_grid
from .errors import ConfigError
from .kinematics import MAX_ROTATIONS, KinematicsConfig, NeedleState


def int_list(text: str) -> tuple[int, ...]:
    text = text.strip()
    if text in ("", "-"):
        return ()
    return tuple(int(part) for part in text.split(","))


def _int_pair(text: str) -> tuple[int, int]:
    parts = int_list(text)
    if len(parts) != 2:
        raise ValueError(f"expected two integers 'lo,hi', got {text!r}")
    return parts


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_int(text: str) -> int | None:
    return None if text.strip().lower() in ("", "none") else int(text)


def _optional_float(text: str) -> float | None:
    return None if text.strip().lower() in ("", "none") else float(text)


@dataclass(frozen=True)
class RunConfig:
    # kinematics
    v: float = 700.0
    dt: float = 1000.0
    radius: float = 50_000.0
    rotation_dwell: int = 0
    scale: int = 1000
    # initial needle state (um, degrees)
    x0: float = 0.0
    y0: float = 0.0
    theta0: float = 0.0
    dir0: int = 1
    # game and synthesis
    horizon: int | None = None
    max_rotations: int = MAX_ROTATIONS
    prune: bool = False
    dev: int = 350
    dev_bounds: tuple[int, int] = (0, 2000)
    points: int = 5
    rotations: int | None = None
    workers: int = 1
    # calibration and fitting
    angle_min: float = -18.0
    angle_max: float = 18.0
    angle_step: float = 1.8
    prefix_mm: float = 5.0
    calibration_slack: float | None = None
    # sweeps
    sweep_devs: tuple[int, ...] = (10, 20, 50, 100, 200)
    sweep_points: tuple[int, ...] = (1, 2, 3, 5)
    # synthetic traces
    noise: int = 0
    seed: int | None = None

    def __post_init__(self):
        self.kinematics()
        if self.dir0 not in (1, -1):
            raise ConfigError(f"dir0 must be +1 or -1, got {self.dir0}")
        if self.horizon is not None and self.horizon <= 0:
            raise ConfigError(f"horizon must be positive, got {self.horizon}")
        if not 0 <= self.max_rotations <= MAX_ROTATIONS:
            raise ConfigError(f"max_rotations must be in 0..{MAX_ROTATIONS}")
        if self.rotations is not None and not 0 <= self.rotations <= self.max_rotations:
            raise ConfigError(f"rotations must be in 0..{self.max_rotations}, got {self.rotations}")
        if self.dev < 0:
            raise ConfigError(f"dev must be nonnegative, got {self.dev}")
        lo, hi = self.dev_bounds
        if lo < 0 or lo > hi:
            raise ConfigError(f"invalid dev bounds {self.dev_bounds}")
        if self.points < 1 or any(n < 1 for n in self.sweep_points):
            raise ConfigError("point counts must be positive")
        if any(d < 0 for d in self.sweep_devs):
            raise ConfigError("sweep deviations must be nonnegative")
        if self.workers < 1:
            raise ConfigError(f"workers must be positive, got {self.workers}")
        if self.noise < 0:
            raise ConfigError(f"noise must be nonnegative, got {self.noise}")
        if self.noise > 0 and self.seed is None:
            raise ConfigError("a seed is required when noise > 0")
        if self.prefix_mm <= 0:
            raise ConfigError(f"prefix_mm must be positive, got {self.prefix_mm}")
        for name in ("x0", "y0", "theta0", "angle_min", "angle_max", "angle_step"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        self.angle_grid()

    def kinematics(self) -> KinematicsConfig:
        return KinematicsConfig(
            v=self.v, dt=self.dt, radius=self.radius, rotation_dwell=self.rotation_dwell, scale=self.scale
        )

    def initial_state(self) -> NeedleState:
        return NeedleState(self.x0, self.y0, math.radians(self.theta0), self.dir0)

    def angle_grid(self) -> tuple[float, ...]:
        return angle_grid(self.angle_min, self.angle_max, self.angle_step)

    def updated(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


_PARSERS = {
    "v": float,
    "dt": float,
    "radius": float,
    "rotation_dwell": int,
    "scale": int,
    "x0": float,
    "y0": float,
    "theta0": float,
    "dir0": int,
    "horizon": _optional_int,
    "max_rotations": int,
    "prune": _bool,
    "dev": int,
    "dev_bounds": _int_pair,
    "points": int,
    "rotations": _optional_int,
    "workers": int,
    "angle_min": float,
    "angle_max": float,
    "angle_step": float,
    "prefix_mm": float,
    "calibration_slack": _optional_float,
    "sweep_devs": int_list,
    "sweep_points": int_list,
    "noise": int,
    "seed": _optional_int,
}

assert set(_PARSERS) == {f.name for f in dataclasses.fields(RunConfig)}

KEYS = tuple(_PARSERS)


def parse_value(key: str, text: str):
    try:
        parser = _PARSERS[key]
    except KeyError:
        raise ConfigError(f"unknown config key {key!r}") from None
    try:
        return parser(text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from None


def parse_config(text: str) -> dict:
    """Raw key/value pairs from config text; later duplicates are an error."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = parse_value(key, value.strip())
    return values


def load_config(path: str | os.PathLike | None, overrides: dict | None = None) -> RunConfig:
    """File values (if any) with ``overrides`` on top, validated."""
    values = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            values = parse_config(fh.read())
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig(**values)


def _format(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value) if value else "-"
    return repr(value) if isinstance(value, float) else str(value)


def dumps_config(cfg: RunConfig) -> str:
    return "".join(f"{f.name} = {_format(getattr(cfg, f.name))}\n" for f in dataclasses.fields(cfg))
