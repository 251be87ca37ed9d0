"""Insertion-angle calibration from a rotation-free observed prefix.

Every candidate (angle, direction[, radius]) is simulated as a single arc
from the first observed point; the candidate with the smallest maximum
step-paired residual wins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import ConfigError, InsufficientDataError
from .kinematics import KinematicsConfig, NeedleState, arc_step
from .traceio import ObservationTrace


def angle_grid(lo_deg: float = -18.0, hi_deg: float = 18.0, step_deg: float = 1.8) -> tuple[float, ...]:
    """Multiples of ``step_deg`` within ``[lo_deg, hi_deg]``, in radians."""
    if step_deg <= 0 or lo_deg > hi_deg:
        raise ConfigError(f"invalid angle grid [{lo_deg}, {hi_deg}] step {step_deg}")
    first = math.ceil(lo_deg / step_deg - 1e-9)
    last = math.floor(hi_deg / step_deg + 1e-9)
    return tuple(math.radians(i * step_deg) for i in range(first, last + 1))


@dataclass(frozen=True)
class CalibrationRequest:
    prefix: ObservationTrace
    angle_grid: tuple[float, ...] = angle_grid()
    directions: tuple[int, ...] = (1, -1)
    kinematics: KinematicsConfig = KinematicsConfig()
    fit_radius: bool = False
    radius_grid: tuple[float, ...] | None = None


@dataclass(frozen=True)
class CalibrationResult:
    theta0: float
    dir0: int
    origin: tuple[int, int]
    radius_used: float
    residual_max: float
    residual_avg: float
    # handover data
    last_point: tuple[int, int]
    steps: int  # feed steps from the first to the last prefix point
    first_step: int
    kinematics: KinematicsConfig


def _arc_states(origin: NeedleState, cfg: KinematicsConfig, n: int) -> list[NeedleState]:
    states = [origin]
    for _ in range(n):
        states.append(arc_step(states[-1], cfg))
    return states


def _origin_state(res_origin: tuple[int, int], theta: float, d: int, cfg: KinematicsConfig) -> NeedleState:
    f = cfg.units_per_um
    return NeedleState(res_origin[0] / f, res_origin[1] / f, theta, d)


def residuals(prefix: ObservationTrace, theta: float, d: int, cfg: KinematicsConfig) -> list[float]:
    """Distance of each observed point to the model state with the same step index."""
    first = prefix.points[0]
    states = _arc_states(_origin_state(first.pos, theta, d, cfg), cfg, prefix.points[-1].step - first.step)
    out = []
    for p in prefix.points:
        x, y = states[p.step - first.step].fixed(cfg.scale)
        out.append(math.hypot(x - p.x, y - p.y))
    return out


def _check_request(req: CalibrationRequest) -> tuple[float, ...]:
    if len(req.prefix.points) < 2:
        raise InsufficientDataError(f"calibration needs at least 2 prefix points, got {len(req.prefix.points)}")
    if not req.angle_grid or not req.directions:
        raise ConfigError("angle grid and direction set must be nonempty")
    if any(d not in (1, -1) for d in req.directions):
        raise ConfigError(f"directions must be +1/-1, got {req.directions}")
    if req.fit_radius:
        radii = tuple(req.radius_grid or ())
        if not radii:
            raise ConfigError("fit_radius requires a nonempty radius grid")
        return radii
    return (req.kinematics.radius,)


def rank_candidates(req: CalibrationRequest) -> list[CalibrationResult]:
    """Every grid candidate, best first.

    Order: smaller max residual, smaller mean residual, smaller ``|theta|``,
    ``dir = +1`` before -1, smaller radius.
    """
    radii = _check_request(req)
    prefix = req.prefix
    first, last = prefix.points[0], prefix.points[-1]
    scored = []
    for radius in radii:
        cfg = req.kinematics if radius == req.kinematics.radius else replace(req.kinematics, radius=radius)
        for theta in req.angle_grid:
            for d in req.directions:
                res = residuals(prefix, theta, d, cfg)
                rmax, ravg = max(res), sum(res) / len(res)
                key = (rmax, ravg, abs(theta), d != 1, radius)
                scored.append((key, CalibrationResult(
                    theta0=theta,
                    dir0=d,
                    origin=first.pos,
                    radius_used=cfg.radius,
                    residual_max=rmax,
                    residual_avg=ravg,
                    last_point=last.pos,
                    steps=last.step - first.step,
                    first_step=first.step,
                    kinematics=cfg,
                )))
    scored.sort(key=lambda item: item[0])
    return [res for _, res in scored]


def estimate_insertion(req: CalibrationRequest) -> CalibrationResult:
    return rank_candidates(req)[0]


def fitted_arc(res: CalibrationResult) -> list[NeedleState]:
    """Model states of the fitted insertion arc, one per prefix step."""
    return _arc_states(_origin_state(res.origin, res.theta0, res.dir0, res.kinematics), res.kinematics, res.steps)


def initial_state(res: CalibrationResult) -> NeedleState:
    """Handover state for synthesis: tip at the last observed point, heading from the fit.

    When the fitted arc quantizes onto the observed point, its unrounded
    position is kept so a model-generated trace continues without rounding
    drift.
    """
    end = fitted_arc(res)[-1]
    if end.fixed(res.kinematics.scale) == tuple(res.last_point):
        x, y = end.x, end.y
    else:
        f = res.kinematics.units_per_um
        x, y = res.last_point[0] / f, res.last_point[1] / f
    return NeedleState(x, y, end.theta, res.dir0, rotations_used=0, step_index=0)


def calibrate(
    prefix: ObservationTrace,
    kinematics: KinematicsConfig,
    grid: Sequence[float] | None = None,
    directions: Sequence[int] = (1, -1),
) -> CalibrationResult:
    """Shortcut for :func:`estimate_insertion` with the default request fields."""
    req = CalibrationRequest(
        prefix=prefix,
        angle_grid=tuple(grid) if grid is not None else angle_grid(),
        directions=tuple(directions),
        kinematics=kinematics,
    )
    return estimate_insertion(req)
