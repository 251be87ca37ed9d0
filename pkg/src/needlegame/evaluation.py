"""Plan-count sweeps over generated traces and strategy fitting to observations."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .calibration import CalibrationRequest, CalibrationResult, angle_grid, initial_state, rank_candidates
from .errors import CoverageError, InsufficientDataError, NoStrategyError
from .game import GameConfig
from .kinematics import MAX_ROTATIONS, KinematicsConfig, MotionPlan, NeedleState, simulate_plan
from .synthesis import PlanSpace, SynthesisRequest, min_dev_search, optimal_plan
from .traceio import ObservationTrace, select_targets

PREFIX_MM = 5.0


@dataclass(frozen=True)
class FitReport:
    trace_label: str
    theta0: float
    dev_used: int
    n_points: int
    actual_rotations: tuple[int, ...] | None
    identified_rotations: tuple[int, ...]
    avg_error: float
    max_error: float
    dir0: int = 1
    plan_count: int = 1  # size of the strategy set at dev_used
    handover_step: int = 0
    plan: MotionPlan | None = dataclasses.field(default=None, compare=False, repr=False)
    calibration: CalibrationResult | None = dataclasses.field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SweepCell:
    dev: int
    n_points: int
    plan_count: int


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.6f}"
    if isinstance(value, (tuple, list)):
        return ",".join(_fmt(v) for v in value) if value else "-"
    text = str(value)
    return text.replace(" ", "_") if text else "-"


def format_pairs(pairs: Iterable[tuple[str, object]]) -> str:
    return " ".join(f"{k}={_fmt(v)}" for k, v in pairs)


def format_record(obj) -> str:
    """One ``key=value`` line with the dataclass fields in declaration order."""
    return format_pairs((f.name, getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.repr)


def format_sweep_table(cells: Sequence[SweepCell]) -> str:
    header = ("dev", "n_points", "plan_count")
    rows = [header] + [(str(c.dev), str(c.n_points), str(c.plan_count)) for c in cells]
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    return "\n".join("  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in rows) + "\n"


def pointwise_errors(plan: MotionPlan, cfg: KinematicsConfig, obs: ObservationTrace, horizon: int | None = None) -> list[float]:
    init = plan.initial if plan.initial is not None else NeedleState(0.0, 0.0, 0.0, 1)
    needed = obs.points[-1].step - init.step_index
    if horizon is None:
        horizon = max(needed, max(plan.rotations, default=-1) + 1, 0)
    elif horizon < needed:
        raise CoverageError(f"plan horizon {horizon} does not reach observed step {obs.points[-1].step}")
    states = {s.step_index: s for s in simulate_plan(init, plan, cfg, horizon)}
    errors = []
    for p in obs.points:
        s = states.get(p.step)
        if s is None:
            raise CoverageError(f"plan trace has no state at step {p.step}")
        x, y = s.fixed(cfg.scale)
        errors.append(math.hypot(x - p.x, y - p.y))
    return errors


def deviation_metrics(plan: MotionPlan, cfg: KinematicsConfig, obs: ObservationTrace, horizon: int | None = None) -> tuple[float, float]:
    """Average and maximum step-paired distance between plan and observation."""
    errors = pointwise_errors(plan, cfg, obs, horizon)
    return sum(errors) / len(errors), max(errors)


def prefix_steps(cfg: KinematicsConfig, prefix_mm: float = PREFIX_MM) -> int:
    """Feed steps needed to cover at least ``prefix_mm`` of insertion."""
    return max(1, math.ceil(prefix_mm * 1000.0 / cfg.step_length - 1e-9))


def fit_trace(
    obs: ObservationTrace,
    n_p: int = 5,
    dev_bounds: tuple[int, int] = (0, 2000),
    cfg: KinematicsConfig = KinematicsConfig(),
    grid: Sequence[float] | None = None,
    prefix_mm: float = PREFIX_MM,
    rotations: int | None = None,
    max_rotations: int = MAX_ROTATIONS,
    calibration_slack: float | None = None,
    workers: int = 1,
) -> FitReport:
    """Calibrate on the insertion prefix, then fit a strategy to the remainder.

    A noisy prefix of a few millimeters rarely pins down the insertion angle
    to one grid cell, so every calibration candidate whose max residual is
    within ``calibration_slack`` units of the best (default: one feed step)
    is handed to synthesis. Each yields its optimal minimum-deviation plan,
    and the candidate whose plan has the smallest max error over the whole
    remainder wins; ties go to the smaller deviation, then calibration
    order. With ``calibration_slack=0`` only the best calibration candidate
    (and exact ties) is used.

    Errors are measured over the remainder, where the synthesized plan is in
    charge; ``identified_rotations`` are given in the observation's own step
    indices.
    """
    first = obs.points[0].step
    cut = first + prefix_steps(cfg, prefix_mm)
    prefix = obs.window(first, cut, rebase=False)
    if len(prefix) < 2:
        raise InsufficientDataError(f"prefix up to step {cut} has {len(prefix)} point(s)")
    handover = prefix.points[-1].step
    rest = obs.window(handover)
    if len(rest) < 2:
        raise InsufficientDataError("no observations after the calibration prefix")
    ranked = rank_candidates(
        CalibrationRequest(prefix=prefix, angle_grid=tuple(grid) if grid is not None else angle_grid(), kinematics=cfg)
    )
    slack = cfg.step_length * cfg.units_per_um if calibration_slack is None else calibration_slack
    cutoff = ranked[0].residual_max + slack

    best = None
    for calib in ranked:
        if calib.residual_max > cutoff:
            break
        init = initial_state(calib)
        kin = calib.kinematics
        targets = select_targets(rest, min(n_p, len(rest)), 0, initial=init.fixed(kin.scale))
        game = GameConfig(tuple(targets), rest.points[-1].step, kin, max_rotations)
        try:
            dev, sset = min_dev_search(SynthesisRequest(game, init, rotations), dev_bounds, workers)
        except NoStrategyError:
            continue
        plan = optimal_plan(sset)
        avg, mx = deviation_metrics(plan, kin, rest)
        if best is None or (mx, dev) < (best[0], best[1]):
            best = (mx, dev, avg, plan, sset, calib, len(targets))
    if best is None:
        raise NoStrategyError(f"no strategy with dev <= {dev_bounds[1]}", calibration=ranked[0])

    mx, dev, avg, plan, sset, calib, n_targets = best
    offset = handover - first
    return FitReport(
        trace_label=obs.label,
        theta0=calib.theta0,
        dev_used=dev,
        n_points=n_targets,
        actual_rotations=obs.actual_rotations,
        identified_rotations=tuple(k + offset for k in plan.rotations),
        avg_error=avg,
        max_error=mx,
        dir0=calib.dir0,
        plan_count=len(sset),
        handover_step=offset,
        plan=plan,
        calibration=calib,
    )


def plan_set_sweep(
    trace: ObservationTrace,
    devs: Iterable[int],
    n_ps: Iterable[int],
    cfg: KinematicsConfig,
    initial: NeedleState,
    max_rotations: int = MAX_ROTATIONS,
    workers: int = 1,
) -> dict[tuple[int, int], frozenset[tuple[int, ...]]]:
    """Winning rotation-index sets for every (dev, n_p) cell.

    ``trace`` must start at ``initial``; its step span is the horizon.
    """
    horizon = trace.points[-1].step - trace.points[0].step
    rebased = trace.window(trace.points[0].step)
    space = PlanSpace(initial, cfg, horizon, range(max_rotations + 1), workers)
    out = {}
    for n_p in n_ps:
        base = select_targets(rebased, n_p, 0, initial=initial.fixed(cfg.scale))
        for dev in devs:
            game = GameConfig(tuple(t.with_dev(dev) for t in base), horizon, cfg, max_rotations)
            out[(dev, n_p)] = frozenset(p.rotations for p in space.winners(game))
    return out


def plan_count_sweep(
    trace: ObservationTrace,
    devs: Sequence[int],
    n_ps: Sequence[int],
    cfg: KinematicsConfig,
    initial: NeedleState,
    max_rotations: int = MAX_ROTATIONS,
    workers: int = 1,
) -> list[SweepCell]:
    sets = plan_set_sweep(trace, devs, n_ps, cfg, initial, max_rotations, workers)
    return [SweepCell(dev, n_p, len(sets[(dev, n_p)])) for n_p in n_ps for dev in devs]
