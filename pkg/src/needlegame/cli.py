"""Command-line entry point: ``needlegame <command> [options]``."""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass
from typing import Sequence

from . import plot
from .calibration import CalibrationRequest, estimate_insertion
from .config import KEYS, RunConfig, int_list, load_config, parse_value
from .errors import (
    ConfigError,
    CoverageError,
    InsufficientDataError,
    InvalidPlanError,
    NoStrategyError,
    PlanInfeasibleError,
    TraceParseError,
)
from .evaluation import fit_trace, format_pairs, format_record, format_sweep_table, plan_count_sweep, prefix_steps
from .game import GameConfig, Phase, TargetSpec, play
from .kinematics import MotionPlan, NeedleState, simulate_plan, trace_points
from .synthesis import SynthesisRequest, closest_distance, optimal_plan, synthesize
from .traceio import ObservationTrace, dumps_trace, generate_trace, load_trace, select_targets

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NO_STRATEGY = 3
EXIT_INSUFFICIENT_DATA = 4
EXIT_IO = 5
EXIT_INVALID_PLAN = 6

DEFAULT_HORIZON = 100

EPILOG = """\
exit codes:
  0  success
  2  validation error (bad flag, config value or trace file contents)
  3  no strategy within the given deviation
  4  insufficient data (trace too short, plan does not cover it)
  5  I/O error (missing or unwritable file)
  6  invalid motion plan

Every config key has a flag of the same name with '_' written as '-'
(e.g. dev_bounds -> --dev-bounds). Flags override --config values.
Outputs go to --out (default stdout); nothing is written on error.
"""


@dataclass
class Output:
    text: str
    path: str | None = None


def _parse_plan(text: str | None) -> MotionPlan:
    if text is None:
        return MotionPlan()
    try:
        rot = int_list(text)
    except ValueError:
        raise InvalidPlanError(f"cannot parse plan {text!r}; expected comma-separated step indices") from None
    return MotionPlan(rot)


def _parse_targets(values: Sequence[str], dev: int) -> list[TargetSpec]:
    out = []
    for text in values:
        parts = text.split(",")
        try:
            x, y = (int(p) for p in parts)
        except ValueError:
            raise ConfigError(f"target must be 'x,y' in integer units, got {text!r}") from None
        out.append(TargetSpec(x, y, dev))
    return out


def _config(args) -> RunConfig:
    overrides = {}
    for key in KEYS:
        raw = getattr(args, key, None)
        if raw is not None:
            overrides[key] = parse_value(key, raw)
    return load_config(args.config, overrides)


def _load(path: str | None) -> ObservationTrace:
    if path is None:
        raise ConfigError("--trace is required")
    return load_trace(path)


def _svg_outputs(args, fig: plot.Figure) -> list[Output]:
    return [Output(plot.render(fig), args.svg_out)] if args.svg_out else []


def cmd_simulate(cfg: RunConfig, args) -> list[Output]:
    kin = cfg.kinematics()
    plan = _parse_plan(args.plan)
    horizon = cfg.horizon or DEFAULT_HORIZON
    init = cfg.initial_state()
    trace = generate_trace(plan, kin, horizon, init, cfg.noise, cfg.seed, args.label or "")
    out = [Output(dumps_trace(trace), args.out)]
    if args.svg_out:
        states = simulate_plan(init, plan, kin, horizon, cfg.max_rotations)
        fig = plot.Figure(targets=_parse_targets(args.target, cfg.dev), title=args.label or "")
        fig.add_path(trace.positions)
        fig.markers = [states[k].fixed(kin.scale) for k in plan.rotations]
        out += _svg_outputs(args, fig)
    return out


def cmd_calibrate(cfg: RunConfig, args) -> list[Output]:
    kin = cfg.kinematics()
    trace = _load(args.trace)
    first = trace.points[0].step
    prefix = trace.window(first, first + prefix_steps(kin, cfg.prefix_mm), rebase=False)
    grid = cfg.angle_grid()
    res = estimate_insertion(CalibrationRequest(prefix=prefix, angle_grid=grid, kinematics=kin))
    text = format_pairs([
        ("theta0", res.theta0),
        ("theta0_deg", math.degrees(res.theta0)),
        ("dir0", res.dir0),
        ("radius", res.radius_used),
        ("residual_max", res.residual_max),
        ("residual_avg", res.residual_avg),
        ("origin", res.origin),
        ("last_point", res.last_point),
        ("prefix_points", len(prefix)),
        ("angle_min", cfg.angle_min),
        ("angle_max", cfg.angle_max),
        ("angle_step", cfg.angle_step),
        ("grid_size", len(grid)),
    ]) + "\n"
    return [Output(text, args.out)]


def cmd_synthesize(cfg: RunConfig, args) -> list[Output]:
    kin = cfg.kinematics()
    init = cfg.initial_state()
    if args.target and args.trace:
        raise ConfigError("give either --target or --trace, not both")
    if args.target:
        targets = _parse_targets(args.target, cfg.dev)
        horizon = cfg.horizon or DEFAULT_HORIZON
    elif args.trace:
        trace = _load(args.trace)
        trace = trace.window(trace.points[0].step)
        # the trace starts at the needle; only heading and bevel come from the config
        x, y = trace.points[0].pos
        init = NeedleState(x / kin.units_per_um, y / kin.units_per_um, init.theta, init.dir)
        targets = select_targets(trace, cfg.points, cfg.dev, initial=init.fixed(kin.scale))
        horizon = cfg.horizon or trace.points[-1].step
    else:
        raise ConfigError("synthesize needs --target or --trace")

    game = GameConfig(tuple(targets), horizon, kin, cfg.max_rotations, cfg.prune)
    req = SynthesisRequest(game, init, cfg.rotations)
    sset = synthesize(req, cfg.workers)
    if not sset:
        raise NoStrategyError(f"no winning plan for {len(targets)} target(s) at dev {cfg.dev}")
    best = optimal_plan(sset) if args.optimal else None
    lines = [f"# plans: {len(sset)}", f"# dev: {cfg.dev}", f"# horizon: {horizon}"]
    for plan in sset:
        pairs = [("rotations", plan.rotations), ("final_distance", closest_distance(plan, req))]
        if best is not None:
            pairs.append(("optimal", plan.rotations == best.rotations))
        lines.append(format_pairs(pairs))
    out = [Output("\n".join(lines) + "\n", args.out)]
    if args.svg_out:
        fig = plot.Figure(targets=list(targets))
        for plan in sset:
            states = play(init, MotionPlan(plan.rotations), game)
            # a rotation revisits the same position; keep post-step states only
            fig.add_path([gs.needle.fixed(kin.scale) for gs in states if gs.trail[:1] != (Phase.TURN,)])
        out += _svg_outputs(args, fig)
    return out


def cmd_fit(cfg: RunConfig, args) -> list[Output]:
    kin = cfg.kinematics()
    obs = _load(args.trace)
    report = fit_trace(
        obs,
        n_p=cfg.points,
        dev_bounds=cfg.dev_bounds,
        cfg=kin,
        grid=cfg.angle_grid(),
        prefix_mm=cfg.prefix_mm,
        rotations=cfg.rotations,
        max_rotations=cfg.max_rotations,
        calibration_slack=cfg.calibration_slack,
        workers=cfg.workers,
    )
    out = [Output(format_record(report) + "\n", args.out)]
    if args.svg_out:
        rest = obs.window(obs.points[0].step + report.handover_step)
        states = simulate_plan(report.plan.initial, report.plan, report.calibration.kinematics, rest.points[-1].step, cfg.max_rotations)
        fig = plot.Figure(title=obs.label)
        fig.add_path(obs.positions, "#888888")
        fig.add_path(trace_points(states, kin.scale))
        fig.markers = [states[k].fixed(kin.scale) for k in report.plan.rotations]
        out += _svg_outputs(args, fig)
    return out


def cmd_sweep(cfg: RunConfig, args) -> list[Output]:
    kin = cfg.kinematics()
    trace = _load(args.trace)
    x, y = trace.points[0].pos
    init = NeedleState(x / kin.units_per_um, y / kin.units_per_um, math.radians(cfg.theta0), cfg.dir0)
    cells = plan_count_sweep(trace, cfg.sweep_devs, cfg.sweep_points, kin, init, cfg.max_rotations, cfg.workers)
    return [Output(format_sweep_table(cells), args.out)]


COMMANDS = {
    "simulate": (cmd_simulate, "simulate a motion plan and write its trace as CSV"),
    "calibrate": (cmd_calibrate, "estimate insertion angle and bevel direction from a trace prefix"),
    "synthesize": (cmd_synthesize, "list every winning motion plan for a set of targets"),
    "fit": (cmd_fit, "calibrate on a trace prefix and fit a strategy to the rest"),
    "sweep": (cmd_sweep, "count winning plans over deviation and target-count grids"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--svg-out", help="also write an SVG plot here")
    common.add_argument("--trace", help="input trace CSV (step,x_um,y_um)")
    keys = common.add_argument_group("config keys")
    for key in KEYS:
        keys.add_argument("--" + key.replace("_", "-"), dest=key, metavar="VALUE")

    parser = argparse.ArgumentParser(
        prog="needlegame",
        description="Game-based motion planning for bevel-tip needles.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(
            name, parents=[common], help=help_text, description=help_text,
            epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        if name in ("simulate", "synthesize"):
            p.add_argument(
                "--target", action="append", default=[], metavar="X,Y",
                help="target window center in scaled units (repeatable); uses --dev",
            )
        if name == "simulate":
            p.add_argument("--plan", help="rotation step indices, e.g. 20,45 (default: none)")
            p.add_argument("--label", help="label stored in the trace file")
        if name == "synthesize":
            p.add_argument("--optimal", action="store_true", help="mark the plan closest to the final target")
    return parser


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, NoStrategyError):
        return EXIT_NO_STRATEGY
    if isinstance(exc, (InsufficientDataError, CoverageError)):
        return EXIT_INSUFFICIENT_DATA
    if isinstance(exc, (InvalidPlanError, PlanInfeasibleError)):
        return EXIT_INVALID_PLAN
    if isinstance(exc, (ConfigError, TraceParseError, ValueError)):
        return EXIT_VALIDATION
    if isinstance(exc, OSError):
        return EXIT_IO
    raise exc


def _write(outputs: list[Output]) -> None:
    # stage every file first so a failing write leaves no partial output
    staged = []
    try:
        for out in outputs:
            if out.path is not None:
                tmp = f"{out.path}.tmp{os.getpid()}"
                with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
                    fh.write(out.text)
                staged.append((tmp, out.path))
    except OSError:
        for tmp, _ in staged:
            os.remove(tmp)
        raise
    for tmp, path in staged:
        os.replace(tmp, path)
    for out in outputs:
        if out.path is None:
            sys.stdout.write(out.text)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    fn = COMMANDS[args.command][0]
    try:
        outputs = fn(_config(args), args)
        _write(outputs)
    except Exception as exc:
        code = _exit_code(exc)
        print(f"needlegame {args.command}: error: {exc}", file=sys.stderr)
        return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
