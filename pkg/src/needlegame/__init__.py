"""Game-based motion planning for bevel-tip needles.

A needle tip follows circular arcs whose turning side is flipped by
rotating the needle. Motion plans are synthesized as winning strategies of
a discretized reachability game over target windows, the unknown insertion
angle is calibrated from an observed prefix, and plans are fitted to
recorded traces.
"""

from .calibration import CalibrationRequest, CalibrationResult, angle_grid, calibrate, estimate_insertion, initial_state
from .errors import (
    ConfigError,
    CoverageError,
    IllegalActionError,
    InsufficientDataError,
    InvalidPlanError,
    NeedleGameError,
    NoStrategyError,
    PlanInfeasibleError,
    RangeError,
    TraceParseError,
)
from .evaluation import FitReport, SweepCell, deviation_metrics, fit_trace, plan_count_sweep
from .game import Action, GameConfig, GameState, Outcome, Phase, TargetSpec, advance, classify_run, in_window, play
from .kinematics import KinematicsConfig, MotionPlan, NeedleState, arc_step, flip_direction, simulate_plan
from .synthesis import StrategySet, SynthesisRequest, min_dev_search, optimal_plan, synthesize
from .traceio import ObservationTrace, TracePoint, generate_trace, load_trace, save_trace, select_targets
from .units import Units, from_fixed, to_fixed

__version__ = "0.1.0"

__all__ = [
    "Action",
    "CalibrationRequest",
    "CalibrationResult",
    "ConfigError",
    "CoverageError",
    "FitReport",
    "GameConfig",
    "GameState",
    "IllegalActionError",
    "InsufficientDataError",
    "InvalidPlanError",
    "KinematicsConfig",
    "MotionPlan",
    "NeedleGameError",
    "NeedleState",
    "NoStrategyError",
    "ObservationTrace",
    "Outcome",
    "Phase",
    "PlanInfeasibleError",
    "RangeError",
    "StrategySet",
    "SweepCell",
    "SynthesisRequest",
    "TargetSpec",
    "TracePoint",
    "TraceParseError",
    "Units",
    "advance",
    "angle_grid",
    "arc_step",
    "calibrate",
    "classify_run",
    "deviation_metrics",
    "estimate_insertion",
    "fit_trace",
    "flip_direction",
    "from_fixed",
    "generate_trace",
    "in_window",
    "initial_state",
    "load_trace",
    "min_dev_search",
    "optimal_plan",
    "plan_count_sweep",
    "play",
    "save_trace",
    "select_targets",
    "simulate_plan",
    "synthesize",
    "to_fixed",
]
