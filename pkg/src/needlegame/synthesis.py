"""Winning-strategy synthesis by exhaustive enumeration of rotation indices.

With at most two rotations a motion plan is fixed by its rotation indices,
so the whole strategy is the finite set of index tuples whose run ends in
Success with every planned rotation performed.

Enumeration runs in two passes. A vectorized pass computes all plan
trajectories at once with numpy and keeps plans whose windows are hit with
a one-unit margin, which is a strict superset of the winners since the
vectorized positions differ from the sequential ones by far less than half
a unit. Every surviving candidate is then replayed through the game, which
decides membership exactly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigError, NoStrategyError
from .game import GameConfig, Phase, TargetSpec, classify_run, play
from .kinematics import KinematicsConfig, MotionPlan, NeedleState

# vectorized positions are within ~1e-9 units of the sequential ones
_MARGIN = 1.0
_CHUNK_ROWS = 2048


@dataclass(frozen=True)
class SynthesisRequest:
    game: GameConfig
    initial: NeedleState
    required_rotations: int | None = None

    def __post_init__(self):
        r = self.required_rotations
        if r is not None and not 0 <= r <= self.game.max_rotations:
            raise ConfigError(f"required_rotations {r} outside 0..{self.game.max_rotations}")

    @property
    def rotation_counts(self) -> tuple[int, ...]:
        if self.required_rotations is not None:
            return (self.required_rotations,)
        return tuple(range(self.game.max_rotations + 1))

    def with_dev(self, dev: int) -> "SynthesisRequest":
        return SynthesisRequest(self.game.with_dev(dev), self.initial, self.required_rotations)


@dataclass(frozen=True)
class StrategySet:
    plans: tuple[MotionPlan, ...]
    request: SynthesisRequest = field(repr=False)

    def __len__(self):
        return len(self.plans)

    def __iter__(self) -> Iterator[MotionPlan]:
        return iter(self.plans)

    def __bool__(self):
        return bool(self.plans)

    def rotation_sets(self) -> frozenset[tuple[int, ...]]:
        return frozenset(p.rotations for p in self.plans)


def enumerate_rotations(horizon: int, counts: Sequence[int]) -> list[tuple[int, ...]]:
    """All strictly increasing index tuples of the given lengths, canonical order."""
    rows: list[tuple[int, ...]] = []
    for n in sorted(set(counts)):
        if n == 0:
            rows.append(())
        elif n == 1:
            rows.extend((k,) for k in range(horizon))
        elif n == 2:
            rows.extend((a, b) for a in range(horizon) for b in range(a + 1, horizon))
        else:
            raise ConfigError(f"unsupported rotation count {n}")
    return rows


def _trajectories(init: NeedleState, kin: KinematicsConfig, k1: np.ndarray, k2: np.ndarray, horizon: int):
    """Post-step positions (units) for every row, shape (rows, horizon)."""
    j = np.arange(horizon)
    flips = (j[None, :] >= k1[:, None]).astype(np.int64) + (j[None, :] >= k2[:, None])
    d = init.dir * (1 - 2 * (flips & 1))
    # mean heading of step j is theta0 + (2 m_j + d_j) * turn / 2, m_j = net turns before j
    half_turns = 2 * np.cumsum(d, axis=1) - d
    mid = init.theta + half_turns * (kin.turn_per_step / 2.0)
    f = kin.units_per_um
    c = kin.chord * f
    x = init.x * f + np.cumsum(c * np.cos(mid), axis=1)
    y = init.y * f + np.cumsum(c * np.sin(mid), axis=1)
    return x, y


def _greedy_hits(x: np.ndarray, y: np.ndarray, targets: Sequence[TargetSpec], margin: float):
    """Vectorized in-order first hits; returns (found mask, step of the last hit)."""
    rows, horizon = x.shape
    cols = np.arange(horizon)
    start = np.zeros(rows, dtype=np.int64)
    found = np.ones(rows, dtype=bool)
    for tgt in targets:
        half = tgt.dev + margin
        if half < 0:
            return np.zeros(rows, dtype=bool), np.full(rows, horizon + 1)
        m = (np.abs(x - tgt.tx) <= half) & (np.abs(y - tgt.ty) <= half) & (cols[None, :] >= start[:, None])
        hit = m.any(axis=1)
        found &= hit
        start = np.where(hit, m.argmax(axis=1), horizon)
    # column c holds the state after step c + 1
    return found, np.where(found, start + 1, horizon + 1)


class PlanSpace:
    """Every plan trajectory for one initial state and horizon, cached.

    Re-querying with different targets or deviations reuses the trajectories,
    which is what makes deviation search cheap.
    """

    def __init__(
        self,
        initial: NeedleState,
        kin: KinematicsConfig,
        horizon: int,
        counts: Sequence[int],
        workers: int = 1,
    ):
        if horizon <= 0:
            raise ConfigError(f"horizon must be positive, got {horizon}")
        self.initial = initial
        self.kin = kin
        self.horizon = horizon
        self.workers = max(1, int(workers))
        self.rows = enumerate_rotations(horizon, counts)
        self._chunks = [
            (lo, min(lo + _CHUNK_ROWS, len(self.rows))) for lo in range(0, len(self.rows), _CHUNK_ROWS)
        ]
        self._xy = self._map(self._build)

    def _map(self, fn):
        if self.workers == 1 or len(self._chunks) == 1:
            return [fn(c) for c in self._chunks]
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(fn, self._chunks))

    def _build(self, chunk):
        lo, hi = chunk
        h = self.horizon
        k1 = np.array([r[0] if len(r) > 0 else h for r in self.rows[lo:hi]], dtype=np.int64)
        k2 = np.array([r[1] if len(r) > 1 else h for r in self.rows[lo:hi]], dtype=np.int64)
        return _trajectories(self.initial, self.kin, k1, k2, h)

    def _filter(self, targets: Sequence[TargetSpec]) -> list[tuple[int, ...]]:
        last = targets[-1]
        half = last.dev + _MARGIN

        def run(i):
            lo, _ = self._chunks[i]
            x, y = self._xy[i]
            # cheap row prefilter on the final window before the ordered pass
            near = np.flatnonzero(
                ((np.abs(x - last.tx) <= half) & (np.abs(y - last.ty) <= half)).any(axis=1)
            )
            if near.size == 0:
                return []
            x, y = x[near], y[near]
            found, _ = _greedy_hits(x, y, targets, _MARGIN)
            _, late = _greedy_hits(x, y, targets, -_MARGIN)
            out = []
            for r in np.flatnonzero(found):
                rot = self.rows[lo + near[r]]
                # every rotation must happen before the latest possible success
                if not rot or rot[-1] < late[r]:
                    out.append(rot)
            return out

        idx = range(len(self._chunks))
        if self.workers == 1 or len(self._chunks) == 1:
            parts = [run(i) for i in idx]
        else:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                parts = list(pool.map(run, idx))
        return [rot for part in parts for rot in part]

    def _wins(self, rot: tuple[int, ...], game: GameConfig) -> bool:
        out = classify_run(self.initial, MotionPlan(rot), game)
        return out.success and out.rotations == len(rot)

    def winners(self, game: GameConfig) -> list[MotionPlan]:
        cands = self._filter(game.targets)
        if self.workers > 1 and len(cands) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                keep = list(pool.map(lambda r: self._wins(r, game), cands))
        else:
            keep = [self._wins(r, game) for r in cands]
        plans = [MotionPlan(r, self.initial) for r, k in zip(cands, keep) if k]
        return sorted(plans, key=MotionPlan.sort_key)

    def any_winner(self, game: GameConfig) -> bool:
        return any(self._wins(r, game) for r in self._filter(game.targets))


def _check_request(req: SynthesisRequest) -> None:
    if not req.game.targets:
        raise ConfigError("at least one target is required")
    if req.game.horizon <= 0:
        raise ConfigError("horizon must be positive")


def synthesize(req: SynthesisRequest, workers: int = 1) -> StrategySet:
    """All plans that win the game, in canonical order. May be empty."""
    _check_request(req)
    space = PlanSpace(req.initial, req.game.kinematics, req.game.horizon, req.rotation_counts, workers)
    return StrategySet(tuple(space.winners(req.game)), req)


def closest_distance(plan: MotionPlan, req: SynthesisRequest) -> float:
    """Distance (units) from the final target to the nearest point of the played run."""
    init = plan.initial if plan.initial is not None else req.initial
    states = play(init, MotionPlan(plan.rotations), req.game)
    scale = req.game.kinematics.scale
    final = req.game.targets[-1]
    best = math.inf
    for gs in states:
        if gs.phase in (Phase.PHASE, Phase.SUCCESS, Phase.FAIL):
            x, y = gs.needle.fixed(scale)
            best = min(best, math.hypot(x - final.tx, y - final.ty))
    return best


def optimal_plan(sset: StrategySet) -> MotionPlan:
    if not sset.plans:
        raise NoStrategyError("strategy set is empty")
    return min(sset.plans, key=lambda p: (closest_distance(p, sset.request), len(p.rotations), p.rotations))


def min_dev_search(req: SynthesisRequest, dev_bounds: tuple[int, int], workers: int = 1) -> tuple[int, StrategySet]:
    """Smallest integer dev in bounds with a nonempty strategy set.

    The dev carried by the request's targets is ignored; every target gets the
    searched value.
    """
    lo, hi = dev_bounds
    if not (isinstance(lo, int) and isinstance(hi, int)) or lo < 0 or lo > hi:
        raise ConfigError(f"invalid dev bounds {dev_bounds!r}")
    _check_request(req)
    space = PlanSpace(req.initial, req.game.kinematics, req.game.horizon, req.rotation_counts, workers)
    if not space.any_winner(req.game.with_dev(hi)):
        raise NoStrategyError(f"no strategy with dev <= {hi}")
    while lo < hi:
        mid = (lo + hi) // 2
        if space.any_winner(req.game.with_dev(mid)):
            hi = mid
        else:
            lo = mid + 1
    final = req.with_dev(lo)
    return lo, StrategySet(tuple(space.winners(final.game)), final)
