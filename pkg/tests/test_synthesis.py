import random

import pytest

from needlegame.errors import ConfigError, NoStrategyError
from needlegame.game import GameConfig, TargetSpec, classify_run
from needlegame.kinematics import KinematicsConfig, MotionPlan, NeedleState, simulate_plan, trace_points
from needlegame.synthesis import (
    StrategySet,
    SynthesisRequest,
    closest_distance,
    enumerate_rotations,
    min_dev_search,
    optimal_plan,
    synthesize,
)


def brute_force(init, game, counts):
    """Every plan replayed through the game, no vectorized filter."""
    out = set()
    for rot in enumerate_rotations(game.horizon, counts):
        res = classify_run(init, MotionPlan(rot), game)
        if res.success and res.rotations == len(rot):
            out.add(rot)
    return out


def endpoint_request(kin, init, plan, horizon, dev, required=None):
    end = simulate_plan(init, plan, kin, horizon)[-1].fixed()
    game = GameConfig((TargetSpec(*end, dev),), horizon, kin)
    return SynthesisRequest(game, init, required)


def test_enumeration_order():
    rows = enumerate_rotations(4, (0, 1, 2))
    assert rows[:5] == [(), (0,), (1,), (2,), (3,)]
    assert rows[5:] == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_two_rotation_self_consistency(kin, origin):
    req = endpoint_request(kin, origin, MotionPlan((15, 40)), 60, kin.half_step_units(), required=2)
    sset = synthesize(req)
    assert (15, 40) in sset.rotation_sets()
    assert all(len(p.rotations) == 2 for p in sset)


def test_off_arc_target_without_rotations(kin, origin):
    x, y = simulate_plan(origin, MotionPlan(), kin, 30)[-1].fixed()
    game = GameConfig((TargetSpec(x, y - 3000, kin.half_step_units()),), 60, kin)
    sset = synthesize(SynthesisRequest(game, origin, 0))
    assert len(sset) == 0 and not sset


def test_on_arc_target_zero_rotations(kin, origin):
    req = endpoint_request(kin, origin, MotionPlan(), 30, kin.half_step_units(), required=0)
    req = SynthesisRequest(GameConfig(req.game.targets, 60, kin), origin, 0)
    sset = synthesize(req)
    assert [p.rotations for p in sset] == [()]
    assert brute_force(origin, req.game, (0,)) == {()}


def test_matches_brute_force():
    rng = random.Random(3)
    kin = KinematicsConfig()
    for _ in range(12):
        horizon = rng.randint(20, 45)
        init = NeedleState(0.0, 0.0, rng.uniform(-0.2, 0.2), rng.choice([1, -1]))
        gen = MotionPlan(tuple(sorted(rng.sample(range(horizon), rng.randint(0, 2)))))
        pts = trace_points(simulate_plan(init, gen, kin, horizon))
        idx = sorted(rng.sample(range(1, horizon + 1), rng.randint(1, 3)))
        dev = rng.choice([0, 20, 100, 350, 700])
        targets = tuple(TargetSpec(*pts[i], dev) for i in idx)
        game = GameConfig(targets, horizon, kin)
        for counts in ((0, 1, 2), (1,), (2,)):
            req = SynthesisRequest(game, init, counts[0] if len(counts) == 1 else None)
            got = synthesize(req).rotation_sets()
            assert got == brute_force(init, game, counts)


def test_set_invariants(kin, origin):
    req = endpoint_request(kin, origin, MotionPlan((30,)), 80, 350)
    sset = synthesize(req)
    keys = [p.sort_key() for p in sset]
    assert keys == sorted(keys) and len(set(keys)) == len(keys)
    for p in sset:
        out = classify_run(origin, p, req.game)
        assert out.success and out.rotations == len(p.rotations)


def test_empty_inputs(kin, origin):
    with pytest.raises(ConfigError):
        GameConfig((), 10, kin)
    with pytest.raises(ConfigError):
        GameConfig((TargetSpec(0, 0, 0),), 0, kin)
    game = GameConfig((TargetSpec(0, 0, 0),), 10, kin)
    with pytest.raises(ConfigError):
        SynthesisRequest(game, origin, 3)


@pytest.mark.parametrize("workers", [2, 8])
def test_parallel_determinism(kin, origin, workers):
    req = endpoint_request(kin, origin, MotionPlan((40, 90)), 150, 350)
    base = synthesize(req, workers=1)
    assert synthesize(req, workers=workers).plans == base.plans
    assert len(base) > 1


class TestOptimal:
    def test_singleton(self, kin, origin):
        req = endpoint_request(kin, origin, MotionPlan((10,)), 40, 0, required=1)
        sset = synthesize(req)
        assert optimal_plan(sset).rotations == (10,)

    def test_exact_hit_wins(self, kin, origin):
        req = endpoint_request(kin, origin, MotionPlan((20,)), 40, 350)
        sset = synthesize(req)
        assert len(sset) > 1
        assert optimal_plan(sset).rotations == (20,)
        assert closest_distance(optimal_plan(sset), req) == 0

    def test_tie_breaks(self, kin, origin):
        # success ends the run at step 30, so rotations after it leave the trace unchanged
        req = endpoint_request(kin, origin, MotionPlan((20,)), 30, 0)
        req = SynthesisRequest(GameConfig(req.game.targets, 40, kin), origin)
        plans = tuple(MotionPlan(r, origin) for r in [(20, 35), (20, 31), (20,)])
        assert optimal_plan(StrategySet(plans, req)).rotations == (20,)
        assert optimal_plan(StrategySet(plans[:2], req)).rotations == (20, 31)

    def test_empty(self, kin, origin):
        req = endpoint_request(kin, origin, MotionPlan(), 10, 0)
        with pytest.raises(NoStrategyError):
            optimal_plan(StrategySet((), req))


class TestMinDev:
    def test_exact_point(self, kin, origin):
        req = endpoint_request(kin, origin, MotionPlan((12,)), 40, 999)
        dev, sset = min_dev_search(req, (0, 500))
        assert dev == 0 and (12,) in sset.rotation_sets()

    def test_zero_bounds_off_trace(self, kin, origin):
        x, y = simulate_plan(origin, MotionPlan(), kin, 30)[-1].fixed()
        game = GameConfig((TargetSpec(x, y + 3, 0),), 30, kin)
        with pytest.raises(NoStrategyError):
            min_dev_search(SynthesisRequest(game, origin, 0), (0, 0))

    def test_perturbed_endpoint(self, kin, origin):
        x, y = simulate_plan(origin, MotionPlan(), kin, 30)[-1].fixed()
        game = GameConfig((TargetSpec(x, y + 5, 0),), 30, kin)
        req = SynthesisRequest(game, origin)
        dev, sset = min_dev_search(req, (0, 200))
        scan = next(d for d in range(201) if synthesize(req.with_dev(d)))
        assert dev == scan == 5
        assert sset.rotation_sets() == synthesize(req.with_dev(5)).rotation_sets()
        assert sset.request.game.targets[0].dev == 5

    @pytest.mark.parametrize("bounds", [(5, 2), (-1, 3)])
    def test_bad_bounds(self, kin, origin, bounds):
        req = endpoint_request(kin, origin, MotionPlan(), 10, 0)
        with pytest.raises(ConfigError):
            min_dev_search(req, bounds)


def test_dev_monotonicity(kin, origin):
    gen = MotionPlan((25, 60))
    pts = trace_points(simulate_plan(origin, gen, kin, 90))
    base = (TargetSpec(*pts[45]), TargetSpec(*pts[90]))
    prev = frozenset()
    for dev in (0, 10, 20, 50, 100, 200):
        cur = synthesize(SynthesisRequest(GameConfig(tuple(t.with_dev(dev) for t in base), 90, kin), origin)).rotation_sets()
        assert prev <= cur
        prev = cur
    assert gen.rotations in prev


def test_mirror_closure(kin):
    horizon = 60
    # straight-ahead target on the x-axis
    x = round(horizon * kin.chord * 0.995)
    game = GameConfig((TargetSpec(x, 0, 350),), horizon, kin)
    traces = set()
    for d in (1, -1):
        init = NeedleState(0.0, 0.0, 0.0, d)
        for p in synthesize(SynthesisRequest(game, init)):
            traces.add(tuple(trace_points(simulate_plan(init, p, kin, horizon))))
    assert traces
    assert {tuple((a, -b) for a, b in t) for t in traces} == traces
