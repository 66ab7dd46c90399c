import math

import numpy as np
import pytest

from conftest import DOHA, LONDON

from optisl.orbital import ConstellationConfig
from optisl.optics import OpticalParams
from optisl.rl.episode import Transition
from optisl.rl.policy import Adam, PolicyParams, RLHyperParams
from optisl.rl.training import (
    ReplayBuffer,
    TrainingDivergedError,
    _td_update,
    build_snapshot_set,
    evaluate,
    train,
)
from optisl.scenario import RoutingParams, prepare_scenario
from optisl.seeding import substreams

TINY = RLHyperParams(
    episodes=120,
    epsilon_decay_episodes=80,
    eval_every=60,
    eval_snapshots=8,
    warmup_transitions=64,
    batch_size=16,
    replay_capacity=2_000,
    target_sync=50,
)


@pytest.fixture(scope="module")
def ctx():
    return prepare_scenario(
        ConstellationConfig(), OpticalParams(), RoutingParams(), DOHA, LONDON
    )


def test_training_deterministic(ctx, tmp_path):
    params_a, log_a = train(ctx, TINY, seed=11)
    params_b, log_b = train(ctx, TINY, seed=11)
    assert log_a.rows == log_b.rows
    for a, b in zip(params_a.flat(), params_b.flat()):
        np.testing.assert_array_equal(a, b)
    pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
    log_a.to_csv(pa)
    log_b.to_csv(pb)
    assert pa.read_bytes() == pb.read_bytes()


def test_zero_learning_rate_keeps_initial_weights(ctx):
    hyper = RLHyperParams(
        episodes=40,
        learning_rate=0.0,
        epsilon_decay_episodes=20,
        eval_every=40,
        eval_snapshots=4,
        warmup_transitions=32,
        batch_size=8,
    )
    params, _ = train(ctx, hyper, seed=13)
    init = PolicyParams.random_init(
        np.random.default_rng(substreams(13)["rl-init"]), hyper
    )
    for a, b in zip(params.flat(), init.flat()):
        np.testing.assert_array_equal(a, b)


def test_divergence_guard_raises():
    hyper = RLHyperParams(batch_size=2, warmup_transitions=1)
    params = PolicyParams.random_init(np.random.default_rng(0), hyper)
    target = params.copy()
    adam = Adam(params, hyper.learning_rate)
    replay = ReplayBuffer(capacity=10)
    bad = Transition(
        state=np.zeros(5),
        cand_feats=np.zeros((1, 5)),
        action=0,
        reward=math.nan,
        next_state=np.zeros(5),
        next_cand_feats=np.empty((0, 5)),
        terminal=True,
        edge_cost_s=0.0,
        outcome="dead_end",
    )
    replay.push(bad)
    replay.push(bad)
    with pytest.raises(TrainingDivergedError):
        _td_update(params, target, adam, replay, np.random.default_rng(0), hyper)


def test_replay_ring_overwrites():
    replay = ReplayBuffer(capacity=3)
    base = Transition(
        state=np.zeros(5),
        cand_feats=np.zeros((1, 5)),
        action=0,
        reward=1.0,
        next_state=np.zeros(5),
        next_cand_feats=np.empty((0, 5)),
        terminal=True,
        edge_cost_s=0.0,
        outcome="dead_end",
    )
    for i in range(5):
        replay.push(
            Transition(
                base.state, base.cand_feats, 0, float(i), base.next_state,
                base.next_cand_feats, True, 0.0, "dead_end",
            )
        )
    assert len(replay) == 3
    assert sorted(replay._reward) == [2.0, 3.0, 4.0]


def test_short_training_beats_zero_init(ctx):
    hyper = RLHyperParams(
        episodes=500,
        epsilon_decay_episodes=300,
        eval_every=250,
        eval_snapshots=16,
        warmup_transitions=128,
    )
    params, log = train(ctx, hyper, seed=21)
    heldout = build_snapshot_set(ctx, 16, substreams(21)["heldout"])
    trained = evaluate(params, heldout, ctx.routing.h_max, ctx.routing.k_cap)
    untrained = evaluate(
        PolicyParams.zero_init(hyper), heldout, ctx.routing.h_max, ctx.routing.k_cap
    )
    assert trained.success_rate > untrained.success_rate or (
        trained.success_rate == untrained.success_rate == 1.0
        and trained.mean_stretch < untrained.mean_stretch
    )
    assert trained.mean_stretch < untrained.mean_stretch
    assert log.rows[-1].success_rate >= 0.8


def test_evaluate_report_bookkeeping(ctx):
    heldout = build_snapshot_set(ctx, 10, substreams(33)["heldout"])
    report = evaluate(
        PolicyParams.random_init(np.random.default_rng(1)), heldout,
        ctx.routing.h_max, ctx.routing.k_cap,
    )
    assert len(report.rows) == len(heldout)
    for row in report.rows:
        if row.reached and row.oracle_feasible:
            assert row.stretch >= 1.0 - 1e-12
        if not row.oracle_feasible:
            assert math.isnan(row.stretch)
    summary = report.summary()
    assert set(summary) == {
        "snapshots",
        "structural_failures",
        "success_rate",
        "mean_stretch",
        "mean_delay_ms",
        "mean_hops",
    }


def test_training_log_csv_format(ctx, tmp_path):
    _, log = train(ctx, TINY, seed=5)
    path = tmp_path / "log.csv"
    log.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "episode,epsilon,success_rate,mean_stretch,loss"
    assert len(lines) == len(log.rows) + 1
