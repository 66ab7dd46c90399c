"""Value-network training over random snapshots, and greedy evaluation.

Double-estimator temporal-difference learning with experience replay: the
online network picks the best next action, the periodically synchronized
target copy values it. Every random draw comes from a named substream of
the run seed, so training is bit-reproducible.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..routing import RouteResult, path_metrics, shortest_path
from ..scenario import NoServingSatelliteError, ScenarioContext, scenario_graph
from ..seeding import generator, substreams
from ..topology import SnapshotGraph
from . import features
from .episode import Transition, run_episode
from .policy import (
    Adam,
    INPUT_DIM,
    PolicyParams,
    RLHyperParams,
    STATE_DIM,
    clip_gradients,
    forward,
    gradients_mse,
)


class TrainingDivergedError(Exception):
    """Loss became non-finite; training state is unusable."""


@dataclass
class ReplayBuffer:
    """Ring buffer of training views (x, reward, next candidate rows)."""

    capacity: int
    _x: list = field(default_factory=list)
    _reward: list = field(default_factory=list)
    _next_rows: list = field(default_factory=list)  # None when terminal
    _cursor: int = 0

    def push(self, tr: Transition) -> None:
        x = np.empty(INPUT_DIM)
        x[:STATE_DIM] = tr.state
        x[STATE_DIM:] = tr.cand_feats[tr.action]
        if tr.terminal or tr.next_cand_feats.shape[0] == 0:
            next_rows = None
        else:
            m = tr.next_cand_feats.shape[0]
            next_rows = np.empty((m, INPUT_DIM))
            next_rows[:, :STATE_DIM] = tr.next_state
            next_rows[:, STATE_DIM:] = tr.next_cand_feats
        if len(self._x) < self.capacity:
            self._x.append(x)
            self._reward.append(tr.reward)
            self._next_rows.append(next_rows)
        else:
            self._x[self._cursor] = x
            self._reward[self._cursor] = tr.reward
            self._next_rows[self._cursor] = next_rows
            self._cursor = (self._cursor + 1) % self.capacity

    def __len__(self) -> int:
        return len(self._x)


def _td_update(
    params: PolicyParams,
    target: PolicyParams,
    adam: Adam,
    replay: ReplayBuffer,
    rng: np.random.Generator,
    hyper: RLHyperParams,
) -> float:
    idx = rng.integers(0, len(replay), size=hyper.batch_size)
    x = np.stack([replay._x[i] for i in idx])
    y = np.array([replay._reward[i] for i in idx])
    rows = [replay._next_rows[i] for i in idx]
    stacked = [r for r in rows if r is not None]
    if stacked:
        # double estimator: the online net picks the action, the target
        # net (evaluated only on the picked rows) values it
        z = np.vstack(stacked)
        q_online = forward(params, z)
        best_rows = []
        offset = 0
        live = []
        for i, r in enumerate(rows):
            if r is None:
                continue
            m = r.shape[0]
            best = offset + int(np.argmax(q_online[offset : offset + m]))
            best_rows.append(z[best])
            live.append(i)
            offset += m
        q_target = forward(target, np.stack(best_rows))
        for pos, i in enumerate(live):
            y[i] += hyper.discount * q_target[pos]
    loss, grads_w, grads_b = gradients_mse(params, x, y)
    if not math.isfinite(loss):
        raise TrainingDivergedError(f"non-finite loss {loss!r}")
    clip_gradients(grads_w, grads_b, hyper.grad_clip)
    adam.step(params, grads_w, grads_b)
    return loss


@dataclass(frozen=True)
class EvalRow:
    """Greedy rollout result on one held-out snapshot."""

    time_s: float
    oracle_feasible: bool
    reached: bool
    stretch: float  # nan when not applicable
    delay_ms: float
    hops: int
    intra_count: int
    inter_count: int
    oracle_delay_ms: float


@dataclass
class EvalReport:
    """Aggregates of greedy evaluation over a snapshot set."""

    rows: list[EvalRow]

    @property
    def n_feasible(self) -> int:
        return sum(1 for r in self.rows if r.oracle_feasible)

    @property
    def structural_failures(self) -> int:
        return sum(1 for r in self.rows if not r.oracle_feasible)

    @property
    def success_rate(self) -> float:
        n = self.n_feasible
        if n == 0:
            return 0.0
        return sum(1 for r in self.rows if r.oracle_feasible and r.reached) / n

    @property
    def mean_stretch(self) -> float:
        vals = [r.stretch for r in self.rows if r.oracle_feasible and r.reached]
        if not vals:
            return math.inf
        return float(np.mean(vals))

    @property
    def mean_delay_ms(self) -> float:
        vals = [r.delay_ms for r in self.rows if r.reached]
        return float(np.mean(vals)) if vals else math.nan

    @property
    def mean_hops(self) -> float:
        vals = [r.hops for r in self.rows if r.reached]
        return float(np.mean(vals)) if vals else math.nan

    def summary(self) -> dict:
        return {
            "snapshots": len(self.rows),
            "structural_failures": self.structural_failures,
            "success_rate": self.success_rate,
            "mean_stretch": self.mean_stretch if math.isfinite(self.mean_stretch) else None,
            "mean_delay_ms": None if math.isnan(self.mean_delay_ms) else self.mean_delay_ms,
            "mean_hops": None if math.isnan(self.mean_hops) else self.mean_hops,
        }


@dataclass(frozen=True)
class LogRow:
    episode: int
    epsilon: float
    success_rate: float
    mean_stretch: float
    loss: float


@dataclass
class TrainingLog:
    """Per-checkpoint progress against the held-out oracle set."""

    rows: list[LogRow] = field(default_factory=list)
    skipped_episodes: int = 0

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["episode", "epsilon", "success_rate", "mean_stretch", "loss"])
            for row in self.rows:
                writer.writerow(
                    [
                        row.episode,
                        repr(row.epsilon),
                        repr(row.success_rate),
                        repr(row.mean_stretch),
                        repr(row.loss),
                    ]
                )


def build_snapshot_set(
    ctx: ScenarioContext,
    count: int,
    stream: np.random.SeedSequence,
) -> list[SnapshotGraph]:
    """Deterministic snapshot graphs drawn from one substream."""
    rng = generator(stream)
    seeds = stream.spawn(count)
    graphs = []
    t0, t1 = ctx.window_s
    for i in range(count):
        t = float(rng.uniform(t0, t1))
        try:
            graphs.append(scenario_graph(ctx, t, congestion_seed=seeds[i]))
        except NoServingSatelliteError:
            continue
    return graphs


def evaluate(
    params: PolicyParams,
    graphs: Sequence[SnapshotGraph],
    h_max: int,
    k_cap: int = features.DEFAULT_K_CAP,
    oracles: Optional[Sequence[RouteResult]] = None,
) -> EvalReport:
    """Greedy (epsilon=0) rollouts against the Dijkstra oracle."""
    rows = []
    rng = np.random.default_rng(0)  # unused at epsilon=0
    for i, g in enumerate(graphs):
        oracle = oracles[i] if oracles is not None else shortest_path(g, g.source_sat, g.dest_sat)
        feasible = oracle.reached
        route, _ = run_episode(g, params, g.source_sat, g.dest_sat, 0.0, h_max, rng, k_cap)
        m = path_metrics(route)
        if route.reached and feasible and oracle.total_cost_s > 0:
            stretch = route.total_cost_s / oracle.total_cost_s
        elif route.reached and feasible:
            stretch = 1.0  # zero-cost oracle: source equals destination
        else:
            stretch = math.nan
        rows.append(
            EvalRow(
                time_s=g.time_s,
                oracle_feasible=feasible,
                reached=route.reached,
                stretch=stretch,
                delay_ms=m["delay_ms"],
                hops=m["hops"],
                intra_count=m["intra_count"],
                inter_count=m["inter_count"],
                oracle_delay_ms=oracle.total_cost_s * 1e3,
            )
        )
    return EvalReport(rows)


def train(
    ctx: ScenarioContext,
    hyper: RLHyperParams,
    seed: int,
    progress: Optional[Callable[[int, "TrainingLog"], None]] = None,
) -> tuple[PolicyParams, TrainingLog]:
    """Train the next-hop policy on random snapshots of the scenario.

    Fully deterministic for a fixed (ctx, hyper, seed): snapshot times,
    congestion draws, initialization, exploration, and replay sampling all
    derive from named substreams of the seed.
    """
    streams = substreams(seed)
    rng_snap = generator(streams["snapshot"])
    rng_explore = generator(streams["rl-explore"])
    rng_replay = generator(streams["replay"])
    congestion_stream = streams["congestion"]

    params = PolicyParams.random_init(generator(streams["rl-init"]), hyper)
    target = params.copy()
    adam = Adam(params, hyper.learning_rate)
    replay = ReplayBuffer(hyper.replay_capacity)

    heldout = build_snapshot_set(ctx, hyper.eval_snapshots, streams["heldout"])
    heldout_oracles = [shortest_path(g, g.source_sat, g.dest_sat) for g in heldout]

    log = TrainingLog()
    t0, t1 = ctx.window_s
    step_counter = 0
    updates = 0
    loss_sum = 0.0
    loss_count = 0

    for ep in range(hyper.episodes):
        eps = hyper.epsilon_at(ep)
        t = float(rng_snap.uniform(t0, t1))
        cseed = congestion_stream.spawn(1)[0]
        try:
            g = scenario_graph(ctx, t, congestion_seed=cseed)
        except NoServingSatelliteError:
            log.skipped_episodes += 1
            continue
        _, transitions = run_episode(
            g, params, g.source_sat, g.dest_sat, eps, ctx.routing.h_max, rng_explore,
            ctx.routing.k_cap,
        )
        for tr in transitions:
            replay.push(tr)
            step_counter += 1
            if len(replay) >= hyper.warmup_transitions and step_counter % hyper.update_every == 0:
                loss = _td_update(params, target, adam, replay, rng_replay, hyper)
                loss_sum += loss
                loss_count += 1
                updates += 1
                if updates % hyper.target_sync == 0:
                    target.copy_from(params)

        if (ep + 1) % hyper.eval_every == 0 or ep + 1 == hyper.episodes:
            report = evaluate(params, heldout, ctx.routing.h_max, ctx.routing.k_cap, heldout_oracles)
            log.rows.append(
                LogRow(
                    episode=ep + 1,
                    epsilon=eps,
                    success_rate=report.success_rate,
                    mean_stretch=report.mean_stretch,
                    loss=loss_sum / loss_count if loss_count else 0.0,
                )
            )
            loss_sum = 0.0
            loss_count = 0
            if progress is not None:
                progress(ep + 1, log)

    return params, log
