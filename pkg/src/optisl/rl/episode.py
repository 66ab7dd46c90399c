"""Episode rollout: masked next-hop walking over one snapshot graph.

An episode starts at the source serving satellite and ends on reaching
the destination, running out of feasible actions, or exhausting the hop
budget. Revisits are masked outright, so every walk is a simple path and
terminates within the node count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..orbital import SatelliteId
from ..routing import RouteResult
from ..topology import SnapshotGraph
from . import features
from .policy import PolicyParams, q_scores

REWARD_TIME_SCALE_S = 0.01  # step cost normalizer
REWARD_TERMINAL = 10.0


class DeadEndError(Exception):
    """Raised when an action is requested with no feasible candidates."""


def reward(cost_s: float, outcome: str) -> float:
    """Per-transition reward.

    "step": negative hop cost over the 10 ms scale; "reached": terminal
    bonus plus the step term; "dead_end": flat terminal penalty.
    """
    if cost_s < 0:
        raise ValueError("cost_s must be >= 0")
    if outcome == "step":
        return -cost_s / REWARD_TIME_SCALE_S
    if outcome == "reached":
        return REWARD_TERMINAL - cost_s / REWARD_TIME_SCALE_S
    if outcome == "dead_end":
        return -REWARD_TERMINAL
    raise ValueError(f"unknown outcome {outcome!r}")


@dataclass(frozen=True)
class Transition:
    """One step of experience; terminal transitions carry zeroed next state."""

    state: np.ndarray  # (5,)
    cand_feats: np.ndarray  # (n, 5)
    action: int
    reward: float
    next_state: np.ndarray  # (5,)
    next_cand_feats: np.ndarray  # (m, 5)
    terminal: bool
    edge_cost_s: float
    outcome: str


def select_action(
    params: PolicyParams,
    state: np.ndarray,
    cand_feats: np.ndarray,
    epsilon: float,
    rng: int | np.random.Generator,
) -> int:
    """Epsilon-greedy choice over the candidate list.

    With probability epsilon the choice is uniform; otherwise the argmax
    of the candidate scores, ties resolving to the smallest index.
    """
    n = cand_feats.shape[0]
    if n == 0:
        raise DeadEndError("no feasible candidates")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    if epsilon > 0 and rng.random() < epsilon:
        return int(rng.integers(n))
    scores = q_scores(params, state, cand_feats)
    return int(np.argmax(scores))  # first maximum = smallest index


def run_episode(
    g: SnapshotGraph,
    params: PolicyParams,
    src: SatelliteId,
    dest: SatelliteId,
    epsilon: float,
    h_max: int,
    rng: int | np.random.Generator,
    k_cap: int = features.DEFAULT_K_CAP,
) -> tuple[RouteResult, list[Transition]]:
    """Walk the graph under the policy; returns the realized path and log."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    src_local = g.local_index(src)
    dest_local = g.local_index(dest)
    if src_local == dest_local:
        return RouteResult((), 0.0, 0.0, 0, True), []

    d0 = float(np.linalg.norm(g.positions[src_local] - g.positions[dest_local]))
    if d0 <= 0:
        d0 = 1.0
    vmask = np.zeros(g.num_nodes, dtype=np.uint8)
    vmask[src_local] = 1

    transitions: list[Transition] = []
    hops: list[tuple[int, int]] = []  # (from_local, edge index)
    zero_state = np.zeros(5)
    zero_cands = np.empty((0, 5))

    v = src_local
    state, cand_feats, edge_idx = features.encode_arrays(g, v, dest_local, vmask, d0, k_cap)
    reached = False
    while edge_idx.size > 0:
        action = select_action(params, state, cand_feats, epsilon, rng)
        k = int(edge_idx[action])
        j = int(g.targets[k])
        cost = float(g.costs[k])
        vmask[j] = 1
        hops.append((v, k))

        if j == dest_local:
            r = reward(cost, "reached")
            transitions.append(
                Transition(state, cand_feats, action, r, zero_state, zero_cands, True, cost, "reached")
            )
            reached = True
            break

        next_state, next_cands, next_idx = features.encode_arrays(
            g, j, dest_local, vmask, d0, k_cap
        )
        if next_idx.size == 0 or len(hops) >= h_max:
            r = reward(cost, "dead_end")
            transitions.append(
                Transition(state, cand_feats, action, r, zero_state, zero_cands, True, cost, "dead_end")
            )
            break

        r = reward(cost, "step")
        transitions.append(
            Transition(state, cand_feats, action, r, next_state, next_cands, False, cost, "step")
        )
        v = j
        state, cand_feats, edge_idx = next_state, next_cands, next_idx

    edges = tuple(g._edge(a, k) for a, k in hops)
    total_cost = 0.0
    total_len = 0.0
    for e in edges:
        total_cost = total_cost + e.cost_s
        total_len = total_len + e.length_m
    route = RouteResult(edges, total_cost, total_len, len(edges), reached)
    return route, transitions
