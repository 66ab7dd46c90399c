"""Feasible-action sets and per-decision feature encoding.

The action set at a node is its outgoing feasible edges (range and
congestion filtering already happened at graph construction) minus edges
into visited nodes, capped to the k_cap best distance improvements.
Normalizations use the episode's initial source-destination separation
and k_cap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .. import kernels
from ..orbital import SatelliteId
from ..topology import Edge, SnapshotGraph

DEFAULT_K_CAP = 16


@dataclass(frozen=True)
class StateVector:
    """Per-decision global features at the current node."""

    dist_to_dest_norm: float
    best_improvement_norm: float
    feasible_degree_norm: float
    busy_fraction: float
    revisit_flag: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.dist_to_dest_norm,
                self.best_improvement_norm,
                self.feasible_degree_norm,
                self.busy_fraction,
                self.revisit_flag,
            ]
        )


@dataclass(frozen=True)
class CandidateFeatures:
    """Per-candidate features for one feasible next hop."""

    improvement_norm: float
    length_ratio: float
    class_flag: float
    neighbor_degree_norm: float
    already_visited_flag: float  # always 0 under hard masking; kept for ablation

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.improvement_norm,
                self.length_ratio,
                self.class_flag,
                self.neighbor_degree_norm,
                self.already_visited_flag,
            ]
        )


def visited_mask(g: SnapshotGraph, visited: Iterable[SatelliteId]) -> np.ndarray:
    mask = np.zeros(g.num_nodes, dtype=np.uint8)
    for sat in visited:
        mask[g.local_index(sat)] = 1
    return mask


def initial_separation(g: SnapshotGraph, dest_local: int) -> float:
    """Source-destination distance used to normalize episode features."""
    if g.source_sat is None:
        raise ValueError("graph has no source satellite")
    src_local = g.local_index(g.source_sat)
    d0 = float(np.linalg.norm(g.positions[src_local] - g.positions[dest_local]))
    return d0 if d0 > 0 else 1.0


def encode_arrays(
    g: SnapshotGraph,
    v_local: int,
    dest_local: int,
    vmask: np.ndarray,
    d0: float,
    k_cap: int = DEFAULT_K_CAP,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Raw (state, candidate features, CSR edge indices) at node v."""
    return kernels.encode_step(
        g.indptr,
        g.targets,
        g.lengths,
        g.link_intra,
        g.positions,
        g.geom_degree,
        g.busy_blocked,
        vmask,
        v_local,
        dest_local,
        d0,
        k_cap,
        g.thresholds_used.l_max_intra_m,
        g.thresholds_used.l_max_inter_m,
    )


def encode(
    g: SnapshotGraph,
    v: SatelliteId,
    dest: SatelliteId,
    visited: Iterable[SatelliteId],
    k_cap: int = DEFAULT_K_CAP,
) -> tuple[StateVector, list[CandidateFeatures]]:
    """Feature encoding at node v for the decision toward dest."""
    v_local = g.local_index(v)
    dest_local = g.local_index(dest)
    d0 = initial_separation(g, dest_local)
    state, feats, _ = encode_arrays(g, v_local, dest_local, visited_mask(g, visited), d0, k_cap)
    return StateVector(*state.tolist()), [CandidateFeatures(*row) for row in feats.tolist()]


def feasible_actions(
    g: SnapshotGraph,
    v: SatelliteId,
    visited: Iterable[SatelliteId],
    k_cap: int = DEFAULT_K_CAP,
) -> list[Edge]:
    """Ordered feasible next-hop edges at v (empty list is a dead end)."""
    v_local = g.local_index(v)
    if g.dest_sat is None:
        raise ValueError("graph has no destination satellite")
    dest_local = g.local_index(g.dest_sat)
    d0 = initial_separation(g, dest_local)
    _, _, edge_idx = encode_arrays(g, v_local, dest_local, visited_mask(g, visited), d0, k_cap)
    return [g._edge(v_local, int(k)) for k in edge_idx]
