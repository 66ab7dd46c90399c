"""Exact snapshot routing: Dijkstra with deterministic tie-breaking.

The per-snapshot problem is a plain shortest path once the feasibility
constraints are baked into the edge set. Ties resolve by fewer hops, then
the lexicographically smallest node sequence, so results (and golden
files) are byte-stable. A brute-force enumerator over simple paths serves
as the optimality oracle on small graphs.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .topology import Edge, SnapshotGraph
from .orbital import SatelliteId

BRUTE_FORCE_NODE_LIMIT = 14


@dataclass(frozen=True)
class RouteResult:
    """Ordered hop list with totals. Unreached routes keep any hops walked."""

    hops: tuple[Edge, ...]
    total_cost_s: float
    total_length_m: float
    hop_count: int
    reached: bool

    def hop_breakdown(self) -> list[dict]:
        return [
            {
                "from": hop.from_id,
                "to": hop.to_id,
                "length_m": hop.length_m,
                "link_class": hop.link_class.value,
                "tau_s": hop.tau_s,
                "cost_s": hop.cost_s,
            }
            for hop in self.hops
        ]


def _edge_index(g: SnapshotGraph, a: int, b: int) -> int:
    """CSR index of edge a->b (targets within a row are sorted)."""
    lo, hi = g.out_edge_range(a)
    pos = lo + int(np.searchsorted(g.targets[lo:hi], b))
    if pos >= hi or int(g.targets[pos]) != b:
        raise KeyError(f"no edge {a}->{b}")
    return pos


def _route_from_local_path(g: SnapshotGraph, path: tuple[int, ...], reached: bool) -> RouteResult:
    """Build a RouteResult from a node-local path, summing costs in hop order."""
    if len(path) <= 1:
        return RouteResult((), 0.0, 0.0, 0, reached)
    hops = []
    total_cost = 0.0
    total_len = 0.0
    for a, b in zip(path[:-1], path[1:]):
        k = _edge_index(g, a, b)
        hops.append(g._edge(a, k))
        total_cost = total_cost + float(g.costs[k])
        total_len = total_len + float(g.lengths[k])
    return RouteResult(tuple(hops), total_cost, total_len, len(hops), reached)


def shortest_path(g: SnapshotGraph, s: SatelliteId, d: SatelliteId) -> RouteResult:
    """Minimum-total-cost simple path from s to d, or reached=False.

    Labels are (cost, hops, node sequence) compared lexicographically, so
    the returned path is the unique tie-broken optimum.
    """
    s_loc = g.local_index(s)
    d_loc = g.local_index(d)
    if s_loc == d_loc:
        return RouteResult((), 0.0, 0.0, 0, True)
    heap: list[tuple[float, int, tuple[int, ...]]] = [(0.0, 0, (s_loc,))]
    done: set[int] = set()
    while heap:
        cost, hops, path = heapq.heappop(heap)
        v = path[-1]
        if v in done:
            continue
        done.add(v)
        if v == d_loc:
            return _route_from_local_path(g, path, True)
        lo, hi = g.out_edge_range(v)
        for k in range(lo, hi):
            j = int(g.targets[k])
            if j in done or j in path:
                continue
            heapq.heappush(heap, (cost + float(g.costs[k]), hops + 1, path + (j,)))
    return RouteResult((), 0.0, 0.0, 0, False)


def brute_force_path(g: SnapshotGraph, s: SatelliteId, d: SatelliteId) -> RouteResult:
    """Exhaustive minimum over all simple paths; oracle for shortest_path."""
    if g.num_nodes > BRUTE_FORCE_NODE_LIMIT:
        raise ValueError(f"graph too large for brute force ({g.num_nodes} nodes)")
    s_loc = g.local_index(s)
    d_loc = g.local_index(d)
    if s_loc == d_loc:
        return RouteResult((), 0.0, 0.0, 0, True)

    best: tuple[float, int, tuple[int, ...]] | None = None

    def visit(v: int, cost: float, path: tuple[int, ...]) -> None:
        nonlocal best
        if v == d_loc:
            label = (cost, len(path) - 1, path)
            if best is None or label < best:
                best = label
            return
        lo, hi = g.out_edge_range(v)
        for k in range(lo, hi):
            j = int(g.targets[k])
            if j in path:
                continue
            visit(j, cost + float(g.costs[k]), path + (j,))

    visit(s_loc, 0.0, (s_loc,))
    if best is None:
        return RouteResult((), 0.0, 0.0, 0, False)
    return _route_from_local_path(g, best[2], True)


def path_metrics(route: RouteResult) -> dict:
    """Reporting aggregates for one route."""
    intra = sum(1 for h in route.hops if h.link_class.value == "intra")
    return {
        "delay_ms": route.total_cost_s * 1e3,
        "hops": route.hop_count,
        "intra_count": intra,
        "inter_count": route.hop_count - intra,
        "length_km": route.total_length_m / 1e3,
    }
