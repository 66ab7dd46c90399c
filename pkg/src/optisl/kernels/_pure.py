"""NumPy reference implementations of the per-snapshot hot kernels.

Mirrors the compiled backend operation for operation (same elementwise
arithmetic, same ordering, same tie handling) so both produce bit-identical
results; parity is enforced by tests.
"""

from __future__ import annotations

import numpy as np


def pairwise_edges(
    pos: np.ndarray,
    plane: np.ndarray,
    busy: np.ndarray,
    l_intra: float,
    l_inter: float,
):
    """Feasible directed edges among a node set, by brute pairwise scan.

    An ordered pair (i, j), i != j, is a geometric neighbor pair when the
    separation is within the class limit (intra if same plane). Edges into
    busy nodes are suppressed but still counted in ``busy_blocked``.

    Returns (src, dst, length, is_intra, geom_degree, busy_blocked); edges
    are emitted in ascending (src, dst) order.
    """
    pos = np.ascontiguousarray(pos, dtype=np.float64)
    plane = np.asarray(plane, dtype=np.int32)
    busy = np.asarray(busy, dtype=np.uint8)
    dx = pos[:, 0][:, None] - pos[:, 0][None, :]
    dy = pos[:, 1][:, None] - pos[:, 1][None, :]
    dz = pos[:, 2][:, None] - pos[:, 2][None, :]
    dist = np.sqrt(dx * dx + dy * dy + dz * dz)
    same = plane[:, None] == plane[None, :]
    limit = np.where(same, l_intra, l_inter)
    within = dist <= limit
    np.fill_diagonal(within, False)
    geom_degree = within.sum(axis=1).astype(np.int32)
    busy_col = busy.astype(bool)[None, :]
    busy_blocked = (within & busy_col).sum(axis=1).astype(np.int32)
    keep = within & ~busy_col
    src, dst = np.nonzero(keep)  # row-major: sorted by (src, dst)
    return (
        src.astype(np.int32),
        dst.astype(np.int32),
        dist[keep],
        same[keep].astype(np.uint8),
        geom_degree,
        busy_blocked,
    )


def encode_step(
    indptr: np.ndarray,
    targets: np.ndarray,
    lengths: np.ndarray,
    is_intra: np.ndarray,
    pos: np.ndarray,
    geom_degree: np.ndarray,
    busy_blocked: np.ndarray,
    visited: np.ndarray,
    v: int,
    dest: int,
    d0: float,
    k_cap: int,
    l_intra: float,
    l_inter: float,
):
    """Per-decision feature encoding at node v of a CSR snapshot graph.

    Candidates are v's unvisited out-neighbors, capped to the k_cap
    largest distance improvements (stable ties keep adjacency order).

    Returns (state, cand_feats, edge_idx):
      state[5]   = [dist_to_dest/d0, best improvement/d0,
                    |candidates|/k_cap, busy fraction, revisit flag]
      feats[n,5] = [improvement/d0, length/class limit, intra flag,
                    unvisited degree of target / k_cap, 0]
      edge_idx[n] = CSR edge indices of the candidates.
    """
    s, e = int(indptr[v]), int(indptr[v + 1])
    tgt = targets[s:e]
    vis = visited[tgt].astype(bool)
    revisit = 1.0 if bool(vis.any()) else 0.0
    keep = ~vis
    edge_idx = np.arange(s, e, dtype=np.int32)[keep]
    tj = tgt[keep]

    dvx = pos[v, 0] - pos[dest, 0]
    dvy = pos[v, 1] - pos[dest, 1]
    dvz = pos[v, 2] - pos[dest, 2]
    dist_v = np.sqrt(dvx * dvx + dvy * dvy + dvz * dvz)

    ddx = pos[tj, 0] - pos[dest, 0]
    ddy = pos[tj, 1] - pos[dest, 1]
    ddz = pos[tj, 2] - pos[dest, 2]
    dist_j = np.sqrt(ddx * ddx + ddy * ddy + ddz * ddz)
    improvement = (dist_v - dist_j) / d0
    best_improvement = float(improvement.max()) if improvement.size else 0.0

    if improvement.size > k_cap:
        order = np.argsort(-improvement, kind="stable")
        sel = np.sort(order[:k_cap])
        edge_idx = edge_idx[sel]
        tj = tj[sel]
        improvement = improvement[sel]

    n = edge_idx.size
    feats = np.empty((n, 5), dtype=np.float64)
    if n:
        feats[:, 0] = improvement
        limit = np.where(is_intra[edge_idx] == 1, l_intra, l_inter)
        feats[:, 1] = lengths[edge_idx] / limit
        feats[:, 2] = is_intra[edge_idx].astype(np.float64)
        ndeg = np.empty(n, dtype=np.float64)
        for c in range(n):
            j = int(tj[c])
            row = targets[indptr[j] : indptr[j + 1]]
            cnt = int(np.count_nonzero(visited[row] == 0))
            ndeg[c] = min(cnt, k_cap) / k_cap
        feats[:, 3] = ndeg
        feats[:, 4] = 0.0

    gd = int(geom_degree[v])
    busy_fraction = float(busy_blocked[v]) / gd if gd > 0 else 0.0
    state = np.array(
        [dist_v / d0, best_improvement, n / k_cap, busy_fraction, revisit],
        dtype=np.float64,
    )
    return state, feats, edge_idx
