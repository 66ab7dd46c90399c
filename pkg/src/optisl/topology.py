"""Per-snapshot feasible-link graph construction.

A snapshot graph is directed: an edge i->j exists when the separation is
within the class range limit (intra-plane links use the longer limit) and
j is not congestion-excluded. Adjacency is stored CSR-style over node-local
indices sorted by (plane, slot), which makes construction deterministic and
exports byte-stable. Instances are immutable by convention and safe to
share across routing workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, Iterator, Optional, Sequence

import numpy as np

from . import kernels
from .optics import FeasibilityThresholds, LinkClass
from .orbital import ConstellationSnapshot, SatelliteId

C_LIGHT_M_S = 299_792_458.0
DEFAULT_BETA_S = 1e-3


class DegenerateCorridorError(Exception):
    """Gateway pair does not define a great-circle corridor."""


@dataclass(frozen=True)
class Edge:
    """One directed feasible link with its routing cost."""

    from_id: SatelliteId
    to_id: SatelliteId
    length_m: float
    link_class: LinkClass
    cost_s: float

    @property
    def tau_s(self) -> float:
        """Propagation delay, excluding the per-hop forwarding overhead."""
        return self.length_m / C_LIGHT_M_S


@dataclass(frozen=True)
class CongestionState:
    """Set of congestion-excluded satellites for one snapshot.

    q_occupancy/q_max are carried as named placeholders for a queue-based
    exclusion rule; the sampled Bernoulli flags stand in for it.
    """

    busy: FrozenSet[SatelliteId]
    p_busy: float
    q_max: Optional[float] = None


EMPTY_CONGESTION = CongestionState(busy=frozenset(), p_busy=0.0)


def classify_link(i: SatelliteId, j: SatelliteId) -> LinkClass:
    """Intra-plane iff both endpoints share an orbital plane."""
    if i == j:
        raise ValueError("self link")
    if i.plane_index == j.plane_index:
        return LinkClass.INTRA_PLANE
    return LinkClass.INTER_PLANE


def link_cost(length_m: float, beta_s: float) -> float:
    """Per-hop cost: propagation delay plus constant forwarding overhead."""
    if length_m < 0:
        raise ValueError("length_m must be >= 0")
    if beta_s < 0:
        raise ValueError("beta_s must be >= 0")
    return length_m / C_LIGHT_M_S + beta_s


def sample_congestion(
    p_busy: float,
    snapshot: ConstellationSnapshot,
    protected: Iterable[SatelliteId] = (),
    seed: int | np.random.Generator | np.random.SeedSequence = 0,
) -> CongestionState:
    """Mark each non-protected satellite busy independently with p_busy."""
    if not 0.0 <= p_busy < 1.0:
        raise ValueError("p_busy must lie in [0, 1)")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    flags = rng.random(snapshot.num_satellites) < p_busy
    protected_idx = {snapshot.index_of(s) for s in protected}
    busy = frozenset(
        snapshot.id_of(i)
        for i in np.nonzero(flags)[0]
        if int(i) not in protected_idx
    )
    return CongestionState(busy=busy, p_busy=p_busy)


def corridor_filter(
    snapshot: ConstellationSnapshot,
    src_gw_pos: np.ndarray,
    dst_gw_pos: np.ndarray,
    half_width_rad: float,
    force_include: Iterable[SatelliteId] = (),
) -> set[SatelliteId]:
    """Satellites within an angular band around the gateway great circle.

    A satellite passes when its angular offset from the plane spanned by
    the gateway vectors is at most half_width_rad and its along-arc angle
    lies within the gateway arc extended by half_width_rad at both ends.
    A half width of pi/2 or more keeps every satellite (the band bound is
    vacuous there). ``force_include`` entries are always kept.
    """
    if half_width_rad <= 0:
        raise ValueError("half_width_rad must be > 0")
    g1 = np.asarray(src_gw_pos, dtype=float)
    g2 = np.asarray(dst_gw_pos, dtype=float)
    normal = np.cross(g1, g2)
    norm_n = float(np.linalg.norm(normal))
    if norm_n <= 1e-9 * float(np.linalg.norm(g1)) * float(np.linalg.norm(g2)):
        raise DegenerateCorridorError("degenerate corridor: gateways (anti)parallel")

    kept: set[SatelliteId] = set(force_include)
    if half_width_rad >= math.pi / 2:
        kept.update(snapshot.sat_ids())
        return kept

    n_hat = normal / norm_n
    e1 = g1 / np.linalg.norm(g1)
    e2 = g2 - (g2 @ e1) * e1
    e2 = e2 / np.linalg.norm(e2)
    arc = math.atan2(float(g2 @ e2), float(g2 @ e1))  # central angle, in (0, pi)

    unit = snapshot.positions / np.linalg.norm(snapshot.positions, axis=1)[:, None]
    off_plane = np.arcsin(np.clip(unit @ n_hat, -1.0, 1.0))
    along = np.arctan2(unit @ e2, unit @ e1)
    ok = (np.abs(off_plane) <= half_width_rad) & (along >= -half_width_rad) & (
        along <= arc + half_width_rad
    )
    kept.update(snapshot.id_of(int(i)) for i in np.nonzero(ok)[0])
    return kept


@dataclass
class SnapshotGraph:
    """Feasibility-filtered directed link graph at one instant.

    Nodes are the corridor-admitted satellites; busy nodes stay present but
    receive no incoming edges. Treat instances as read-only.
    """

    time_s: float
    node_plane: np.ndarray  # (M,) int32
    node_slot: np.ndarray  # (M,) int32
    positions: np.ndarray  # (M, 3) float64
    busy: np.ndarray  # (M,) uint8
    geom_degree: np.ndarray  # (M,) int32, in-range neighbors incl. busy
    busy_blocked: np.ndarray  # (M,) int32, in-range neighbors that are busy
    indptr: np.ndarray  # (M+1,) int32
    targets: np.ndarray  # (E,) int32, node-local
    lengths: np.ndarray  # (E,) float64
    link_intra: np.ndarray  # (E,) uint8
    costs: np.ndarray  # (E,) float64
    thresholds_used: FeasibilityThresholds
    beta_s: float
    source_sat: Optional[SatelliteId] = None
    dest_sat: Optional[SatelliteId] = None
    _local: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self._local = {
            SatelliteId(int(p), int(k)): i
            for i, (p, k) in enumerate(zip(self.node_plane, self.node_slot))
        }

    @property
    def num_nodes(self) -> int:
        return int(self.node_plane.shape[0])

    @property
    def num_edges(self) -> int:
        return int(self.targets.shape[0])

    @property
    def nodes(self) -> tuple[SatelliteId, ...]:
        return tuple(sorted(self._local, key=lambda s: (s.plane_index, s.slot_index)))

    def local_index(self, sat: SatelliteId) -> int:
        try:
            return self._local[sat]
        except KeyError:
            raise ValueError(f"endpoint outside graph: {sat}") from None

    def sat_of(self, local: int) -> SatelliteId:
        return SatelliteId(int(self.node_plane[local]), int(self.node_slot[local]))

    def edge(self, k: int) -> Edge:
        src = int(np.searchsorted(self.indptr, k, side="right")) - 1
        return self._edge(src, k)

    def _edge(self, src_local: int, k: int) -> Edge:
        cls = LinkClass.INTRA_PLANE if self.link_intra[k] else LinkClass.INTER_PLANE
        return Edge(
            from_id=self.sat_of(src_local),
            to_id=self.sat_of(int(self.targets[k])),
            length_m=float(self.lengths[k]),
            link_class=cls,
            cost_s=float(self.costs[k]),
        )

    def out_edge_range(self, local: int) -> tuple[int, int]:
        return int(self.indptr[local]), int(self.indptr[local + 1])

    def edges_from(self, sat: SatelliteId) -> tuple[Edge, ...]:
        v = self.local_index(sat)
        s, e = self.out_edge_range(v)
        return tuple(self._edge(v, k) for k in range(s, e))

    def iter_edges(self) -> Iterator[Edge]:
        for v in range(self.num_nodes):
            s, e = self.out_edge_range(v)
            for k in range(s, e):
                yield self._edge(v, k)

    def is_busy(self, sat: SatelliteId) -> bool:
        return bool(self.busy[self.local_index(sat)])


def build_snapshot_graph(
    snapshot: ConstellationSnapshot,
    thresholds: FeasibilityThresholds,
    congestion: CongestionState = EMPTY_CONGESTION,
    corridor_nodes: Optional[Iterable[SatelliteId]] = None,
    beta_s: float = DEFAULT_BETA_S,
    source_sat: Optional[SatelliteId] = None,
    dest_sat: Optional[SatelliteId] = None,
) -> SnapshotGraph:
    """Assemble the feasible-link graph over the admitted node set.

    corridor_nodes=None admits every satellite. Source/destination serving
    satellites, when given, must be admitted and not busy.
    """
    if corridor_nodes is None:
        flat = np.arange(snapshot.num_satellites, dtype=np.int64)
    else:
        flat = np.array(sorted(snapshot.index_of(s) for s in corridor_nodes), dtype=np.int64)
        if flat.size == 0:
            raise ValueError("corridor node set is empty")
    k_per = snapshot.sats_per_plane
    node_plane = (flat // k_per).astype(np.int32)
    node_slot = (flat % k_per).astype(np.int32)
    positions = np.ascontiguousarray(snapshot.positions[flat])

    busy_local = np.zeros(flat.size, dtype=np.uint8)
    if congestion.busy:
        busy_flat = {snapshot.index_of(s) for s in congestion.busy}
        for i, f in enumerate(flat):
            if int(f) in busy_flat:
                busy_local[i] = 1

    for name, sat in (("source", source_sat), ("dest", dest_sat)):
        if sat is None:
            continue
        idx = snapshot.index_of(sat)
        pos = np.searchsorted(flat, idx)
        if pos >= flat.size or flat[pos] != idx:
            raise ValueError(f"{name} serving satellite {sat} not in corridor nodes")
        if busy_local[pos]:
            raise ValueError(f"{name} serving satellite {sat} is marked busy")

    src, dst, lengths, is_intra, geom_degree, busy_blocked = kernels.pairwise_edges(
        positions,
        node_plane,
        busy_local,
        thresholds.l_max_intra_m,
        thresholds.l_max_inter_m,
    )
    costs = lengths / C_LIGHT_M_S + beta_s
    counts = np.bincount(src, minlength=flat.size).astype(np.int64)
    indptr = np.zeros(flat.size + 1, dtype=np.int32)
    np.cumsum(counts, out=indptr[1:])
    return SnapshotGraph(
        time_s=snapshot.time_s,
        node_plane=node_plane,
        node_slot=node_slot,
        positions=positions,
        busy=busy_local,
        geom_degree=geom_degree,
        busy_blocked=busy_blocked,
        indptr=indptr,
        targets=dst,
        lengths=lengths,
        link_intra=is_intra,
        costs=costs,
        thresholds_used=thresholds,
        beta_s=beta_s,
        source_sat=source_sat,
        dest_sat=dest_sat,
    )


def graph_from_edge_list(
    nodes: Sequence[SatelliteId],
    edges: Iterable[tuple[SatelliteId, SatelliteId, float]],
    thresholds: FeasibilityThresholds,
    beta_s: float = DEFAULT_BETA_S,
    positions: Optional[np.ndarray] = None,
    busy: Iterable[SatelliteId] = (),
    time_s: float = 0.0,
    source_sat: Optional[SatelliteId] = None,
    dest_sat: Optional[SatelliteId] = None,
) -> SnapshotGraph:
    """Build a SnapshotGraph from an explicit edge list (test scaffolding).

    Edges are (from, to, length_m); the class is derived from the plane
    indices and the class range limit is enforced.
    """
    ordered = sorted(nodes, key=lambda s: (s.plane_index, s.slot_index))
    local = {s: i for i, s in enumerate(ordered)}
    m = len(ordered)
    if positions is None:
        positions = np.zeros((m, 3), dtype=np.float64)
    positions = np.ascontiguousarray(positions, dtype=np.float64)
    busy_set = set(busy)
    busy_local = np.zeros(m, dtype=np.uint8)
    for s in busy_set:
        busy_local[local[s]] = 1

    entries = []
    for a, b, length in edges:
        cls = classify_link(a, b)
        if length > thresholds.threshold_for(cls):
            raise ValueError(f"edge {a}->{b} exceeds its class range limit")
        if b in busy_set:
            raise ValueError(f"edge {a}->{b} terminates at a busy node")
        entries.append((local[a], local[b], float(length), cls is LinkClass.INTRA_PLANE))
    entries.sort(key=lambda r: (r[0], r[1]))

    src = np.array([r[0] for r in entries], dtype=np.int32)
    dst = np.array([r[1] for r in entries], dtype=np.int32)
    lengths = np.array([r[2] for r in entries], dtype=np.float64)
    is_intra = np.array([1 if r[3] else 0 for r in entries], dtype=np.uint8)
    costs = lengths / C_LIGHT_M_S + beta_s
    counts = np.bincount(src, minlength=m).astype(np.int64)
    indptr = np.zeros(m + 1, dtype=np.int32)
    np.cumsum(counts, out=indptr[1:])

    # geometric-degree bookkeeping is approximate here: out-degree incl. busy
    geom_degree = counts.astype(np.int32)
    return SnapshotGraph(
        time_s=time_s,
        node_plane=np.array([s.plane_index for s in ordered], dtype=np.int32),
        node_slot=np.array([s.slot_index for s in ordered], dtype=np.int32),
        positions=positions,
        busy=busy_local,
        geom_degree=geom_degree,
        busy_blocked=np.zeros(m, dtype=np.int32),
        indptr=indptr,
        targets=dst,
        lengths=lengths,
        link_intra=is_intra,
        costs=costs,
        thresholds_used=thresholds,
        beta_s=beta_s,
        source_sat=source_sat,
        dest_sat=dest_sat,
    )
