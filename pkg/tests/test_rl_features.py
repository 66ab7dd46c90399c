import math

import numpy as np
import pytest

from conftest import WIDE_THRESHOLDS, random_geometric_graph

from optisl.optics import FeasibilityThresholds
from optisl.orbital import SatelliteId
from optisl.rl.features import encode, feasible_actions, visited_mask
from optisl.topology import graph_from_edge_list

N0, N1, N2, N3 = SatelliteId(0, 0), SatelliteId(0, 1), SatelliteId(1, 0), SatelliteId(2, 0)


def golden_graph():
    positions = np.array(
        [[0.0, 0.0, 0.0], [4.0, 3.0, 0.0], [4.0, -3.0, 0.0], [10.0, 0.0, 0.0]]
    )
    thresholds = FeasibilityThresholds(8.0, 7.0, 1e-3, 1e-3)
    edges = [
        (N0, N1, 5.0),
        (N0, N2, 5.0),
        (N1, N0, 5.0),
        (N1, N3, math.sqrt(45.0)),
        (N2, N0, 5.0),
        (N2, N3, math.sqrt(45.0)),
    ]
    return graph_from_edge_list(
        [N0, N1, N2, N3],
        edges,
        thresholds,
        beta_s=0.0,
        positions=positions,
        source_sat=N0,
        dest_sat=N3,
    )


def test_golden_hand_computed_features():
    g = golden_graph()
    state, cands = encode(g, N0, N3, {N0}, k_cap=4)
    improvement = (10.0 - math.sqrt(45.0)) / 10.0
    assert state.dist_to_dest_norm == pytest.approx(1.0, rel=1e-12)
    assert state.best_improvement_norm == pytest.approx(improvement, rel=1e-12)
    assert state.feasible_degree_norm == pytest.approx(0.5)
    assert state.busy_fraction == 0.0
    assert state.revisit_flag == 0.0
    assert len(cands) == 2
    first, second = cands  # adjacency order: (0,1) before (1,0)
    assert first.improvement_norm == pytest.approx(improvement, rel=1e-12)
    assert first.length_ratio == pytest.approx(5.0 / 8.0, rel=1e-12)
    assert first.class_flag == 1.0
    assert first.neighbor_degree_norm == pytest.approx(0.25)
    assert first.already_visited_flag == 0.0
    assert second.length_ratio == pytest.approx(5.0 / 7.0, rel=1e-12)
    assert second.class_flag == 0.0
    assert second.neighbor_degree_norm == pytest.approx(0.25)


def test_revisit_flag_and_masking():
    g = golden_graph()
    state, cands = encode(g, N1, N3, {N0, N1}, k_cap=4)
    assert state.revisit_flag == 1.0  # the edge back to the visited source
    assert len(cands) == 1  # only the destination remains
    actions = feasible_actions(g, N1, {N0, N1}, k_cap=4)
    assert [a.to_id for a in actions] == [N3]


def test_encode_at_destination():
    g = golden_graph()
    state, _ = encode(g, N3, N3, {N3}, k_cap=4)
    assert state.dist_to_dest_norm == 0.0


def test_isolated_node_empty_candidates():
    lone = SatelliteId(3, 0)
    positions = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    g = graph_from_edge_list(
        [N0, lone], [], WIDE_THRESHOLDS, positions=positions, source_sat=N0, dest_sat=lone
    )
    state, cands = encode(g, N0, lone, {N0}, k_cap=4)
    assert cands == []
    assert state.feasible_degree_norm == 0.0
    assert state.best_improvement_norm == 0.0


def test_all_neighbors_visited_is_dead_end():
    g = golden_graph()
    actions = feasible_actions(g, N0, {N0, N1, N2}, k_cap=4)
    assert actions == []


def test_destination_among_candidates():
    g = golden_graph()
    actions = feasible_actions(g, N1, {N0, N1}, k_cap=4)
    assert any(a.to_id == N3 for a in actions)


def test_k_cap_keeps_largest_improvements():
    rng = np.random.default_rng(21)
    for _ in range(10):
        g = random_geometric_graph(rng, 12, radius=8e6)
        dest = g.dest_sat
        v = g.source_sat
        full = feasible_actions(g, v, {v}, k_cap=100)
        capped = feasible_actions(g, v, {v}, k_cap=3)
        assert len(capped) == min(3, len(full))
        if len(full) > 3:
            d_pos = g.positions[g.local_index(dest)]
            v_pos = g.positions[g.local_index(v)]

            def improvement(edge):
                j = g.local_index(edge.to_id)
                return float(
                    np.linalg.norm(v_pos - d_pos) - np.linalg.norm(g.positions[j] - d_pos)
                )

            kept = sorted(improvement(e) for e in capped)
            best = sorted((improvement(e) for e in full), reverse=True)[:3]
            assert kept == sorted(best)


def test_candidate_invariants_random_graphs():
    rng = np.random.default_rng(31)
    for _ in range(10):
        g = random_geometric_graph(rng, 15, radius=7e6)
        state, cands = encode(g, g.source_sat, g.dest_sat, {g.source_sat}, k_cap=8)
        arr = state.as_array()
        assert np.all(np.isfinite(arr))
        assert state.dist_to_dest_norm >= 0
        assert 0 <= state.feasible_degree_norm <= 1
        assert state.revisit_flag in (0.0, 1.0)
        for c in cands:
            assert 0 < c.length_ratio <= 1.0
            assert c.class_flag in (0.0, 1.0)
            assert 0 <= c.neighbor_degree_norm <= 1
            assert c.already_visited_flag == 0.0
            assert np.all(np.isfinite(c.as_array()))


def test_feasible_actions_respect_graph_filters(doha_london_ctx):
    from optisl.scenario import scenario_graph

    g = scenario_graph(doha_london_ctx, 1234.0, congestion_seed=3)
    actions = feasible_actions(g, g.source_sat, {g.source_sat})
    for edge in actions:
        assert edge.length_m <= g.thresholds_used.threshold_for(edge.link_class)
        assert not g.is_busy(edge.to_id)


def test_visited_mask_roundtrip():
    g = golden_graph()
    mask = visited_mask(g, {N0, N3})
    assert mask.tolist() == [1, 0, 0, 1]
