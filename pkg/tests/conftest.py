import math

import numpy as np
import pytest

from optisl.config import default_config
from optisl.optics import FeasibilityThresholds, OpticalParams
from optisl.orbital import ConstellationConfig, Gateway, SatelliteId
from optisl.scenario import RoutingParams, prepare_scenario
from optisl.topology import graph_from_edge_list

DOHA = Gateway("doha", math.radians(25.2854), math.radians(51.5310))
LONDON = Gateway("london", math.radians(51.5074), math.radians(-0.1278))

WIDE_THRESHOLDS = FeasibilityThresholds(
    l_max_intra_m=1e9,
    l_max_inter_m=1e9,
    divergence_intra_rad=1e-3,
    divergence_inter_rad=1e-3,
)


@pytest.fixture(scope="session")
def table_constellation() -> ConstellationConfig:
    return ConstellationConfig()


@pytest.fixture(scope="session")
def table_optics() -> OpticalParams:
    return OpticalParams()


@pytest.fixture(scope="session")
def default_cfg():
    return default_config()


@pytest.fixture(scope="session")
def doha_london_ctx(table_constellation, table_optics):
    return prepare_scenario(
        table_constellation, table_optics, RoutingParams(), DOHA, LONDON
    )


def random_route_graph(rng: np.random.Generator, n_nodes: int, edge_prob: float = 0.3):
    """Random directed graph with positive lengths; for solver oracles."""
    nodes = [SatelliteId(i // 5, i % 5) for i in range(n_nodes)]
    edges = []
    for a in nodes:
        for b in nodes:
            if a == b:
                continue
            if rng.random() < edge_prob:
                edges.append((a, b, float(rng.uniform(1e5, 3e6))))
    positions = rng.uniform(-5e6, 5e6, size=(n_nodes, 3))
    return graph_from_edge_list(
        nodes,
        edges,
        WIDE_THRESHOLDS,
        beta_s=1e-3,
        positions=positions,
        source_sat=nodes[0],
        dest_sat=nodes[-1],
    )


def random_geometric_graph(rng: np.random.Generator, n_nodes: int, radius: float = 4e6):
    """Random geometric digraph: lengths are true point separations."""
    nodes = [SatelliteId(i // 5, i % 5) for i in range(n_nodes)]
    positions = rng.uniform(-5e6, 5e6, size=(n_nodes, 3))
    edges = []
    for i, a in enumerate(nodes):
        for j, b in enumerate(nodes):
            if i == j:
                continue
            dist = float(np.linalg.norm(positions[i] - positions[j]))
            if dist <= radius:
                edges.append((a, b, dist))
    return graph_from_edge_list(
        nodes,
        edges,
        WIDE_THRESHOLDS,
        beta_s=1e-3,
        positions=positions,
        source_sat=nodes[0],
        dest_sat=nodes[-1],
    )
