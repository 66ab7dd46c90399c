"""Optical LEO inter-satellite-link routing simulator.

Derives jitter-limited per-class ISL range limits offline, builds
time-snapshot feasible-link graphs over a Walker-style constellation, and
routes gateway-to-gateway flows with an exact constrained shortest-path
solver and a masked-action value-learning next-hop policy.
"""

__version__ = "0.1.0"

from .optics import (
    FeasibilityThresholds,
    LinkClass,
    OpticalParams,
    compute_thresholds,
)
from .orbital import (
    ConstellationConfig,
    ConstellationSnapshot,
    Gateway,
    SatelliteId,
    propagate_constellation,
    satellite_position,
    serving_satellite,
)
from .routing import RouteResult, brute_force_path, path_metrics, shortest_path
from .scenario import RoutingParams, prepare_scenario, scenario_graph
from .topology import (
    CongestionState,
    Edge,
    SnapshotGraph,
    build_snapshot_graph,
    classify_link,
    corridor_filter,
    link_cost,
    sample_congestion,
)

__all__ = [
    "CongestionState",
    "ConstellationConfig",
    "ConstellationSnapshot",
    "Edge",
    "FeasibilityThresholds",
    "Gateway",
    "LinkClass",
    "OpticalParams",
    "RouteResult",
    "RoutingParams",
    "SatelliteId",
    "SnapshotGraph",
    "__version__",
    "brute_force_path",
    "build_snapshot_graph",
    "classify_link",
    "compute_thresholds",
    "corridor_filter",
    "link_cost",
    "path_metrics",
    "prepare_scenario",
    "propagate_constellation",
    "sample_congestion",
    "satellite_position",
    "scenario_graph",
    "serving_satellite",
    "shortest_path",
]
