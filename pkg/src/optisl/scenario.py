"""Scenario assembly: snapshot -> serving satellites -> corridor -> graph.

Bundles the pieces every consumer (CLI commands, training episodes,
evaluation sets) needs to turn a snapshot time and a congestion seed into
a routable SnapshotGraph for one gateway pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .optics import FeasibilityThresholds, OpticalParams, compute_thresholds
from .orbital import (
    ConstellationConfig,
    Gateway,
    gateway_position,
    propagate_constellation,
    serving_satellite,
)
from .topology import (
    SnapshotGraph,
    build_snapshot_graph,
    corridor_filter,
    sample_congestion,
)

import math

DEFAULT_EPS_MIN_RAD = math.radians(10.0)
DEFAULT_CORRIDOR_HALF_WIDTH_RAD = math.radians(15.0)


class NoServingSatelliteError(Exception):
    """No satellite clears the elevation mask for a gateway."""

    def __init__(self, gateway: str, time_s: float):
        super().__init__(f"no serving satellite for gateway {gateway!r} at t={time_s}")
        self.gateway = gateway
        self.time_s = time_s


@dataclass(frozen=True)
class RoutingParams:
    """Routing-layer knobs shared by baseline and learned routing."""

    beta_s: float = 1e-3
    eps_min_rad: float = DEFAULT_EPS_MIN_RAD
    corridor_half_width_rad: float = DEFAULT_CORRIDOR_HALF_WIDTH_RAD
    corridor_enabled: bool = True
    p_busy: float = 0.05
    k_cap: int = 16
    h_max: int = 32

    def __post_init__(self) -> None:
        if self.beta_s < 0:
            raise ValueError("beta_s must be >= 0")
        if not 0 < self.eps_min_rad < math.pi / 2:
            raise ValueError("eps_min_rad must lie in (0, pi/2)")
        if self.corridor_half_width_rad <= 0:
            raise ValueError("corridor_half_width_rad must be > 0")
        if not 0.0 <= self.p_busy < 1.0:
            raise ValueError("p_busy must lie in [0, 1)")
        if self.k_cap < 1:
            raise ValueError("k_cap must be >= 1")
        if self.h_max < 1:
            raise ValueError("h_max must be >= 1")


@dataclass(frozen=True)
class ScenarioContext:
    """Precomputed invariants for one gateway pair under one config."""

    constellation: ConstellationConfig
    optics: OpticalParams
    thresholds: FeasibilityThresholds
    routing: RoutingParams
    src_gw: Gateway
    dst_gw: Gateway
    src_gw_pos: np.ndarray
    dst_gw_pos: np.ndarray
    window_s: tuple[float, float]


def prepare_scenario(
    constellation: ConstellationConfig,
    optics: OpticalParams,
    routing: RoutingParams,
    src_gw: Gateway,
    dst_gw: Gateway,
    window_s: tuple[float, float] = (0.0, 5400.0),
    threshold_mode: str = "optimized",
    fixed_divergence: float | None = None,
) -> ScenarioContext:
    thresholds = compute_thresholds(optics, threshold_mode, fixed_divergence)
    return ScenarioContext(
        constellation=constellation,
        optics=optics,
        thresholds=thresholds,
        routing=routing,
        src_gw=src_gw,
        dst_gw=dst_gw,
        src_gw_pos=gateway_position(src_gw, constellation.earth_radius_m),
        dst_gw_pos=gateway_position(dst_gw, constellation.earth_radius_m),
        window_s=window_s,
    )


def scenario_graph(
    ctx: ScenarioContext,
    t: float,
    congestion_seed: int | np.random.SeedSequence | np.random.Generator = 0,
    p_busy: float | None = None,
) -> SnapshotGraph:
    """SnapshotGraph for the gateway pair at time t.

    Raises NoServingSatelliteError when a gateway has no visible satellite
    above the elevation mask.
    """
    snap = propagate_constellation(ctx.constellation, t)
    src_sat = serving_satellite(snap, ctx.src_gw, ctx.routing.eps_min_rad)
    if src_sat is None:
        raise NoServingSatelliteError(ctx.src_gw.name, t)
    dst_sat = serving_satellite(snap, ctx.dst_gw, ctx.routing.eps_min_rad)
    if dst_sat is None:
        raise NoServingSatelliteError(ctx.dst_gw.name, t)

    if ctx.routing.corridor_enabled:
        nodes = corridor_filter(
            snap,
            ctx.src_gw_pos,
            ctx.dst_gw_pos,
            ctx.routing.corridor_half_width_rad,
            force_include=(src_sat, dst_sat),
        )
    else:
        nodes = None

    effective_p = ctx.routing.p_busy if p_busy is None else p_busy
    congestion = sample_congestion(
        effective_p, snap, protected=(src_sat, dst_sat), seed=congestion_seed
    )
    return build_snapshot_graph(
        snap,
        ctx.thresholds,
        congestion,
        corridor_nodes=nodes,
        beta_s=ctx.routing.beta_s,
        source_sat=src_sat,
        dest_sat=dst_sat,
    )
