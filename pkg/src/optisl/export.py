"""Structured artifact writers: manifests, graph JSONL, route records.

Artifacts carry no timestamps and keys are sorted, so identical
(config, seed) runs produce byte-identical files.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .orbital import ConstellationSnapshot, SatelliteId
from .routing import RouteResult
from .topology import C_LIGHT_M_S, CongestionState, SnapshotGraph


def _sat_key(sat: SatelliteId) -> str:
    return f"{sat.plane_index}-{sat.slot_index}"


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_manifest(
    out_dir: Path,
    command: str,
    effective_config: dict,
    seed: int,
    thresholds: dict | None = None,
    artifacts: tuple[str, ...] = (),
) -> Path:
    manifest = {
        "command": command,
        "version": __version__,
        "kernel_backend": kernels.backend(),
        "seed": seed,
        "config": effective_config,
        "artifacts": sorted(artifacts),
    }
    if thresholds is not None:
        manifest["thresholds"] = thresholds
    path = out_dir / "manifest.json"
    write_json(path, manifest)
    return path


def thresholds_dict(thresholds) -> dict:
    return {
        "l_max_intra_km": thresholds.l_max_intra_m / 1e3,
        "l_max_inter_km": thresholds.l_max_inter_m / 1e3,
        "divergence_intra_mrad": thresholds.divergence_intra_rad * 1e3,
        "divergence_inter_mrad": thresholds.divergence_inter_rad * 1e3,
    }


def geodetic_of(position: np.ndarray, earth_radius_m: float) -> dict:
    r = float(np.linalg.norm(position))
    return {
        "lat_deg": math.degrees(math.asin(float(position[2]) / r)),
        "lon_deg": math.degrees(math.atan2(float(position[1]), float(position[0]))),
        "alt_km": (r - earth_radius_m) / 1e3,
    }


def export_graph_jsonl(
    path: Path,
    snapshot: ConstellationSnapshot,
    graph: SnapshotGraph,
    congestion: CongestionState,
) -> None:
    """Node records for the whole constellation, then the graph's edges."""
    in_graph = {
        SatelliteId(int(p), int(k))
        for p, k in zip(graph.node_plane, graph.node_slot)
    }
    busy = congestion.busy
    with path.open("w") as fh:
        for sat in snapshot.sat_ids():
            record = {
                "type": "node",
                "id": _sat_key(sat),
                "plane": sat.plane_index,
                "slot": sat.slot_index,
                "busy": sat in busy,
                "in_corridor": sat in in_graph,
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")
        for edge in graph.iter_edges():
            record = {
                "type": "edge",
                "t": graph.time_s,
                "from": _sat_key(edge.from_id),
                "to": _sat_key(edge.to_id),
                "length_m": edge.length_m,
                "class": edge.link_class.value,
                "cost_s": edge.cost_s,
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def route_record(
    graph: SnapshotGraph,
    route: RouteResult,
    earth_radius_m: float,
    src_gw_pos: np.ndarray,
    dst_gw_pos: np.ndarray,
    src_gw_name: str,
    dst_gw_name: str,
    beta_s: float,
    congestion_seed: int,
) -> dict:
    """One snapshot's routing outcome, with gateway legs and totals.

    ISL totals cover the satellite path only; end-to-end totals add the
    gateway uplink and downlink legs, each costed like a hop.
    """
    src_pos = graph.positions[graph.local_index(graph.source_sat)]
    dst_pos = graph.positions[graph.local_index(graph.dest_sat)]
    up_m = float(np.linalg.norm(src_pos - src_gw_pos))
    down_m = float(np.linalg.norm(dst_pos - dst_gw_pos))
    hops = []
    for edge in route.hops:
        to_local = graph.local_index(edge.to_id)
        hops.append(
            {
                "from": _sat_key(edge.from_id),
                "to": _sat_key(edge.to_id),
                "class": edge.link_class.value,
                "length_m": edge.length_m,
                "tau_s": edge.tau_s,
                "cost_s": edge.cost_s,
                "to_geodetic": geodetic_of(graph.positions[to_local], earth_radius_m),
            }
        )
    record = {
        "t": graph.time_s,
        "congestion_seed": congestion_seed,
        "source_gateway": src_gw_name,
        "dest_gateway": dst_gw_name,
        "source_sat": _sat_key(graph.source_sat),
        "dest_sat": _sat_key(graph.dest_sat),
        "source_sat_geodetic": geodetic_of(src_pos, earth_radius_m),
        "reached": route.reached,
        "hops": hops,
        "isl_totals": {
            "cost_s": route.total_cost_s,
            "length_m": route.total_length_m,
            "hop_count": route.hop_count,
        },
        "gateway_legs": {
            "uplink_m": up_m,
            "downlink_m": down_m,
            "uplink_cost_s": up_m / C_LIGHT_M_S + beta_s,
            "downlink_cost_s": down_m / C_LIGHT_M_S + beta_s,
        },
    }
    if route.reached:
        end_to_end_cost = (
            route.total_cost_s
            + up_m / C_LIGHT_M_S
            + beta_s
            + down_m / C_LIGHT_M_S
            + beta_s
        )
        record["end_to_end"] = {
            "delay_ms": end_to_end_cost * 1e3,
            "hop_count": route.hop_count + 2,
            "length_m": route.total_length_m + up_m + down_m,
        }
    else:
        record["failure"] = "no feasible route at snapshot t"
    return record
