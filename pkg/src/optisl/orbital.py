"""Constellation geometry: circular-orbit propagation, gateways, visibility.

All positions are Cartesian 3-vectors in meters, expressed in one inertial
frame shared by satellites and gateways. Gateways are mapped to fixed
vectors in that frame (no Earth-rotation term); snapshots at different
times are independent of each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, NamedTuple, Optional

import numpy as np

MU_EARTH_M3S2 = 3.986004418e14
EARTH_RADIUS_M = 6_371_000.0


class SatelliteId(NamedTuple):
    """Satellite address: orbital plane index and in-plane slot index."""

    plane_index: int
    slot_index: int


@dataclass(frozen=True)
class ConstellationConfig:
    """Walker-style shell of circular orbits, all at one altitude.

    ``raan_spacing_rad`` defaults to a full 2*pi spread across planes.
    ``phase_stagger_rad`` is the extra in-plane phase added per plane; the
    default pi/sats_per_plane staggers consecutive planes so satellites do
    not line up across planes. Slot phasing within a plane is uniform.
    """

    altitude_m: float = 550_000.0
    earth_radius_m: float = EARTH_RADIUS_M
    num_planes: int = 40
    sats_per_plane: int = 25
    inclination_rad: float = math.radians(53.0)
    raan_spacing_rad: Optional[float] = None
    phase_stagger_rad: Optional[float] = None
    mu_m3s2: float = MU_EARTH_M3S2

    def __post_init__(self) -> None:
        if self.altitude_m <= 0:
            raise ValueError("altitude_m must be > 0")
        if self.earth_radius_m <= 0:
            raise ValueError("earth_radius_m must be > 0")
        if self.num_planes < 1:
            raise ValueError("num_planes must be >= 1")
        if self.sats_per_plane < 1:
            raise ValueError("sats_per_plane must be >= 1")
        if not 0.0 <= self.inclination_rad <= math.pi:
            raise ValueError("inclination_rad must lie in [0, pi]")
        if self.mu_m3s2 <= 0:
            raise ValueError("mu_m3s2 must be > 0")

    @property
    def orbit_radius_m(self) -> float:
        return self.earth_radius_m + self.altitude_m

    @property
    def angular_rate_rad_s(self) -> float:
        """Orbital angular velocity sqrt(mu / r^3)."""
        return math.sqrt(self.mu_m3s2 / self.orbit_radius_m**3)

    @property
    def period_s(self) -> float:
        return 2.0 * math.pi / self.angular_rate_rad_s

    @property
    def num_satellites(self) -> int:
        return self.num_planes * self.sats_per_plane

    def raan_of(self, plane_index: int) -> float:
        spacing = (
            self.raan_spacing_rad
            if self.raan_spacing_rad is not None
            else 2.0 * math.pi / self.num_planes
        )
        return plane_index * spacing

    def phase_of(self, plane_index: int, slot_index: int) -> float:
        stagger = (
            self.phase_stagger_rad
            if self.phase_stagger_rad is not None
            else math.pi / self.sats_per_plane
        )
        return 2.0 * math.pi * slot_index / self.sats_per_plane + plane_index * stagger

    def sat_ids(self) -> Iterator[SatelliteId]:
        for p in range(self.num_planes):
            for k in range(self.sats_per_plane):
                yield SatelliteId(p, k)


@dataclass(frozen=True)
class Gateway:
    """Ground gateway at spherical geodetic coordinates."""

    name: str
    latitude_rad: float
    longitude_rad: float

    def __post_init__(self) -> None:
        if abs(self.latitude_rad) > math.pi / 2:
            raise ValueError(f"gateway {self.name}: |latitude_rad| must be <= pi/2")
        if abs(self.longitude_rad) > math.pi:
            raise ValueError(f"gateway {self.name}: |longitude_rad| must be <= pi")


@dataclass(frozen=True)
class ConstellationSnapshot:
    """Satellite positions at one instant, indexed by plane*K + slot."""

    time_s: float
    positions: np.ndarray  # (num_planes * sats_per_plane, 3), meters
    num_planes: int
    sats_per_plane: int
    earth_radius_m: float

    @property
    def num_satellites(self) -> int:
        return self.num_planes * self.sats_per_plane

    def index_of(self, sat: SatelliteId) -> int:
        if not (0 <= sat.plane_index < self.num_planes):
            raise ValueError(f"plane index {sat.plane_index} out of range")
        if not (0 <= sat.slot_index < self.sats_per_plane):
            raise ValueError(f"slot index {sat.slot_index} out of range")
        return sat.plane_index * self.sats_per_plane + sat.slot_index

    def id_of(self, index: int) -> SatelliteId:
        return SatelliteId(index // self.sats_per_plane, index % self.sats_per_plane)

    def position_of(self, sat: SatelliteId) -> np.ndarray:
        return self.positions[self.index_of(sat)]

    def sat_ids(self) -> Iterator[SatelliteId]:
        for p in range(self.num_planes):
            for k in range(self.sats_per_plane):
                yield SatelliteId(p, k)


def _rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rot_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


@lru_cache(maxsize=16)
def _plane_matrices(cfg: ConstellationConfig) -> np.ndarray:
    """Per-plane rotation R_z(raan) @ R_x(inclination), shape (P, 3, 3)."""
    rx = _rot_x(cfg.inclination_rad)
    mats = np.empty((cfg.num_planes, 3, 3))
    for p in range(cfg.num_planes):
        mats[p] = _rot_z(cfg.raan_of(p)) @ rx
    mats.setflags(write=False)
    return mats


@lru_cache(maxsize=16)
def _phase_grid(cfg: ConstellationConfig) -> np.ndarray:
    """In-plane phase offsets, shape (P, K)."""
    phases = np.empty((cfg.num_planes, cfg.sats_per_plane))
    for p in range(cfg.num_planes):
        for k in range(cfg.sats_per_plane):
            phases[p, k] = cfg.phase_of(p, k)
    phases.setflags(write=False)
    return phases


def satellite_position(cfg: ConstellationConfig, sat: SatelliteId, t: float) -> np.ndarray:
    """Position of one satellite at time t (seconds), in meters.

    Computes r * R_z(raan_p) @ R_x(inc) @ [cos(w t + phi), sin(w t + phi), 0].
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if not (0 <= sat.plane_index < cfg.num_planes):
        raise ValueError(f"plane index {sat.plane_index} out of range")
    if not (0 <= sat.slot_index < cfg.sats_per_plane):
        raise ValueError(f"slot index {sat.slot_index} out of range")
    alpha = cfg.angular_rate_rad_s * t + cfg.phase_of(sat.plane_index, sat.slot_index)
    in_plane = np.array([math.cos(alpha), math.sin(alpha), 0.0])
    return cfg.orbit_radius_m * (_plane_matrices(cfg)[sat.plane_index] @ in_plane)


def propagate_constellation(cfg: ConstellationConfig, t: float) -> ConstellationSnapshot:
    """All satellite positions at time t. Deterministic in (cfg, t)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    alphas = cfg.angular_rate_rad_s * t + _phase_grid(cfg)  # (P, K)
    vecs = np.stack(
        [np.cos(alphas), np.sin(alphas), np.zeros_like(alphas)], axis=-1
    )  # (P, K, 3)
    positions = cfg.orbit_radius_m * np.einsum("pij,pkj->pki", _plane_matrices(cfg), vecs)
    return ConstellationSnapshot(
        time_s=t,
        positions=np.ascontiguousarray(positions.reshape(-1, 3)),
        num_planes=cfg.num_planes,
        sats_per_plane=cfg.sats_per_plane,
        earth_radius_m=cfg.earth_radius_m,
    )


def gateway_position(gw: Gateway, earth_radius_m: float = EARTH_RADIUS_M) -> np.ndarray:
    """Gateway Cartesian position on the sphere of radius earth_radius_m."""
    clat = math.cos(gw.latitude_rad)
    return earth_radius_m * np.array(
        [
            clat * math.cos(gw.longitude_rad),
            clat * math.sin(gw.longitude_rad),
            math.sin(gw.latitude_rad),
        ]
    )


def elevation_angle(sat_pos: np.ndarray, gw_pos: np.ndarray) -> float:
    """Elevation of the satellite above the gateway's local horizon, radians.

    Computed as atan2 of the radial component of (sat - gw) against the
    in-horizon component, which is numerically exact at zenith where the
    plain arcsin form loses precision. Range [-pi/2, pi/2].
    """
    gw_norm = float(np.linalg.norm(gw_pos))
    if gw_norm <= 0.0:
        raise ValueError("gateway position must be non-zero")
    rel = np.asarray(sat_pos, dtype=float) - np.asarray(gw_pos, dtype=float)
    dist = float(np.linalg.norm(rel))
    if dist < 1e-9:
        raise ValueError("coincident points")
    ghat = np.asarray(gw_pos, dtype=float) / gw_norm
    radial = float(rel @ ghat)
    horiz = float(np.linalg.norm(rel - radial * ghat))
    return math.atan2(radial, horiz)


def elevation_angles(positions: np.ndarray, gw_pos: np.ndarray) -> np.ndarray:
    """Vectorized elevation_angle over an (N, 3) position array."""
    gw_norm = float(np.linalg.norm(gw_pos))
    if gw_norm <= 0.0:
        raise ValueError("gateway position must be non-zero")
    ghat = np.asarray(gw_pos, dtype=float) / gw_norm
    rel = positions - gw_pos
    radial = rel @ ghat
    horiz = np.linalg.norm(rel - radial[:, None] * ghat, axis=1)
    return np.arctan2(radial, horiz)


def serving_satellite(
    snapshot: ConstellationSnapshot, gw: Gateway, eps_min_rad: float
) -> Optional[SatelliteId]:
    """Nearest satellite above the elevation mask, or None.

    Ties in distance resolve to the smallest (plane_index, slot_index).
    """
    gw_pos = gateway_position(gw, snapshot.earth_radius_m)
    elev = elevation_angles(snapshot.positions, gw_pos)
    mask = elev >= eps_min_rad
    if not mask.any():
        return None
    dists = np.linalg.norm(snapshot.positions - gw_pos, axis=1)
    dists = np.where(mask, dists, np.inf)
    best = int(np.argmin(dists))  # argmin takes the first (lowest-index) minimum
    return snapshot.id_of(best)
