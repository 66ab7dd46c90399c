"""Run configuration: YAML ingestion, validation, defaults, echo.

The config file is a hierarchical YAML document; every field has a
default matching the simulation's stock parameter tables, so an empty
file is a complete configuration. Unknown keys are rejected with their
dotted path, and each constraint violation names the offending field.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .optics import OpticalParams
from .orbital import ConstellationConfig, Gateway
from .rl.policy import RLHyperParams
from .scenario import RoutingParams


class ConfigError(Exception):
    """Invalid, malformed, or missing configuration input."""


DEFAULT_GATEWAYS = (
    {"name": "doha", "lat_deg": 25.2854, "lon_deg": 51.5310},
    {"name": "london", "lat_deg": 51.5074, "lon_deg": -0.1278},
)


@dataclass(frozen=True)
class ScenarioSpec:
    """Gateway pair and snapshot sampling plan."""

    source: str = "doha"
    dest: str = "london"
    num_snapshots: int = 100
    window_s: tuple[float, float] = (0.0, 5400.0)
    seed: int = 42


@dataclass(frozen=True)
class RunConfig:
    constellation: ConstellationConfig = field(default_factory=ConstellationConfig)
    optics: OpticalParams = field(default_factory=OpticalParams)
    threshold_mode: str = "optimized"
    fixed_divergence_rad: float = 1e-3
    routing: RoutingParams = field(default_factory=RoutingParams)
    gateways: tuple[Gateway, ...] = ()
    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)
    rl: RLHyperParams = field(default_factory=RLHyperParams)
    output_dir: str = "runs/default"

    def gateway(self, name: str) -> Gateway:
        for gw in self.gateways:
            if gw.name == name:
                return gw
        raise ConfigError(f"scenario references unknown gateway {name!r}")

    def effective_dict(self) -> dict:
        """Normalized echo of the full effective configuration."""
        c = self.constellation
        o = self.optics
        r = self.routing
        s = self.scenario
        h = self.rl
        return {
            "constellation": {
                "altitude_km": c.altitude_m / 1e3,
                "earth_radius_km": c.earth_radius_m / 1e3,
                "num_planes": c.num_planes,
                "sats_per_plane": c.sats_per_plane,
                "inclination_deg": math.degrees(c.inclination_rad),
                "raan_spacing_deg": math.degrees(c.raan_of(1)) if c.num_planes > 1 else 0.0,
                "phase_stagger_rad": c.phase_of(1, 0) if c.num_planes > 1 else 0.0,
                "mu_m3s2": c.mu_m3s2,
            },
            "optics": {
                "wavelength_nm": o.wavelength_m * 1e9,
                "tx_power_w": o.tx_power_w,
                "eff_tx": o.eff_tx,
                "eff_rx": o.eff_rx,
                "aperture_radius_m": o.aperture_radius_m,
                "system_loss_db": 10.0 * math.log10(o.system_loss_linear),
                "noise_bandwidth_w": o.noise_bandwidth_w,
                "snr_threshold_linear": o.snr_threshold_linear,
                "divergence_max_rad": o.divergence_max_rad,
                "jitter_intra_urad": o.jitter_intra_rad * 1e6,
                "jitter_inter_urad": o.jitter_inter_rad * 1e6,
                "outage_threshold": o.outage_threshold,
                "threshold_mode": self.threshold_mode,
                "fixed_divergence_rad": self.fixed_divergence_rad,
            },
            "routing": {
                "beta_ms": r.beta_s * 1e3,
                "eps_min_deg": math.degrees(r.eps_min_rad),
                "corridor_half_width_deg": math.degrees(r.corridor_half_width_rad),
                "corridor_enabled": r.corridor_enabled,
                "p_busy": r.p_busy,
                "k_cap": r.k_cap,
                "h_max": r.h_max,
            },
            "gateways": [
                {
                    "name": g.name,
                    "lat_deg": math.degrees(g.latitude_rad),
                    "lon_deg": math.degrees(g.longitude_rad),
                }
                for g in self.gateways
            ],
            "scenario": {
                "source": s.source,
                "dest": s.dest,
                "num_snapshots": s.num_snapshots,
                "window_s": list(s.window_s),
                "seed": s.seed,
            },
            "rl": {
                "hidden": list(h.hidden),
                "learning_rate": h.learning_rate,
                "discount": h.discount,
                "epsilon_start": h.epsilon_start,
                "epsilon_final": h.epsilon_final,
                "epsilon_decay_episodes": h.epsilon_decay_episodes,
                "replay_capacity": h.replay_capacity,
                "batch_size": h.batch_size,
                "target_sync": h.target_sync,
                "update_every": h.update_every,
                "warmup_transitions": h.warmup_transitions,
                "grad_clip": h.grad_clip,
                "episodes": h.episodes,
                "eval_every": h.eval_every,
                "eval_snapshots": h.eval_snapshots,
            },
            "output_dir": self.output_dir,
        }

    def config_hash(self) -> str:
        payload = json.dumps(self.effective_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _expect_mapping(value, path: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected a mapping")
    return dict(value)


def _take_number(section: dict, key: str, default, path: str, *, integer: bool = False):
    if key not in section:
        return default
    value = section.pop(key)
    if integer:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{path}.{key}: expected an integer")
        return value
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{path}.{key}: expected a number")
    return float(value)


def _take_bool(section: dict, key: str, default: bool, path: str) -> bool:
    if key not in section:
        return default
    value = section.pop(key)
    if not isinstance(value, bool):
        raise ConfigError(f"{path}.{key}: expected a boolean")
    return value


def _take_str(section: dict, key: str, default: str, path: str) -> str:
    if key not in section:
        return default
    value = section.pop(key)
    if not isinstance(value, str):
        raise ConfigError(f"{path}.{key}: expected a string")
    return value


def _reject_unknown(section: dict, path: str) -> None:
    if section:
        key = sorted(section)[0]
        raise ConfigError(f"unknown key {key!r} in {path}")


def _build_constellation(data: dict) -> ConstellationConfig:
    path = "constellation"
    altitude_km = _take_number(data, "altitude_km", 550.0, path)
    earth_radius_km = _take_number(data, "earth_radius_km", 6371.0, path)
    num_planes = _take_number(data, "num_planes", 40, path, integer=True)
    sats_per_plane = _take_number(data, "sats_per_plane", 25, path, integer=True)
    inclination_deg = _take_number(data, "inclination_deg", 53.0, path)
    raan_spacing_deg = _take_number(data, "raan_spacing_deg", None, path)
    phase_stagger_rad = _take_number(data, "phase_stagger_rad", None, path)
    mu = _take_number(data, "mu_m3s2", 3.986004418e14, path)
    _reject_unknown(data, path)
    try:
        return ConstellationConfig(
            altitude_m=altitude_km * 1e3,
            earth_radius_m=earth_radius_km * 1e3,
            num_planes=num_planes,
            sats_per_plane=sats_per_plane,
            inclination_rad=math.radians(inclination_deg),
            raan_spacing_rad=(
                math.radians(raan_spacing_deg) if raan_spacing_deg is not None else None
            ),
            phase_stagger_rad=phase_stagger_rad,
            mu_m3s2=mu,
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _build_optics(data: dict) -> tuple[OpticalParams, str, float]:
    path = "optics"
    wavelength_nm = _take_number(data, "wavelength_nm", 1550.0, path)
    tx_power_w = _take_number(data, "tx_power_w", 1.0, path)
    eff_tx = _take_number(data, "eff_tx", 0.5, path)
    eff_rx = _take_number(data, "eff_rx", 0.5, path)
    aperture_radius_m = _take_number(data, "aperture_radius_m", 0.05, path)
    system_loss_db = _take_number(data, "system_loss_db", 10.0, path)
    noise_bandwidth_w = _take_number(data, "noise_bandwidth_w", 1e-12, path)
    snr_threshold = _take_number(data, "snr_threshold_linear", 10.0, path)
    divergence_max_rad = _take_number(data, "divergence_max_rad", 1e-3, path)
    jitter_intra_urad = _take_number(data, "jitter_intra_urad", 100.0, path)
    jitter_inter_urad = _take_number(data, "jitter_inter_urad", 200.0, path)
    outage_threshold = _take_number(data, "outage_threshold", 1e-3, path)
    mode = _take_str(data, "threshold_mode", "optimized", path)
    fixed_div = _take_number(data, "fixed_divergence_rad", divergence_max_rad, path)
    _reject_unknown(data, path)
    if mode not in ("optimized", "fixed"):
        raise ConfigError(f"{path}.threshold_mode: expected 'optimized' or 'fixed'")
    try:
        params = OpticalParams(
            wavelength_m=wavelength_nm * 1e-9,
            tx_power_w=tx_power_w,
            eff_tx=eff_tx,
            eff_rx=eff_rx,
            aperture_radius_m=aperture_radius_m,
            system_loss_linear=10.0 ** (system_loss_db / 10.0),
            noise_bandwidth_w=noise_bandwidth_w,
            snr_threshold_linear=snr_threshold,
            divergence_max_rad=divergence_max_rad,
            jitter_intra_rad=jitter_intra_urad * 1e-6,
            jitter_inter_rad=jitter_inter_urad * 1e-6,
            outage_threshold=outage_threshold,
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return params, mode, fixed_div


def _build_routing(data: dict) -> RoutingParams:
    path = "routing"
    beta_ms = _take_number(data, "beta_ms", 1.0, path)
    eps_min_deg = _take_number(data, "eps_min_deg", 10.0, path)
    hw_deg = _take_number(data, "corridor_half_width_deg", 15.0, path)
    enabled = _take_bool(data, "corridor_enabled", True, path)
    p_busy = _take_number(data, "p_busy", 0.05, path)
    k_cap = _take_number(data, "k_cap", 16, path, integer=True)
    h_max = _take_number(data, "h_max", 32, path, integer=True)
    _reject_unknown(data, path)
    try:
        return RoutingParams(
            beta_s=beta_ms * 1e-3,
            eps_min_rad=math.radians(eps_min_deg),
            corridor_half_width_rad=math.radians(hw_deg),
            corridor_enabled=enabled,
            p_busy=p_busy,
            k_cap=k_cap,
            h_max=h_max,
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _build_gateways(data) -> tuple[Gateway, ...]:
    if data is None:
        data = [dict(g) for g in DEFAULT_GATEWAYS]
    if not isinstance(data, list) or not data:
        raise ConfigError("gateways: expected a non-empty list")
    gateways = []
    seen = set()
    for i, item in enumerate(data):
        path = f"gateways[{i}]"
        entry = _expect_mapping(item, path)
        name = _take_str(entry, "name", "", path)
        if not name:
            raise ConfigError(f"{path}.name: required")
        lat = _take_number(entry, "lat_deg", None, path)
        lon = _take_number(entry, "lon_deg", None, path)
        _reject_unknown(entry, path)
        if lat is None or lon is None:
            raise ConfigError(f"{path}: lat_deg and lon_deg are required")
        if name in seen:
            raise ConfigError(f"{path}.name: duplicate gateway {name!r}")
        seen.add(name)
        try:
            gateways.append(Gateway(name, math.radians(lat), math.radians(lon)))
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return tuple(gateways)


def _build_scenario(data: dict, gateway_names: set[str]) -> ScenarioSpec:
    path = "scenario"
    source = _take_str(data, "source", "doha", path)
    dest = _take_str(data, "dest", "london", path)
    num_snapshots = _take_number(data, "num_snapshots", 100, path, integer=True)
    window = data.pop("window_s", [0.0, 5400.0])
    seed = _take_number(data, "seed", 42, path, integer=True)
    _reject_unknown(data, path)
    if (
        not isinstance(window, (list, tuple))
        or len(window) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in window)
    ):
        raise ConfigError(f"{path}.window_s: expected [t_start, t_end]")
    t0, t1 = float(window[0]), float(window[1])
    if not 0 <= t0 < t1:
        raise ConfigError(f"{path}.window_s: need 0 <= t_start < t_end")
    if num_snapshots < 1:
        raise ConfigError(f"{path}.num_snapshots: must be >= 1")
    for role, name in (("source", source), ("dest", dest)):
        if name not in gateway_names:
            raise ConfigError(f"{path}.{role}: unknown gateway {name!r}")
    if source == dest:
        raise ConfigError(f"{path}: source and dest must differ")
    return ScenarioSpec(source, dest, num_snapshots, (t0, t1), seed)


def _build_rl(data: dict) -> RLHyperParams:
    path = "rl"
    hidden = data.pop("hidden", [64, 64])
    if not isinstance(hidden, list) or not all(
        isinstance(v, int) and not isinstance(v, bool) and v > 0 for v in hidden
    ):
        raise ConfigError(f"{path}.hidden: expected a list of positive integers")
    kwargs = dict(hidden=tuple(hidden))
    for key, integer in (
        ("learning_rate", False),
        ("discount", False),
        ("epsilon_start", False),
        ("epsilon_final", False),
        ("epsilon_decay_episodes", True),
        ("replay_capacity", True),
        ("batch_size", True),
        ("target_sync", True),
        ("update_every", True),
        ("warmup_transitions", True),
        ("grad_clip", False),
        ("episodes", True),
        ("eval_every", True),
        ("eval_snapshots", True),
    ):
        if key in data:
            kwargs[key] = _take_number(data, key, None, path, integer=integer)
    _reject_unknown(data, path)
    try:
        return RLHyperParams(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def build_run_config(data: dict) -> RunConfig:
    data = dict(data)
    constellation = _build_constellation(_expect_mapping(data.pop("constellation", None), "constellation"))
    optics, mode, fixed_div = _build_optics(_expect_mapping(data.pop("optics", None), "optics"))
    routing = _build_routing(_expect_mapping(data.pop("routing", None), "routing"))
    gateways = _build_gateways(data.pop("gateways", None))
    scenario = _build_scenario(
        _expect_mapping(data.pop("scenario", None), "scenario"),
        {g.name for g in gateways},
    )
    rl = _build_rl(_expect_mapping(data.pop("rl", None), "rl"))
    output_dir = data.pop("output_dir", "runs/default")
    if not isinstance(output_dir, str):
        raise ConfigError("output_dir: expected a string")
    _reject_unknown(data, "the top level")
    return RunConfig(
        constellation=constellation,
        optics=optics,
        threshold_mode=mode,
        fixed_divergence_rad=fixed_div,
        routing=routing,
        gateways=gateways,
        scenario=scenario,
        rl=rl,
        output_dir=output_dir,
    )


def default_config() -> RunConfig:
    return build_run_config({})


def parse_config(path) -> RunConfig:
    """Load and validate a YAML run configuration."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {p}: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("top level of the config must be a mapping")
    return build_run_config(data)
