import math

import numpy as np
import pytest

from optisl.orbital import (
    ConstellationConfig,
    Gateway,
    SatelliteId,
    elevation_angle,
    gateway_position,
    propagate_constellation,
    satellite_position,
    serving_satellite,
)

R_ORBIT = 6_921_000.0


def test_position_all_angles_zero_is_radial_x():
    cfg = ConstellationConfig(
        num_planes=1, sats_per_plane=1, inclination_rad=0.0, phase_stagger_rad=0.0
    )
    pos = satellite_position(cfg, SatelliteId(0, 0), 0.0)
    assert pos[0] == pytest.approx(R_ORBIT, abs=1e-6)
    assert abs(pos[1]) < 1e-6 and abs(pos[2]) < 1e-6


def test_angular_rate_and_period():
    cfg = ConstellationConfig()
    assert cfg.angular_rate_rad_s == pytest.approx(1.0965176180602308e-3, rel=1e-12)
    assert cfg.period_s == pytest.approx(5730.127, abs=1e-2)
    # snapshot window of the stock scenario fits inside one period
    assert 5400.0 < cfg.period_s


def test_norm_conservation_random_ids_times():
    cfg = ConstellationConfig()
    rng = np.random.default_rng(3)
    for _ in range(50):
        sat = SatelliteId(int(rng.integers(40)), int(rng.integers(25)))
        t = float(rng.uniform(0, 20000))
        pos = satellite_position(cfg, sat, t)
        assert np.linalg.norm(pos) == pytest.approx(R_ORBIT, rel=1e-9)


def test_periodicity():
    cfg = ConstellationConfig()
    t = 1234.5
    a = propagate_constellation(cfg, t).positions
    b = propagate_constellation(cfg, t + cfg.period_s).positions
    assert np.max(np.abs(a - b)) < 1e-6


def test_intra_plane_rigidity():
    cfg = ConstellationConfig()
    ids = [SatelliteId(7, 2), SatelliteId(7, 11)]
    base = None
    for t in (0.0, 500.0, 2600.0, 5399.0):
        snap = propagate_constellation(cfg, t)
        d = np.linalg.norm(snap.position_of(ids[0]) - snap.position_of(ids[1]))
        if base is None:
            base = d
        else:
            assert abs(d - base) < 1e-6


def test_adjacent_slot_chord():
    cfg = ConstellationConfig()
    snap = propagate_constellation(cfg, 0.0)
    d = np.linalg.norm(snap.position_of(SatelliteId(0, 0)) - snap.position_of(SatelliteId(0, 1)))
    assert d == pytest.approx(2 * R_ORBIT * math.sin(math.pi / 25), rel=1e-9)
    assert d == pytest.approx(1_734_863.0, abs=1.0)


def test_propagate_matches_scalar_positions():
    cfg = ConstellationConfig(num_planes=6, sats_per_plane=4)
    t = 321.0
    snap = propagate_constellation(cfg, t)
    rng = np.random.default_rng(0)
    for _ in range(10):
        sat = SatelliteId(int(rng.integers(6)), int(rng.integers(4)))
        np.testing.assert_allclose(
            snap.position_of(sat), satellite_position(cfg, sat, t), rtol=0, atol=1e-6
        )


def test_propagate_full_constellation_shape_and_norms():
    cfg = ConstellationConfig()
    snap = propagate_constellation(cfg, 777.0)
    assert snap.positions.shape == (1000, 3)
    norms = np.linalg.norm(snap.positions, axis=1)
    np.testing.assert_allclose(norms, R_ORBIT, rtol=1e-9)


def test_negative_time_rejected():
    cfg = ConstellationConfig()
    with pytest.raises(ValueError):
        propagate_constellation(cfg, -1.0)
    with pytest.raises(ValueError):
        satellite_position(cfg, SatelliteId(0, 0), -0.5)


def test_config_validation():
    with pytest.raises(ValueError):
        ConstellationConfig(altitude_m=-1.0)
    with pytest.raises(ValueError):
        ConstellationConfig(num_planes=0)
    with pytest.raises(ValueError):
        ConstellationConfig(inclination_rad=3.5)


def test_gateway_position_equator_and_pole():
    eq = gateway_position(Gateway("eq", 0.0, 0.0))
    np.testing.assert_allclose(eq, [6_371_000.0, 0.0, 0.0], atol=1e-9)
    pole = gateway_position(Gateway("pole", math.pi / 2, 0.3))
    assert pole[2] == pytest.approx(6_371_000.0, rel=1e-12)
    assert abs(pole[0]) < 1e-6 and abs(pole[1]) < 1e-6


def test_doha_london_separation():
    doha = gateway_position(Gateway("doha", math.radians(25.2854), math.radians(51.5310)))
    london = gateway_position(Gateway("london", math.radians(51.5074), math.radians(-0.1278)))
    cosang = doha @ london / (np.linalg.norm(doha) * np.linalg.norm(london))
    angle = math.acos(cosang)
    assert angle == pytest.approx(0.8183, abs=5e-4)
    assert 6371.0 * angle == pytest.approx(5213.7, abs=2.0)


def test_gateway_validation():
    with pytest.raises(ValueError):
        Gateway("bad", math.pi, 0.0)
    with pytest.raises(ValueError):
        Gateway("bad", 0.0, 4.0)


def test_elevation_overhead_is_half_pi():
    gw = np.array([6_371_000.0, 0.0, 0.0])
    sat = np.array([6_921_000.0, 0.0, 0.0])
    assert elevation_angle(sat, gw) == pytest.approx(math.pi / 2, abs=1e-12)


def test_elevation_overhead_oblique_direction():
    u = np.array([1.0, 2.0, -0.5])
    u /= np.linalg.norm(u)
    gw = 6_371_000.0 * u
    sat = 6_921_000.0 * u
    assert elevation_angle(sat, gw) == pytest.approx(math.pi / 2, abs=1e-12)


def test_elevation_horizon_zero():
    gw = np.array([6_371_000.0, 0.0, 0.0])
    sat = gw + np.array([0.0, 550_000.0, 0.0])  # orthogonal to the local vertical
    assert elevation_angle(sat, gw) == pytest.approx(0.0, abs=1e-12)


def test_elevation_below_horizon_negative():
    gw = np.array([6_371_000.0, 0.0, 0.0])
    sat = np.array([-6_921_000.0, 100.0, 0.0])
    assert elevation_angle(sat, gw) < 0


def test_elevation_range_random():
    rng = np.random.default_rng(11)
    for _ in range(200):
        gw = rng.normal(size=3)
        gw = 6_371_000.0 * gw / np.linalg.norm(gw)
        sat = rng.normal(size=3)
        sat = 6_921_000.0 * sat / np.linalg.norm(sat)
        el = elevation_angle(sat, gw)
        assert -math.pi / 2 <= el <= math.pi / 2


def test_elevation_coincident_points_error():
    gw = np.array([6_371_000.0, 0.0, 0.0])
    with pytest.raises(ValueError, match="coincident"):
        elevation_angle(gw, gw)


def test_serving_single_sat_overhead():
    cfg = ConstellationConfig(
        num_planes=1, sats_per_plane=1, inclination_rad=0.0, phase_stagger_rad=0.0
    )
    snap = propagate_constellation(cfg, 0.0)
    gw = Gateway("eq", 0.0, 0.0)
    assert serving_satellite(snap, gw, math.radians(10)) == SatelliteId(0, 0)


def test_serving_none_when_all_below_mask():
    cfg = ConstellationConfig(
        num_planes=1, sats_per_plane=1, inclination_rad=0.0, phase_stagger_rad=0.0
    )
    snap = propagate_constellation(cfg, 0.0)
    gw = Gateway("far", 0.0, math.pi)  # antipodal
    assert serving_satellite(snap, gw, math.radians(10)) is None


def test_serving_matches_exhaustive_scan():
    cfg = ConstellationConfig()
    gw = Gateway("doha", math.radians(25.2854), math.radians(51.5310))
    eps = math.radians(10)
    gw_pos = gateway_position(gw, cfg.earth_radius_m)
    for t in (0.0, 1111.0, 3456.7, 5395.0):
        snap = propagate_constellation(cfg, t)
        got = serving_satellite(snap, gw, eps)
        best = None
        for sat in snap.sat_ids():
            pos = snap.position_of(sat)
            if elevation_angle(pos, gw_pos) < eps:
                continue
            d = float(np.linalg.norm(pos - gw_pos))
            key = (d, sat.plane_index, sat.slot_index)
            if best is None or key < best[0]:
                best = (key, sat)
        assert best is not None
        assert got == best[1]
        assert elevation_angle(snap.position_of(got), gw_pos) >= eps
