"""Scenario text format: parsing, canonical echo, hashing, built-in scenes."""

import numpy as np
import pytest

from rfclutter.errors import ConfigurationError
from rfclutter.scenario import (DESK_SCALE, Scenario, TargetSpec,
                                generate_scenario1, generate_scenario2,
                                littoral_dem, load_scenario, parse_scenario,
                                scaled_count, scenario_hash, scenario_text)
from rfclutter.scattering import BUILDING, WATER
from rfclutter.terrain import write_dem

MINIMAL = "radar.carrier = 10e9\nradar.prf = 2000\n"


def test_scaled_count_rule():
    assert scaled_count(30, 1.0) == 30
    assert scaled_count(30, 0.125) == 4      # ceil(3.75)
    assert scaled_count(30, 1 / 32) == 1
    assert scaled_count(2235, 1 / 32) == 70
    assert scaled_count(64, 0.125) == 8
    # exact products must not tip up a bin from float dust
    assert scaled_count(32, 0.125) == 4
    with pytest.raises(ConfigurationError):
        scaled_count(10, 0.0)
    with pytest.raises(ConfigurationError):
        scaled_count(10, 1.5)


def test_minimal_scenario_parses_with_defaults():
    scn = parse_scenario(MINIMAL)
    assert scn.carrier_hz == 10e9
    assert scn.prf_hz == 2000.0
    assert scn.sample_rate == scn.bandwidth_hz   # 0 -> bandwidth fallback
    assert scn.rx_position is None               # monostatic by default
    assert scn.targets == [] and scn.buildings is None


def test_full_key_set_round_trips():
    text = MINIMAL + """
scenario.name = roundtrip
radar.bandwidth = 4e6
radar.pulses = 16
radar.channels = 3
radar.cpis = 2
radar.sample_rate = 8e6
radar.pulse_duration = 4e-6
radar.noise_power = 0.25
radar.swath = 9000
platform.tx_position = 0 -500 1200
platform.tx_velocity = 0 100 0
platform.rx_position = 50 0 1100
array.spacing = 0.02
array.axis = 0 1 0
array.boresight = 1 0 0
array.cosine_exponent = 2
terrain.patch_size = 45
ocean.wind_speed = 7.5
ocean.wind_direction = 1.2
clutter.doppler_std = 3.0
clutter.deterministic_phase = yes
sim.seed = 99
target.1.position = 4000 200 0
target.1.velocity = -10 5 0
target.1.rcs = 12
discrete.1.position = 3000 0 0
discrete.1.rcs = 500
mimo.1.position = 0 800 1200
mimo.1.velocity = 0 100 0
buildings.origin = 5000 -300
buildings.rows = 2
buildings.cols = 3
buildings.footprint = 25
buildings.height = 8
"""
    scn = parse_scenario(text)
    assert scn.name == "roundtrip"
    assert scn.num_channels == 3
    assert scn.deterministic_clutter_phase is True
    np.testing.assert_array_equal(scn.rx_position, [50, 0, 1100])
    assert len(scn.targets) == 1 and scn.targets[0].rcs == 12.0
    assert len(scn.discretes) == 1 and scn.discretes[0].rcs == 500.0
    assert len(scn.mimo_tx) == 1
    assert scn.buildings.count == 6

    # canonical echo reparses to an identical scenario (hash equality)
    echoed = parse_scenario(scenario_text(scn))
    assert scenario_hash(echoed) == scenario_hash(scn)


def test_parse_error_reports_line_numbers():
    with pytest.raises(ConfigurationError, match="line 3"):
        parse_scenario("radar.carrier = 10e9\nradar.prf = 2000\nbogus.key = 1\n")
    with pytest.raises(ConfigurationError, match="line 2"):
        parse_scenario("radar.carrier = 10e9\nradar.prf = two thousand\n")
    with pytest.raises(ConfigurationError, match="line 3"):
        parse_scenario("radar.carrier = 10e9\nradar.prf = 2000\nradar.prf = 2100\n")
    with pytest.raises(ConfigurationError, match="line 2"):
        parse_scenario("radar.carrier = 10e9\nno equals sign here\n")
    with pytest.raises(ConfigurationError, match="line 2"):
        parse_scenario("radar.carrier = 10e9\nplatform.tx_position = 1 2\n")


def test_missing_required_keys():
    with pytest.raises(ConfigurationError, match="radar.prf"):
        parse_scenario("radar.carrier = 10e9\n")
    with pytest.raises(ConfigurationError, match="radar.carrier"):
        parse_scenario("radar.prf = 2000\n")


def test_group_validation():
    with pytest.raises(ConfigurationError, match="target.1 needs"):
        parse_scenario(MINIMAL + "target.1.position = 1 2 0\n")
    with pytest.raises(ConfigurationError, match="unknown key"):
        parse_scenario(MINIMAL + "target.1.color = red\n")
    with pytest.raises(ConfigurationError, match="buildings.rows"):
        parse_scenario(MINIMAL + "buildings.origin = 0 0\nbuildings.cols = 2\n")


def test_comments_and_whitespace_do_not_matter():
    decorated = "# header comment\n\nradar.carrier = 10e9   # inline\n\n  radar.prf = 2000\n"
    assert scenario_hash(parse_scenario(decorated)) == scenario_hash(parse_scenario(MINIMAL))


def test_hash_tracks_semantic_changes():
    base = parse_scenario(MINIMAL)
    h0 = scenario_hash(base)
    assert scenario_hash(parse_scenario(MINIMAL + "sim.seed = 2\n")) != h0
    assert scenario_hash(parse_scenario(MINIMAL + "radar.pulses = 32\n")) != h0
    # hash covers raster contents, not just the path string
    a = parse_scenario(MINIMAL)
    b = parse_scenario(MINIMAL)
    from rfclutter.terrain import ElevationGrid
    a.dem = ElevationGrid(heights=np.zeros((4, 4)), cell_size=30.0)
    b.dem = ElevationGrid(heights=np.ones((4, 4)), cell_size=30.0)
    assert scenario_hash(a) != scenario_hash(b)


def test_load_scenario_resolves_relative_rasters(tmp_path):
    dem_path = tmp_path / "ground.dem"
    from rfclutter.terrain import ElevationGrid
    write_dem(dem_path, ElevationGrid(heights=np.zeros((6, 6)), cell_size=50.0))
    (tmp_path / "scene.txt").write_text(MINIMAL + "terrain.dem = ground.dem\n")
    scn = load_scenario(tmp_path / "scene.txt")
    assert scn.dem is not None and scn.dem.cell_size == 50.0
    (tmp_path / "broken.txt").write_text(MINIMAL + "terrain.dem = missing.dem\n")
    with pytest.raises(ConfigurationError, match="referenced file not found"):
        load_scenario(tmp_path / "broken.txt")


def test_target_spec_validation():
    with pytest.raises(ConfigurationError):
        TargetSpec(position=[0, 0, 0], velocity=[0, 0, 0], rcs=-1.0)
    with pytest.raises(ConfigurationError):
        parse_scenario(MINIMAL + "radar.pulses = 0\n")
    with pytest.raises(ConfigurationError):
        parse_scenario(MINIMAL + "radar.bandwidth = 5e6\nradar.sample_rate = 1e6\n")


# --- built-in scenes ---------------------------------------------------------

def test_littoral_dem_structure():
    dem, cover = littoral_dem(cells=500, cell_size=30.0)   # 15 km, coast at 6 km
    assert dem.heights.shape == (500, 500) and cover.classes.shape == (500, 500)
    x = (np.arange(500) + 0.5) * 30.0
    water_cols = x < 6000.0
    # water is flat at z = 0 and classed WATER; land rises somewhere inland
    assert np.all(dem.heights[:, water_cols] == 0.0)
    assert np.all(cover.classes[:, water_cols] == WATER)
    assert dem.heights[:, ~water_cols].max() > 50.0
    assert not np.any(cover.classes[:, ~water_cols] == WATER)


def test_scenario1_scales():
    desk = generate_scenario1(scale=DESK_SCALE, seed=3)
    assert desk.num_cpis == 4 and desk.num_channels == 4 and desk.num_pulses == 64
    assert desk.export_dims == (4, 4, 64, 292)
    assert desk.seed == 3
    assert len(desk.targets) >= 2
    assert desk.dem is not None and desk.landcover is not None
    full = generate_scenario1(scale=1.0)
    assert full.export_dims == (30, 32, 64, 2334)


def test_scenario2_adds_coastal_content():
    scn = generate_scenario2(scale=DESK_SCALE, seed=3)
    assert scn.buildings is not None
    assert scn.buildings.count == 150
    assert scn.buildings.landcover_class == BUILDING
    # the two presets share the radar but not the scene content
    s1 = generate_scenario1(scale=DESK_SCALE, seed=3)
    assert scenario_hash(scn) != scenario_hash(s1)
