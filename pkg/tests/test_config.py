import math

import pytest

from camcloak.config import (Config, load_config, load_preset, parse_config,
                             resolve_scenario, serialize_config)
from camcloak.errors import ConfigError
from camcloak.experiments import GaussianPacketSpec, PointSourceSpec

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib


def load_text(tmp_path, text):
    path = tmp_path / "cfg.toml"
    path.write_text(text)
    return load_config(path)


class TestLoadConfig:
    def test_minimal_file_gets_defaults(self, tmp_path):
        cfg = load_text(tmp_path, "")
        assert cfg.nx == 60 and cfg.ny == 60
        assert cfg.kappa == 1.0 and cfg.omega == 0.0
        assert cfg.source_type == "point"
        assert cfg.permittivity.lambda_m == 1.5e-6
        assert cfg.output_format == "csv"

    def test_cloak_ordering_rejected_naming_both_keys(self, tmp_path):
        with pytest.raises(ConfigError) as err:
            load_text(tmp_path, "[lattice.cloak]\na = 7.0\nb = 5.0\n")
        assert "lattice.cloak.a" in str(err.value)
        assert "lattice.cloak.b" in str(err.value)

    def test_unknown_key_rejected_with_path(self, tmp_path):
        with pytest.raises(ConfigError, match="lattice.spacing"):
            load_text(tmp_path, "[lattice]\nspacing = 2.0\n")

    def test_unknown_section_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="plotting"):
            load_text(tmp_path, "[plotting]\ndpi = 300\n")

    def test_parse_error_carries_location(self, tmp_path):
        with pytest.raises(ConfigError, match="line"):
            load_text(tmp_path, "[lattice\nnx = 3\n")

    def test_type_errors_name_key(self, tmp_path):
        with pytest.raises(ConfigError, match="lattice.nx"):
            load_text(tmp_path, "[lattice]\nnx = 3.5\n")
        with pytest.raises(ConfigError, match="physics.kappa"):
            load_text(tmp_path, "[physics]\nkappa = -2.0\n")
        with pytest.raises(ConfigError, match="source.type"):
            load_text(tmp_path, "[source]\ntype = \"laser\"\n")

    def test_cloak_and_hole_exclusive(self, tmp_path):
        with pytest.raises(ConfigError, match="exclusive"):
            load_text(tmp_path,
                      "[lattice.cloak]\na = 2.0\nb = 4.0\n"
                      "[lattice.hole]\nradius = 2.0\n")

    def test_permittivity_ordering(self, tmp_path):
        with pytest.raises(ConfigError, match="eps_a"):
            load_text(tmp_path, "[permittivity]\neps_a = 2.0\neps_b = 3.0\n")


class TestPreset:
    def test_case_study_matches_design_numbers(self):
        cfg = load_preset("case_study")
        p = cfg.permittivity
        assert p.lambda_m == 1.5e-6
        assert p.eps_a == 11.7
        assert p.eps_b == 2.3
        assert p.kappa_target == 1e14
        assert p.w_over_lambda == 0.5
        assert p.width == pytest.approx(0.75e-6)
        assert p.omega_optical == pytest.approx(
            2 * math.pi * 2.99792458e8 / 1.5e-6)
        assert cfg.cloak_a == 5.0 and cfg.cloak_b == 10.0
        assert cfg.nx == cfg.ny == 60

    def test_unknown_preset(self):
        with pytest.raises(ConfigError, match="preset"):
            load_preset("nope")


class TestRoundTrip:
    def test_serialize_then_parse_is_identity(self, tmp_path):
        text = """
[physics]
omega = 0.25
kappa = 2.0

[lattice]
nx = 31
ny = 33

[lattice.cloak]
a = 3.0
b = 7.5

[source]
type = "gaussian"
k = [0.7, 0.1]
sigma = 2.5

[evolve]
t_final = 3.0
dump_interval = 0.5
allow_boundary_override = true

[output]
dir = "results"
format = "binary"
"""
        cfg = load_text(tmp_path, text)
        again = parse_config(tomllib.loads(serialize_config(cfg)))
        assert again == cfg

    def test_default_config_round_trips(self):
        cfg = Config()
        again = parse_config(tomllib.loads(serialize_config(cfg)))
        assert again == cfg


class TestResolveScenario:
    def test_point_defaults(self, tmp_path):
        cfg = load_text(tmp_path, "[lattice.cloak]\na = 5.0\nb = 10.0\n")
        s = resolve_scenario(cfg)
        assert isinstance(s.source, PointSourceSpec)
        # default operating energy sits 3.5 kappa below the band center
        assert s.source.energy == pytest.approx(-3.5)
        # placement rule: b + 3 sigma left of the cloak center
        assert s.source.center == pytest.approx((29.5 - 19.0, 29.5))
        assert s.cloak.a == 5.0

    def test_variants(self, tmp_path):
        cfg = load_text(tmp_path, "[lattice.cloak]\na = 5.0\nb = 10.0\n")
        assert resolve_scenario(cfg, "uniform").cloak is None
        hole = resolve_scenario(cfg, "hole")
        assert hole.hole.radius == 5.0
        assert hole.cloak is None
        with pytest.raises(ConfigError, match="variant"):
            resolve_scenario(cfg, "wormhole")

    def test_gaussian_source(self, tmp_path):
        cfg = load_text(tmp_path,
                        "[source]\ntype = \"gaussian\"\nsigma = 2.0\n")
        s = resolve_scenario(cfg)
        assert isinstance(s.source, GaussianPacketSpec)
        assert s.source.k == pytest.approx((math.pi / 2, 0.0))
        # no cloak: source defaults to the lattice center
        assert s.source.center == pytest.approx((29.5, 29.5))

    def test_clamped_placement_warns(self, tmp_path):
        cfg = load_text(tmp_path,
                        "[lattice]\nnx = 240\nny = 240\n"
                        "[lattice.cloak]\na = 50.0\nb = 100.0\n"
                        "[source]\ntype = \"gaussian\"\nsigma = 4.0\n")
        with pytest.warns(UserWarning, match="clamped"):
            s = resolve_scenario(cfg)
        assert s.source.center[0] == pytest.approx(12.0)

    def test_explicit_source_center_respected(self, tmp_path):
        cfg = load_text(tmp_path,
                        "[source]\ncenter = [7.0, 8.0]\n")
        assert resolve_scenario(cfg).source.center == (7.0, 8.0)
