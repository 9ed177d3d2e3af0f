import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import pytest
from pydantic import ValidationError

from socialnav.config import BenchConfig, SafetyGeometry, SimulationParams, dump_toml, load_bench_config
from socialnav.utils.exceptions import ConfigurationError


def test_defaults(config):
    assert config.simulation.steps_per_control == 10
    assert config.control.horizon == 25
    assert config.control.ghost_horizon == 20
    assert config.n_ped == [3, 4, 5, 6, 7, 8]
    assert len(config.controllers) == 13
    assert config.sensor.vis_angle == pytest.approx(2 * math.pi)


def test_safety_geometry():
    g = SafetyGeometry()
    assert g.margin == pytest.approx(0.95)
    assert g.contact_distance == pytest.approx(0.65)
    assert g.sphere_volume == pytest.approx(4 / 3 * math.pi * 0.95 ** 3)


def test_time_steps_must_divide():
    with pytest.raises(ValidationError):
        SimulationParams(dt=0.1, dt_sim=0.03)


def test_unknown_controller_is_rejected():
    with pytest.raises(ValidationError, match="MPC-FOO"):
        BenchConfig(controllers=["MPC-EDC", "MPC-FOO"])


def test_extra_controller_names_are_accepted():
    config = BenchConfig(controllers=["MPC-EDC", "MPC-AELC-3"])
    assert config.controllers == ["MPC-EDC", "MPC-AELC-3"]


def test_pedestrian_range():
    with pytest.raises(ValidationError):
        BenchConfig(n_ped=[2, 3])


def test_unknown_key_is_rejected():
    with pytest.raises(ValidationError):
        BenchConfig.model_validate({"horizon": 10})


def test_with_overrides_ignores_none(config):
    updated = config.with_overrides(master_seed=5, jobs=None)
    assert updated.master_seed == 5
    assert updated.jobs == config.jobs


def test_toml_round_trip(tmp_path):
    config = BenchConfig(
        controllers=["MPC-AELC-3", "ED-MPC"], n_ped=[4], master_seed=2**62, scenes_per_cell=5,
    ).with_overrides(solver={"tol_con": 1e-4}, safety={"p_col": 0.05})
    text = dump_toml(config)
    assert BenchConfig.model_validate(tomllib.loads(text)) == config
    path = tmp_path / "bench.toml"
    path.write_text(text)
    assert load_bench_config(path) == config


def test_bench_seed_overrides_file(tmp_path, monkeypatch):
    path = tmp_path / "bench.toml"
    path.write_text("master_seed = 3\n")
    assert load_bench_config(path).master_seed == 3
    monkeypatch.setenv("BENCH_SEED", "17")
    assert load_bench_config(path).master_seed == 17


def test_missing_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_bench_config(tmp_path / "absent.toml")


def test_invalid_toml(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("controllers = [")
    with pytest.raises(ConfigurationError):
        load_bench_config(path)
