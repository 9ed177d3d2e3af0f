"""
Episódios completos em cenas fixas e tendências entre controladores.

Lentos: rodam só com `pytest -m slow`.
"""

import math

import numpy as np
import pytest

from socialnav.config import BenchConfig
from socialnav.models.schemas import ScenarioKind
from socialnav.services.controllers import build_named, list_benchmark_controllers
from socialnav.services.crowd import run_episode, simulate_episode
from socialnav.services.scenarios import generate_scene
from tests.helpers import manual_scene

pytestmark = pytest.mark.slow

PAIRED_SCENES = 30


def paired_records(names, n_ped, config):
    """Mesmas cenas circulares para todos os controladores."""
    scenes = [generate_scene(ScenarioKind.CIRCULAR, n_ped, i, config.master_seed, config) for i in range(PAIRED_SCENES)]
    return {
        name: [run_episode(scene, build_named(name, config), config) for scene in scenes]
        for name in names
    }


def penalized_steps(records, config):
    # timeout conta como o limite de passos
    limit = config.simulation.max_sim_steps
    return float(np.mean([limit if r.timeout else r.steps_to_target for r in records]))


@pytest.mark.parametrize("name", list_benchmark_controllers())
def test_empty_scene_every_controller(name, config):
    scene = manual_scene((0.0, 0.0, 0.0), (3.0, 0.0))
    result = simulate_episode(scene, build_named(name, config), config)
    assert not result.record.timeout
    assert result.record.collisions == 0
    assert result.path_length <= 1.5 * 3.0


@pytest.mark.parametrize("name", ["MPC-EDC", "ED-MPC-EDC"])
def test_static_pedestrian_keeps_margin(name):
    config = BenchConfig()
    scene = manual_scene((0.0, 0.0, 0.0), (3.0, 0.0), [(1.5, 0.0)])
    result = simulate_episode(scene, build_named(name, config), config)
    assert result.record.collisions == 0
    assert result.min_separation >= config.safety.margin - 1e-2
    assert math.isfinite(result.min_separation)


def test_wider_ellipse_is_more_conservative(config):
    runs = paired_records(["MPC-ELC-2", "MPC-ELC-3"], 4, config)
    narrow, wide = runs["MPC-ELC-2"], runs["MPC-ELC-3"]
    assert penalized_steps(wide, config) >= penalized_steps(narrow, config)
    assert sum(r.timeout for r in wide) >= sum(r.timeout for r in narrow)


def test_adaptive_constraints_in_dense_crowd(config):
    runs = paired_records(["MPC-ELC-3", "MPC-AELC-3", "MPC-AEDC", "ED-MPC"], 6, config)
    assert sum(r.timeout for r in runs["MPC-AELC-3"]) < sum(r.timeout for r in runs["MPC-ELC-3"])
    assert np.mean([r.collisions for r in runs["MPC-AEDC"]]) <= np.mean([r.collisions for r in runs["ED-MPC"]])
