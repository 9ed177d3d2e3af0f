import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from socialnav.config import BenchConfig, ScenarioParams
from socialnav.models.schemas import ScenarioKind
from socialnav.services.scenarios import (
    gen_circular,
    gen_parallel,
    gen_random,
    generate_scene,
    generate_suite,
    read_scenes_jsonl,
    sample_robot_goal,
    scene_seed,
    write_scenes_jsonl,
)
from socialnav.utils.exceptions import ConfigurationError, GenerationError

PARAMS = BenchConfig()
GENERATORS = [gen_circular, gen_random, gen_parallel]


def check_common(scene, params=PARAMS):
    g = params.safety
    starts = np.array(scene.ped_starts)
    for i in range(len(starts)):
        for j in range(i + 1, len(starts)):
            assert np.hypot(*(starts[i] - starts[j])) > 2 * g.r_ped
    robot = np.array(scene.robot_start[:2])
    assert np.all(np.hypot(*(starts - robot).T) > g.r_rob + g.r_ped)

    half = params.scenario_params.area_half_size
    for point in (*scene.ped_starts, *scene.ped_goals, scene.robot_start[:2], scene.robot_goal):
        assert abs(point[0]) <= half + 1e-9 and abs(point[1]) <= half + 1e-9

    goal_distance = math.dist(scene.robot_start[:2], scene.robot_goal)
    assert 2.0 <= goal_distance <= 6.0 + 1e-9
    heading = math.atan2(scene.robot_goal[1] - robot[1], scene.robot_goal[0] - robot[0])
    assert scene.robot_start[2] == pytest.approx(heading)


@pytest.mark.parametrize("generator", GENERATORS)
def test_same_seed_same_scene(generator):
    assert generator(5, 42, PARAMS) == generator(5, 42, PARAMS)
    assert generator(5, 42, PARAMS) != generator(5, 43, PARAMS)


@given(st.sampled_from(GENERATORS), st.integers(3, 8), st.integers(0, 2**64 - 1))
@settings(max_examples=150, deadline=None)
def test_generated_scenes_are_valid(generator, n_ped, seed):
    scene = generator(n_ped, seed, PARAMS)
    assert scene.n_ped == n_ped
    assert scene.seed == seed
    check_common(scene)


@pytest.mark.slow
@pytest.mark.parametrize("kind", list(ScenarioKind))
def test_every_cell_generates_under_many_master_seeds(kind):
    master_seeds = np.random.default_rng(1000).integers(0, 2**63, size=1000)
    offset = list(ScenarioKind).index(kind) * 600
    for cell, n_ped in enumerate(range(3, 9)):
        for index in range(100):
            master_seed = int(master_seeds[(offset + cell * 100 + index) % len(master_seeds)])
            scene = generate_scene(kind, n_ped, index, master_seed, PARAMS)
            assert scene.scenario_kind is kind
            assert scene.n_ped == n_ped
            check_common(scene)


@given(st.integers(3, 8), st.integers(0, 2**32))
@settings(max_examples=50, deadline=None)
def test_circular_geometry(n_ped, seed):
    scene = gen_circular(n_ped, seed, PARAMS)
    for start, goal in zip(scene.ped_starts, scene.ped_goals):
        assert 2.0 - 1e-9 <= math.hypot(*start) <= 3.5 + 1e-9
        assert goal == pytest.approx((-start[0], -start[1]))
    assert math.hypot(*scene.robot_start[:2]) <= 2.0


@given(st.integers(3, 8), st.integers(0, 2**32))
@settings(max_examples=50, deadline=None)
def test_parallel_geometry(n_ped, seed):
    scene = gen_parallel(n_ped, seed, PARAMS)
    sides = [np.sign(start[0]) for start in scene.ped_starts]
    assert sides[0::2] == [-1.0] * len(sides[0::2])
    assert sides[1::2] == [1.0] * len(sides[1::2])
    for start, goal in zip(scene.ped_starts, scene.ped_goals):
        assert np.sign(goal[0]) == -np.sign(start[0])
    assert abs(scene.robot_start[0]) <= 0.5


def test_circular_radius_is_area_uniform():
    # r^2 uniforme em [r_in^2, r_out^2] quando a amostragem é uniforme em área
    radii_sq = np.array([math.hypot(*gen_circular(3, seed, PARAMS).ped_starts[0]) ** 2 for seed in range(10_000)])
    counts, _ = np.histogram(radii_sq, bins=10, range=(4.0, 12.25))
    assert chisquare(counts).pvalue > 0.01


def test_robot_goal_from_corner_is_impossible():
    params = BenchConfig().with_overrides(scenario_params={"goal_min_distance": 20.0})
    with pytest.raises(GenerationError) as exc:
        sample_robot_goal((4.0, 4.0), np.random.default_rng(0), params, {"scenario": "random"})
    assert exc.value.cell["scenario"] == "random"


def test_overcrowded_ring_reports_cell():
    params = PARAMS.model_copy(update={
        "scenario_params": ScenarioParams(ring_inner=0.1, ring_outer=0.5, max_attempts=200),
    })
    with pytest.raises(GenerationError) as exc:
        gen_circular(8, 1, params, scene_id=4)
    assert exc.value.cell["n_ped"] == 8
    assert exc.value.cell["scene_id"] == 4


@pytest.mark.parametrize("n_ped", [2, 9])
def test_pedestrian_count_range(n_ped):
    with pytest.raises(ConfigurationError):
        gen_random(n_ped, 0, PARAMS)


class TestSuite:
    def test_scene_seeds_are_distinct_per_cell(self):
        seeds = {
            scene_seed(0, kind, n_ped, index)
            for kind in ScenarioKind
            for n_ped in range(3, 9)
            for index in range(4)
        }
        assert len(seeds) == 3 * 6 * 4

    def test_master_seed_changes_scenes(self):
        a = generate_scene(ScenarioKind.RANDOM, 4, 0, 1, PARAMS)
        b = generate_scene(ScenarioKind.RANDOM, 4, 0, 2, PARAMS)
        assert a.seed != b.seed
        assert a != b

    def test_cardinality_and_order(self):
        config = BenchConfig(n_ped=[3, 5], scenes_per_cell=3)
        scenes = generate_suite(config)
        assert len(scenes) == 3 * 2 * 3
        assert [(s.scenario_kind, s.n_ped, s.scene_id) for s in scenes[:4]] == [
            (ScenarioKind.CIRCULAR, 3, 0), (ScenarioKind.CIRCULAR, 3, 1),
            (ScenarioKind.CIRCULAR, 3, 2), (ScenarioKind.CIRCULAR, 5, 0),
        ]
        assert generate_suite(config) == scenes

    def test_jsonl_pinning(self, tmp_path):
        scenes = generate_suite(BenchConfig(n_ped=[4], scenes_per_cell=2))
        path = tmp_path / "scenes.jsonl"
        assert write_scenes_jsonl(scenes, path) == 6
        assert read_scenes_jsonl(path) == scenes
