import asyncio

import pytest

from socialnav.config import BenchConfig
from socialnav.services.controllers import build_named
from socialnav.services.scenarios import generate_suite
from socialnav.services.suite_runner import EpisodeStatus, SuiteRunner, run_suite


@pytest.fixture
def small_config(tmp_path) -> BenchConfig:
    return BenchConfig(
        controllers=["MPC", "MPC-EDC"],
        scenarios=["random"],
        n_ped=[3],
        scenes_per_cell=5,
        output_dir=str(tmp_path),
    ).with_overrides(simulation={"max_sim_steps": 50})


def test_one_record_per_scene_and_controller(small_config):
    records = run_suite(small_config)
    assert len(records) == 10
    assert records == sorted(records, key=lambda r: r.sort_key)
    by_controller = {}
    for r in records:
        by_controller.setdefault(r.controller, []).append(r.scene_id)
    assert by_controller["MPC"] == by_controller["MPC-EDC"] == [0, 1, 2, 3, 4]


def test_parallel_jobs_do_not_change_results(small_config):
    assert run_suite(small_config) == run_suite(small_config.with_overrides(jobs=3))


def test_pinned_scenes_are_reused(small_config):
    scenes = generate_suite(small_config)[:2]
    records = run_suite(small_config, scenes)
    assert len(records) == 4
    assert {r.scene_id for r in records} == {0, 1}


def test_trace_files(small_config, tmp_path):
    run_suite(small_config.with_overrides(trace=True, scenes_per_cell=1))
    traces = sorted(p.name for p in (tmp_path / "traces").iterdir())
    assert traces == ["random-3-0-MPC-EDC.csv", "random-3-0-MPC.csv"]


def test_runner_status(small_config):
    runner = SuiteRunner(small_config)
    scene = generate_suite(small_config)[0]
    task_id = runner.submit(scene, build_named("MPC", small_config))
    assert runner.get_status(task_id)["status"] == EpisodeStatus.PENDING.value
    (record,) = asyncio.run(runner.run())
    status = runner.get_status(task_id)
    assert status["status"] == EpisodeStatus.COMPLETED.value
    assert status["record"]["controller"] == "MPC"
    assert runner.get_stats() == {"pending": 0, "running": 0, "completed": 1, "failed": 0, "total": 1}
    assert runner.get_status("missing") is None


def test_controller_errors_do_not_drop_records(small_config, monkeypatch):
    def broken_step(*args, **kwargs):
        raise ValueError("array must not contain infs or NaNs")

    monkeypatch.setattr("socialnav.services.crowd.mpc_step", broken_step)
    records = run_suite(small_config.with_overrides(scenes_per_cell=2))
    assert len(records) == 4
    assert all(r.solver_failures > 0 for r in records)
