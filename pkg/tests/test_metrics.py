import json

import pytest

from socialnav.config import BenchConfig
from socialnav.models.schemas import QuartileStats, RunRecord, ScenarioKind
from socialnav.services.metrics import (
    RECORD_COLUMNS,
    aggregate,
    emit,
    format_quartiles,
    preflight_output,
    quartile_stats,
    read_records_csv,
    render_table,
    write_records_csv,
)
from socialnav.utils.exceptions import OutputPathError


def record(steps=None, collisions=0, controller="MPC-EDC", scene_id=0, scenario=ScenarioKind.CIRCULAR, n_ped=3,
           wall_time=0.0):
    return RunRecord(
        scenario=scenario,
        n_ped=n_ped,
        scene_id=scene_id,
        controller=controller,
        steps_to_target=steps,
        collisions=collisions,
        timeout=steps is None,
        solver_failures=0,
        wall_time_s=wall_time,
    )


class TestQuartiles:
    def test_linear_interpolation(self):
        stats = quartile_stats([1, 2, 3, 4])
        assert (stats.q1, stats.median, stats.mean, stats.q3) == (1.75, 2.5, 2.5, 3.25)
        assert stats.count == 4

    def test_single_value(self):
        stats = quartile_stats([7])
        assert (stats.q1, stats.median, stats.mean, stats.q3) == (7, 7, 7, 7)

    def test_format(self):
        stats = QuartileStats(q1=1.0, median=2.0, mean=1.62, q3=2.0, count=3)
        assert format_quartiles(stats) == "1.0 | 2.0 | 1.62 | 2.0"
        assert format_quartiles(None) == "-"


class TestAggregate:
    def test_groups_and_order(self):
        records = [
            record(120, controller="MPC-ELC-2", scene_id=1),
            record(100, controller="ED-MPC"),
            record(300, controller="ED-MPC", scene_id=1),
            record(90, scenario=ScenarioKind.RANDOM),
        ]
        summaries = aggregate(records)
        assert [s.group_key for s in summaries] == [
            ("circular", 3, "ED-MPC"), ("circular", 3, "MPC-ELC-2"), ("random", 3, "MPC-EDC"),
        ]
        assert summaries[0].steps_to_target.median == 200.0
        assert {r.group_key for r in records} == {s.group_key for s in summaries}

    def test_timeouts_excluded_from_steps(self):
        records = [record(100), record(None, scene_id=1), record(140, collisions=2, scene_id=2)]
        (summary,) = aggregate(records)
        assert summary.steps_to_target.count == 2
        assert summary.steps_to_target.mean == 120.0
        assert summary.timeouts.mean == pytest.approx(1 / 3)
        assert summary.collisions.count == 3

    def test_all_timeouts(self):
        (summary,) = aggregate([record(None), record(None, scene_id=1)])
        assert summary.steps_to_target is None
        assert summary.timeouts.mean == 1.0
        assert "-" in render_table([summary])

    def test_empty(self):
        assert aggregate([]) == []

    def test_order_independent(self):
        records = [record(100 + i, scene_id=i, controller=c) for i in range(4) for c in ("ED-MPC", "MPC-AEDC")]
        assert aggregate(records) == aggregate(list(reversed(records)))


class TestFiles:
    def test_records_header(self, tmp_path):
        path = tmp_path / "records.csv"
        write_records_csv([], path)
        assert path.read_text() == ",".join(RECORD_COLUMNS) + "\n"
        assert read_records_csv(path) == []

    def test_records_round_trip(self, tmp_path):
        records = [record(100, scene_id=1), record(None, collisions=3)]
        path = tmp_path / "records.csv"
        write_records_csv(records, path)
        lines = path.read_text().splitlines()
        assert lines[1] == "circular,3,0,MPC-EDC,,3,true,0,0.000"
        assert lines[2] == "circular,3,1,MPC-EDC,100,0,false,0,0.000"
        assert read_records_csv(path) == sorted(records, key=lambda r: r.sort_key)

    def test_wall_time_only_when_requested(self, tmp_path):
        path = tmp_path / "records.csv"
        write_records_csv([record(100, wall_time=1.23456)], path)
        assert path.read_text().splitlines()[1].endswith(",0.000")
        write_records_csv([record(100, wall_time=1.23456)], path, record_wall_time=True)
        assert path.read_text().splitlines()[1].endswith(",1.235")

    def test_table_layout(self):
        table = render_table(aggregate([record(100), record(110, scene_id=1)]))
        lines = table.splitlines()
        assert lines[0].split() == ["Scenario", "N", "Controller", "Steps", "to", "Target", "Collisions", "Timeouts"]
        assert "Q1 | Median | Mean | Q3" in lines[1]
        assert "102.5 | 105.0 | 105.0 | 107.5" in lines[2]

    def test_emit_is_byte_stable(self, tmp_path):
        config = BenchConfig(output_dir=str(tmp_path / "out"))
        records = [record(100 + i, scene_id=i, controller=c) for i in range(3) for c in ("ED-MPC", "MPC-AMDC")]
        first = {k: p.read_bytes() for k, p in emit(aggregate(records), records, config).items()}
        second = {k: p.read_bytes() for k, p in emit(aggregate(records[::-1]), records[::-1], config).items()}
        assert first == second

    def test_manifest_contents(self, tmp_path):
        config = BenchConfig(output_dir=str(tmp_path), master_seed=99)
        paths = emit([], [], config, scene_seeds={"random/3/1": 5, "circular/3/0": 7})
        manifest = json.loads(paths["manifest"].read_text())
        assert manifest["quartile_method"] == "linear"
        assert manifest["master_seed"] == 99
        assert list(manifest["scene_seeds"]) == ["circular/3/0", "random/3/1"]
        assert manifest["config"]["master_seed"] == 99

    def test_preflight_rejects_file(self, tmp_path):
        blocker = tmp_path / "taken"
        blocker.write_text("x")
        with pytest.raises(OutputPathError):
            preflight_output(blocker)
        with pytest.raises(OutputPathError):
            preflight_output(blocker / "nested")
