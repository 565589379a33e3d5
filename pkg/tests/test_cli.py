"""End-to-end command-line interface behaviour and exit codes."""

import json
import os

import pytest

from canonimanip.cli import ORACLE_URL_ENV, main
from canonimanip.render import read_ppm

from conftest import scenario_path


def run_cli(*argv):
    return main(list(argv))


def write_script(tmp_path, verdicts, name="script.json"):
    path = tmp_path / name
    path.write_text(json.dumps(verdicts))
    return str(path)


@pytest.fixture
def pick_place_plan(tmp_path):
    out = tmp_path / "plan.json"
    code = run_cli("plan",
                   "--scene", scenario_path("pick_place_scene.json"),
                   "--task", scenario_path("pick_place_task.json"),
                   "--width", "64", "--height", "48",
                   "--out", str(out))
    assert code == 0
    return out


class TestPlan:
    def test_geometric_plan_document(self, pick_place_plan):
        doc = json.loads(pick_place_plan.read_text())
        assert len(doc["stages"]) == 2
        assert doc["scene_hash"] and doc["task_hash"]
        for stage in doc["stages"]:
            assert "direction" in stage["chosen"]["active"]
            assert "distance_m" in stage["chosen"]

    def test_render_dir_gets_one_image_per_check(self, tmp_path):
        rdir = tmp_path / "renders"
        code = run_cli("plan",
                       "--scene", scenario_path("pick_place_scene.json"),
                       "--task", scenario_path("pick_place_task.json"),
                       "--width", "64", "--height", "48",
                       "--render-dir", str(rdir),
                       "--out", str(tmp_path / "plan.json"))
        assert code == 0
        files = sorted(os.listdir(rdir))
        assert files == ["stage0_check0.ppm", "stage1_check0.ppm"]
        img = read_ppm(rdir / files[0])
        assert img.width == 64 and img.height == 48

    def test_all_failure_script_exits_2(self, tmp_path, capsys):
        script = write_script(tmp_path, ["failure"] * 12)
        code = run_cli("plan",
                       "--scene", scenario_path("pick_place_scene.json"),
                       "--task", scenario_path("pick_place_task.json"),
                       "--width", "64", "--height", "48",
                       "--oracle", f"scripted:{script}")
        assert code == 2
        assert "no candidate accepted" in capsys.readouterr().err

    def test_missing_scene_exits_1(self, capsys):
        code = run_cli("plan", "--scene", "/no/such/file.json",
                       "--task", scenario_path("pick_place_task.json"))
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_remote_oracle_without_url_exits_1(self, capsys, monkeypatch):
        monkeypatch.delenv(ORACLE_URL_ENV, raising=False)
        code = run_cli("plan",
                       "--scene", scenario_path("pick_place_scene.json"),
                       "--task", scenario_path("pick_place_task.json"),
                       "--oracle", "remote")
        assert code == 1
        assert ORACLE_URL_ENV in capsys.readouterr().err

    def test_remote_oracle_env_url_is_used(self, capsys, monkeypatch):
        # An unreachable URL from the environment proves the variable is
        # honoured: the failure is a connection error, not a missing URL.
        monkeypatch.setenv(ORACLE_URL_ENV, "http://127.0.0.1:1/check")
        code = run_cli("plan",
                       "--scene", scenario_path("pick_place_scene.json"),
                       "--task", scenario_path("pick_place_task.json"),
                       "--width", "64", "--height", "48",
                       "--oracle", "remote")
        assert code == 1
        err = capsys.readouterr().err
        assert ORACLE_URL_ENV not in err

    def test_stdout_plan_when_no_out(self, capsys):
        code = run_cli("plan",
                       "--scene", scenario_path("pick_place_scene.json"),
                       "--task", scenario_path("pick_place_task.json"),
                       "--width", "64", "--height", "48")
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert len(doc["stages"]) == 2


class TestExecute:
    def test_closed_loop_succeeds_with_trace(self, pick_place_plan, tmp_path,
                                             capsys):
        trace = tmp_path / "trace.json"
        code = run_cli("execute",
                       "--plan", str(pick_place_plan),
                       "--scene", scenario_path("pick_place_scene.json"),
                       "--trace", str(trace))
        assert code == 0
        doc = json.loads(trace.read_text())
        assert all(s["success"] for s in doc["stages"])
        assert doc["records"]
        assert doc["records"][0]["t"] > 0.0
        assert "success" in capsys.readouterr().err

    def test_scene_hash_mismatch_exits_1(self, pick_place_plan, capsys):
        code = run_cli("execute",
                       "--plan", str(pick_place_plan),
                       "--scene", scenario_path("pour_tea_scene.json"))
        assert code == 1
        assert "hash mismatch" in capsys.readouterr().err

    def test_disturbed_open_loop_exits_2(self, pick_place_plan, tmp_path,
                                         capsys):
        disturb = tmp_path / "disturb.json"
        disturb.write_text(json.dumps([
            {"at_time_s": 0.7, "object_id": "pad",
             "delta": {"t": [0.04, 0.0, 0.0]}}]))
        code = run_cli("execute",
                       "--plan", str(pick_place_plan),
                       "--scene", scenario_path("pick_place_scene.json"),
                       "--mode", "open",
                       "--disturb", str(disturb))
        assert code == 2
        assert "failure" in capsys.readouterr().err


class TestBenchSampling:
    def test_deterministic_report(self, tmp_path, capsys):
        args = ("bench-sampling",
                "--scene", scenario_path("pick_place_scene.json"),
                "--task", scenario_path("pick_place_task.json"),
                "--trials", "5", "--seed", "3")
        assert run_cli(*args) == 0
        first = capsys.readouterr().out
        assert run_cli(*args) == 0
        second = capsys.readouterr().out
        assert first == second
        report = json.loads(first)
        assert report["trials"] == 5
        assert 0.0 <= report["success_rate"] <= 1.0

    def test_out_file_written(self, tmp_path, capsys):
        out = tmp_path / "bench.json"
        code = run_cli("bench-sampling",
                       "--scene", scenario_path("pick_place_scene.json"),
                       "--task", scenario_path("pick_place_task.json"),
                       "--trials", "3", "--strategy", "uniform",
                       "--out", str(out))
        assert code == 0
        assert json.loads(out.read_text())["strategy"] == "uniform"


class TestRender:
    def test_valid_indices_write_ppm(self, tmp_path):
        out = tmp_path / "img.ppm"
        code = run_cli("render",
                       "--scene", scenario_path("pick_place_scene.json"),
                       "--task", scenario_path("pick_place_task.json"),
                       "--stage", "0", "--candidate", "0",
                       "--width", "64", "--height", "48",
                       "--out", str(out))
        assert code == 0
        img = read_ppm(out)
        assert img.width == 64 and img.height == 48

    def test_bad_stage_index_exits_1(self, tmp_path, capsys):
        code = run_cli("render",
                       "--scene", scenario_path("pick_place_scene.json"),
                       "--task", scenario_path("pick_place_task.json"),
                       "--stage", "9", "--candidate", "0",
                       "--out", str(tmp_path / "img.ppm"))
        assert code == 1
        assert "stage" in capsys.readouterr().err

    def test_bad_candidate_index_exits_1(self, tmp_path, capsys):
        code = run_cli("render",
                       "--scene", scenario_path("pick_place_scene.json"),
                       "--task", scenario_path("pick_place_task.json"),
                       "--stage", "0", "--candidate", "99",
                       "--out", str(tmp_path / "img.ppm"))
        assert code == 1
        assert "candidate" in capsys.readouterr().err
