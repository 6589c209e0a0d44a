"""
命令行界面的端到端測試
"""
import csv
import io
import json

import pytest

from thomson_lab.cli import main

BENCHMARK = {
    "plain": [["0", "1/4"]],
    "cantor": [
        {"host": ["1/2", "1/2"], "rule": {"kind": "harmonic", "a": "3/10", "p": 2}, "depth": 12}
    ],
}
ARC = {"plain": [["0", "1/4"]]}

CONFIG_TEXT = """\
[verify]
corpus_size = 5

[herglotz]
growth_radii = 12
growth_angles = 64
grid = 4x8
"""


@pytest.fixture
def workspace(tmp_path):
    (tmp_path / "benchmark.json").write_text(json.dumps(BENCHMARK), encoding="utf-8")
    (tmp_path / "arc.json").write_text(json.dumps(ARC), encoding="utf-8")
    (tmp_path / "bad.json").write_text(json.dumps({"plain": [["0", "3/2"]]}), encoding="utf-8")
    (tmp_path / "lab.ini").write_text(CONFIG_TEXT, encoding="utf-8")
    return tmp_path


def run(workspace, *argv):
    return main(["--config", str(workspace / "lab.ini"), "--quiet", *argv])


def read_csv(text):
    return list(csv.reader(io.StringIO(text)))


class TestJsonCommands:
    def test_measure_exact(self, workspace, capsys):
        assert run(workspace, "measure", "--set", str(workspace / "arc.json")) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["exact"] == "1/4"

    def test_measure_bracket(self, workspace, capsys):
        assert run(workspace, "measure", "--set", str(workspace / "benchmark.json")) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["exact"] is None
        assert data["bracket"]["lower_float"] <= data["bracket"]["upper_float"]

    def test_content(self, workspace, capsys):
        code = run(workspace, "content", "--set", str(workspace / "arc.json"), "--depth", "8")
        assert code == 0
        data = json.loads(capsys.readouterr().out)
        assert "realized" not in data

    def test_content_of_structured_set_is_realized(self, workspace, capsys):
        code = run(workspace, "content", "--set", str(workspace / "benchmark.json"), "-d", "6")
        assert code == 0
        assert json.loads(capsys.readouterr().out)["realized"] is True

    def test_decompose(self, workspace, capsys):
        assert run(workspace, "decompose", "--set", str(workspace / "benchmark.json")) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["core"]["plain"] == [["0", "1/4"]]

    def test_frostman_to_file(self, workspace):
        target = workspace / "out" / "frostman.json"
        code = run(
            workspace, "--output", str(target), "frostman", "--set", str(workspace / "arc.json"), "-d", "6"
        )
        assert code == 0
        assert json.loads(target.read_text(encoding="utf-8"))

    def test_construct_fn(self, workspace, capsys):
        code = run(
            workspace, "construct-fn", "--set", str(workspace / "benchmark.json"), "-n", "1", "--depth", "9"
        )
        assert code == 0
        data = json.loads(capsys.readouterr().out)
        assert data["generation"] == 1
        assert data["cells"]


class TestCsvCommands:
    def test_gk(self, workspace, capsys):
        code = run(
            workspace, "gk", "--set", str(workspace / "benchmark.json"), "-k", "1", "--grid", "2x4"
        )
        assert code == 0
        rows = read_csv(capsys.readouterr().out)
        assert rows[0] == ["z_re", "z_im", "re", "im", "abs"]
        assert len(rows) == 1 + 8
        assert float(rows[1][4]) == pytest.approx(1.0, abs=1e-12)

    def test_distance(self, workspace, capsys):
        code = run(
            workspace,
            "distance",
            "--set",
            str(workspace / "benchmark.json"),
            "--target",
            str(workspace / "arc.json"),
            "--degrees",
            "0,2,4",
            "--depth",
            "6",
        )
        assert code == 0
        rows = read_csv(capsys.readouterr().out)
        assert rows[0] == ["N", "d", "cond"]
        assert [r[0] for r in rows[1:]] == ["0", "2", "4"]
        distances = [float(r[1]) for r in rows[1:]]
        assert all(b <= a + 1e-10 for a, b in zip(distances, distances[1:]))


class TestExitCodes:
    def test_verify_passes(self, workspace, capsys):
        code = run(workspace, "verify", "--checks", "bergman_identity,closed_form_distance")
        assert code == 0
        assert json.loads(capsys.readouterr().out)["passed"] is True

    def test_verify_fault_exits_one(self, workspace, capsys):
        code = run(
            workspace, "verify", "--checks", "frostman_postconditions", "--inject-fault", "frostman-cap"
        )
        assert code == 1
        data = json.loads(capsys.readouterr().out)
        assert data["summary"]["failed"] == ["frostman_postconditions"]

    def test_invalid_set(self, workspace, capsys):
        assert run(workspace, "measure", "--set", str(workspace / "bad.json")) == 2
        assert "錯誤" in capsys.readouterr().err

    def test_invalid_degrees(self, workspace):
        code = run(
            workspace,
            "distance",
            "--set",
            str(workspace / "arc.json"),
            "--target",
            str(workspace / "arc.json"),
            "--degrees",
            "5,3",
        )
        assert code == 2

    def test_depth_not_above_n(self, workspace):
        code = run(
            workspace, "construct-fn", "--set", str(workspace / "arc.json"), "-n", "3", "--depth", "2"
        )
        assert code == 2

    def test_unknown_check(self, workspace):
        assert run(workspace, "verify", "--checks", "nothing") == 2

    def test_gk_on_carleson_set(self, workspace):
        # 純弧集合沒有殘餘部分
        assert run(workspace, "gk", "--set", str(workspace / "arc.json"), "-k", "1") != 0

    def test_missing_subcommand(self, workspace):
        with pytest.raises(SystemExit):
            main([])
