import csv
import io
import json
import subprocess
import sys

import pytest

from coneinf import catalog, cli
from coneinf.cli import RunConfig, main, parse_args, run

SCHEMA_KEYS = ["command", "config", "results", "paper_refs"]
MODEL_FILE = """
base = normal
kappa = identity
tangent = 0 | -1 1
tangent = -1 0 1 | 0 -1 1 0
normalize = true
"""


def invoke(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestParseArgs:
    def test_project(self):
        cfg = parse_args(["project", "--example", "1", "--a", "1.0"])
        assert cfg.command == "project"
        assert cfg.model == "example-1"
        assert cfg.a == 1.0

    def test_power_fully_populated(self):
        cfg = parse_args("power --example 1 --alpha 0.05 --c 1 --n 2000 --reps 20000 "
                         "--seed 42 --format json".split())
        assert (cfg.command, cfg.model, cfg.alpha, cfg.c, cfg.n, cfg.replications, cfg.seed,
                cfg.format) == ("power", "example-1", 0.05, 1.0, 2000, 20000, 42, "json")

    def test_grid_syntax(self):
        cfg = parse_args(["breakdown", "--example", "2", "--t-grid", "0.5:10:0.5"])
        assert len(cfg.t_grid) == 20
        assert cfg.t_grid[0] == 0.5 and cfg.t_grid[-1] == 10.0
        assert parse_args(["breakdown", "--t-grid", "1,3"]).t_grid == (1.0, 3.0)

    def test_defaults(self):
        assert parse_args(["medianbias"]).t_grid == (1.0, 2.0, 4.0, 6.0, 8.0)
        assert parse_args(["hajek"]).grid == ((1.0, 1), (2.0, 1), (2.0, 2), (5.0, 2))
        assert parse_args(["coverage"]).grid == (0.5, 1.0, 2.0)
        assert parse_args(["ranks"]).bases == ("normal", "laplace")

    def test_config_model(self):
        assert parse_args(["project", "--config", "m.txt"]).model == "config:m.txt"

    @pytest.mark.parametrize("argv", [
        ["power", "--alpha", "1.5"],
        ["power", "--alpha", "0"],
        ["power", "--n", "0"],
        ["power", "--reps", "0"],
        ["power", "--a", "-1"],
        ["power", "--workers", "0"],
        ["power", "--tangent", "0"],
        ["power", "--bogus"],
        ["fly"],
        ["breakdown", "--t-grid", "3:1:1"],
        ["hajek", "--grid", "1-1"],
        ["ranks", "--bases", "cauchy"],
        ["lemma-tv", "--atoms", "1"],
        ["project", "--example", "1", "--config", "x"],
    ])
    def test_usage_errors_exit_2(self, argv, capsys):
        code, out, err = invoke(argv, capsys)
        assert code == 2
        assert out == ""
        assert "usage" in err

    def test_echo_omits_runtime_only_fields(self):
        echo = parse_args(["example", "--workers", "3", "--output", "x"]).echo()
        assert "workers" not in echo and "output" not in echo


class TestExampleCommand:
    def test_exit_zero_ten_rows(self, capsys):
        code, out, _ = invoke(["example", "--a", "1.0"], capsys)
        assert code == 0
        doc = json.loads(out)
        assert list(doc) == SCHEMA_KEYS
        assert len(doc["results"]) == 10
        assert all(r["ok"] and r["deviation"] < 1e-3 for r in doc["results"])

    def test_table_format(self, capsys):
        code, out, _ = invoke(["example", "--format", "table"], capsys)
        lines = out.splitlines()
        assert code == 0
        assert lines[0].split() == ["name", "paper", "computed", "deviation", "ok"]
        assert len(lines) == 12

    def test_exit_1_on_deviation(self, capsys, monkeypatch):
        table = dict(catalog.REFERENCE_TABLE, mu=1.3)
        monkeypatch.setattr(catalog, "REFERENCE_TABLE", table)
        code, out, _ = invoke(["example"], capsys)
        assert code == 1
        assert json.loads(out)["results"][0]["ok"] is False

    def test_other_a_reports_deviation(self):
        status, _ = run(parse_args(["example", "--a", "2.0"]))
        assert status == 1


class TestReports:
    @pytest.mark.parametrize("argv", [
        ["project", "--example", "2"],
        ["power", "--n", "50", "--reps", "40", "--seed", "1"],
        ["breakdown", "--example", "2", "--t-grid", "1,2", "--n", "50", "--reps", "40"],
        ["coverage", "--n", "50", "--reps", "40", "--grid", "1"],
        ["medianbias", "--t-grid", "1,2", "--n", "50", "--reps", "40"],
        ["hajek", "--grid", "1:1,2:2", "--n", "50", "--reps", "40"],
        ["ranks", "--n-list", "20", "--reps", "40", "--bases", "normal"],
        ["lemma-tv", "--instances", "20"],
    ])
    def test_json_schema(self, argv, capsys):
        code, out, _ = invoke(argv, capsys)
        assert code == 0
        doc = json.loads(out)
        assert list(doc) == SCHEMA_KEYS
        assert doc["command"] == argv[0]
        assert doc["config"]["command"] == argv[0]
        assert isinstance(doc["results"], list) and doc["results"]
        assert isinstance(doc["paper_refs"], dict)

    def test_project_values(self, capsys):
        _, out, _ = invoke(["project"], capsys)
        vals = {r["quantity"]: r["value"] for r in json.loads(out)["results"]}
        assert vals["cone_norm_sq"] == pytest.approx(0.6366197723675814, abs=1e-8)
        assert vals["sample_size_ratio"] == pytest.approx(1 / 0.7214257052070638, abs=1e-8)
        assert vals["kkt_max_residual"] <= 1e-9

    def test_twelve_significant_digits(self, capsys):
        _, out, _ = invoke(["project", "--format", "csv"], capsys)
        for row in list(csv.reader(io.StringIO(out)))[1:]:
            digits = row[1].lstrip("-").split("e")[0].replace(".", "").lstrip("0")
            assert len(digits) <= 12

    def test_breakdown_csv(self, capsys):
        argv = ["breakdown", "--example", "2", "--t-grid", "0.5:3:0.5", "--n", "100",
                "--reps", "50", "--seed", "7", "--format", "csv"]
        code, out, _ = invoke(argv, capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0
        assert list(rows[0]) == ["t", "mc", "mc_se", "theory"]
        theory = [float(r["theory"]) for r in rows]
        assert all(a < b for a, b in zip(theory, theory[1:]))

    def test_byte_identical_across_runs_and_workers(self, tmp_path):
        base = ["power", "--n", "80", "--reps", "60", "--seed", "3", "--format", "csv"]
        paths = []
        for i, workers in enumerate(["1", "1", "4"]):
            p = tmp_path / f"out{i}.csv"
            assert main(base + ["--workers", workers, "--output", str(p)]) == 0
            paths.append(p)
        blobs = [p.read_bytes() for p in paths]
        assert blobs[0] == blobs[1] == blobs[2]

    def test_config_file_run(self, tmp_path, capsys):
        path = tmp_path / "m.txt"
        path.write_text(MODEL_FILE)
        code, out, _ = invoke(["project", "--config", str(path)], capsys)
        vals = {r["quantity"]: r["value"] for r in json.loads(out)["results"]}
        assert code == 0
        assert vals["gram_12"] == pytest.approx(0.8262502599921442, abs=1e-9)


class TestErrorMapping:
    def test_module_error_exit_3(self, capsys):
        # the sign tangent has <kappa|g> > 0, so it cannot drive a breakdown
        code, out, err = invoke(["breakdown", "--tangent", "1", "--reps", "5"], capsys)
        assert code == 3
        assert out == ""
        assert "ConditionNotMet" in err

    def test_tangent_out_of_range(self, capsys):
        code, _, err = invoke(["power", "--tangent", "5", "--reps", "5"], capsys)
        assert code == 3 and "out of range" in err

    def test_missing_config_file(self, tmp_path, capsys):
        code, _, err = invoke(["project", "--config", str(tmp_path / "none.txt")], capsys)
        assert code == 2 and err

    def test_bad_config_file(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("colour = red\n")
        code, _, err = invoke(["project", "--config", str(path)], capsys)
        assert code == 2 and "config error" in err

    def test_run_config_is_frozen(self):
        cfg = RunConfig("example", "example-1")
        with pytest.raises(Exception):
            cfg.n = 3


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "coneinf", "example", "--format", "csv"],
                         capture_output=True, text=True, timeout=60)
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "name,paper,computed,deviation,ok"
    assert cli.COMMANDS[-1] == "lemma-tv"
