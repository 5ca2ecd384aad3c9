"""Command-line entry points and the benchmark harness."""

import json

import numpy as np
import pytest

from rlkopt.cli import main, load_runspec, run, emit_cumulative_gap, RunSpec, GapReport, GapRow
from rlkopt import parse_tour


def coord_file(tmp_path, n, seed, name="inst"):
    rng = np.random.default_rng(seed)
    pts = rng.integers(0, 500, size=(n, 2))
    lines = [f"NAME : {name}", "TYPE : TSP", f"DIMENSION : {n}",
             "EDGE_WEIGHT_TYPE : EUC_2D", "NODE_COORD_SECTION"]
    for i, (x, y) in enumerate(pts, 1):
        lines.append(f"{i} {x} {y}")
    lines.append("EOF")
    path = tmp_path / f"{name}.tsp"
    path.write_text("\n".join(lines) + "\n")
    return path


def tsptw_file(tmp_path, n, seed):
    rng = np.random.default_rng(seed)
    pts = rng.integers(0, 100, size=(n, 2))
    lines = [str(n)]
    for x, y in pts:
        lines.append(f"{x} {y}")
    lines.append("0 100000")
    for _ in range(n - 1):
        lines.append("0 100000")
    path = tmp_path / "inst.tw"
    path.write_text("\n".join(lines) + "\n")
    return path


class TestSolveCommand:
    def test_json_output(self, tmp_path, capsys):
        path = coord_file(tmp_path, 12, seed=1)
        rc = main(["solve", str(path), "--mode", "vsr-alpha", "--imax", "5",
                   "--tmax", "1000", "--seed", "3"])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["mode"] == "vsr-alpha" and out["seed"] == 3
        assert out["iterations"] == 5
        assert len(out["tour"]) == 12
        assert out["trajectory"][-1][1] == out["best_length"]

    def test_tour_out_round_trip(self, tmp_path, capsys):
        path = coord_file(tmp_path, 10, seed=2)
        tour_path = tmp_path / "best.tour"
        main(["solve", str(path), "--imax", "3", "--tmax", "100",
              "--tour-out", str(tour_path)])
        out = json.loads(capsys.readouterr().out)
        assert parse_tour(tour_path.read_text()) == out["tour"]

    def test_tsptw_flag(self, tmp_path, capsys):
        path = tsptw_file(tmp_path, 8, seed=3)
        rc = main(["solve", "--tsptw", str(path), "--tmax", "2", "--imax", "20"])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["fv"] == 0

    def test_instance_required(self):
        with pytest.raises(SystemExit):
            main(["solve"])

    def test_bad_mode_rejected(self, tmp_path):
        path = coord_file(tmp_path, 8, seed=4)
        with pytest.raises(SystemExit):
            main(["solve", str(path), "--mode", "bogus"])


def write_spec(tmp_path, body):
    path = tmp_path / "spec.toml"
    path.write_text(body)
    return path


class TestBenchCommand:
    def make_spec(self, tmp_path, n_instances=1, runs=2, extra=""):
        names = []
        for k in range(n_instances):
            coord_file(tmp_path, 10 + 2 * k, seed=k, name=f"i{k}")
            names.append(f"{tmp_path}/i{k}.tsp")
        instances = ", ".join(f'"{p}"' for p in names)
        return write_spec(tmp_path, f"""
instances = [{instances}]
modes = ["lkh-alpha", "vsr-alpha"]
runs = {runs}
base_seed = 5
output_dir = "{tmp_path}/out"
workers = 1
i_max = 5
t_max = 500.0
{extra}
""")

    def test_outputs_written(self, tmp_path, capsys):
        spec = self.make_spec(tmp_path, n_instances=2)
        assert main(["bench", str(spec)]) == 0
        out = tmp_path / "out"
        results = json.loads((out / "results.json").read_text())
        assert len(results["runs"]) == 2 * 2 * 2
        csv_lines = (out / "results.csv").read_text().strip().splitlines()
        assert len(csv_lines) == 1 + 2 * 2  # header + instances x modes
        tsv = (out / "cumgap.tsv").read_text().strip().splitlines()
        assert tsv[0].split("\t") == ["instance", "lkh-alpha", "vsr-alpha"]
        assert len(tsv) == 3

    def test_deterministic_results_json(self, tmp_path, capsys):
        spec = self.make_spec(tmp_path)
        main(["bench", str(spec)])
        first = json.loads((tmp_path / "out" / "results.json").read_text())
        main(["bench", str(spec)])
        second = json.loads((tmp_path / "out" / "results.json").read_text())
        assert first["runs"] == second["runs"]
        assert first["errors"] == second["errors"]

    def test_gap_against_bks(self, tmp_path, capsys):
        spec = self.make_spec(tmp_path, extra='[bks]\ni0 = 1000\n')
        main(["bench", str(spec)])
        rows = (tmp_path / "out" / "results.csv").read_text().strip().splitlines()[1:]
        for row in rows:
            assert row.split(",")[-1] != ""

    def test_empty_modes_usage_error(self, tmp_path, capsys):
        coord_file(tmp_path, 10, seed=0, name="i0")
        spec = write_spec(tmp_path, f"""
instances = ["{tmp_path}/i0.tsp"]
modes = []
runs = 1
""")
        assert main(["bench", str(spec)]) != 0

    def test_unreadable_instance_listed_others_proceed(self, tmp_path, capsys):
        coord_file(tmp_path, 10, seed=0, name="i0")
        spec = write_spec(tmp_path, f"""
instances = ["{tmp_path}/i0.tsp", "{tmp_path}/missing.tsp"]
modes = ["vsr-alpha"]
runs = 1
output_dir = "{tmp_path}/out"
workers = 1
i_max = 3
""")
        assert main(["bench", str(spec)]) == 0
        results = json.loads((tmp_path / "out" / "results.json").read_text())
        assert len(results["errors"]) == 1
        assert len(results["runs"]) == 1


class TestGapReporting:
    def make_report(self):
        rows = [
            GapRow("a", 10, "m1", 100, 101.0, 0.1, 2, 0.01),
            GapRow("a", 10, "m2", 100, 100.0, 0.1, 2, 0.0),
            GapRow("b", 20, "m1", 200, 204.0, 0.1, 2, 0.02),
            GapRow("b", 20, "m2", 200, 202.0, 0.1, 2, 0.01),
        ]
        return GapReport(rows=rows)

    def test_cumulative_prefix_sums(self):
        text = emit_cumulative_gap(self.make_report(), ["m1", "m2"])
        lines = text.strip().splitlines()
        assert lines[1].split("\t") == ["a", "0.010000", "0.000000"]
        assert lines[2].split("\t") == ["b", "0.030000", "0.010000"]

    def test_sorted_by_size(self):
        report = self.make_report()
        report.rows = report.rows[::-1]
        text = emit_cumulative_gap(report, ["m1", "m2"])
        names = [l.split("\t")[0] for l in text.strip().splitlines()[1:]]
        assert names == ["a", "b"]

    def test_column_count(self):
        text = emit_cumulative_gap(self.make_report(), ["m1", "m2"])
        for line in text.strip().splitlines():
            assert len(line.split("\t")) == 3

    def test_single_zero_gap_row(self):
        report = GapReport(rows=[GapRow("x", 5, "m", 10, 10.0, 0.1, 1, 0.0)])
        text = emit_cumulative_gap(report, ["m"])
        assert text.strip().splitlines()[1] == "x\t0.000000"


class TestRunSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            RunSpec(instances=["a"], modes=[], runs=1)
        with pytest.raises(ValueError):
            RunSpec(instances=["a"], modes=["vsr-alpha"], runs=0)
        with pytest.raises(ValueError):
            RunSpec(instances=[], modes=["vsr-alpha"])
        with pytest.raises(ValueError):
            RunSpec(instances=["a"], modes=["nope"])

    def test_load_with_bks_file(self, tmp_path):
        (tmp_path / "bks.txt").write_text("# name value\nd198 15780\n")
        coord_file(tmp_path, 10, seed=0, name="i0")
        spec = write_spec(tmp_path, f"""
instances = ["{tmp_path}/i0.tsp"]
modes = ["vsr-alpha"]
bks_file = "bks.txt"
""")
        loaded = load_runspec(str(spec))
        assert loaded.bks["d198"] == 15780
