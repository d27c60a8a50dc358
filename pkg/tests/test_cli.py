import json
import subprocess
import sys

import pytest

from hypfill.cli import main
from hypfill.filling import load_filling
from hypfill.spaces import load_space


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture()
def line16_file(tmp_path):
    path = tmp_path / "line16.json"
    assert run("gen", "--kind", "line", "--n", 16, "--out", path) == 0
    return path


class TestGen:
    def test_line_table(self, line16_file):
        space = load_space(line16_file)
        assert space.n == 16
        assert space.distance(0, 15) == 15.0

    def test_too_few_points_exits_one(self, tmp_path):
        assert run("gen", "--kind", "line", "--n", 2,
                   "--out", tmp_path / "x.json") == 1

    def test_seed_determinism_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run("gen", "--kind", "random", "--n", 12, "--seed", 9, "--out", a) == 0
        assert run("gen", "--kind", "random", "--n", 12, "--seed", 9, "--out", b) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_console_entry_point(self, tmp_path):
        out = tmp_path / "s.json"
        proc = subprocess.run(
            [sys.executable, "-m", "hypfill.cli", "gen", "--kind", "line",
             "--n", "4", "--out", str(out)],
            capture_output=True,
        )
        assert proc.returncode == 0
        assert load_space(out).distance(0, 3) == 3.0


class TestSnowflakeCmd:
    def test_halves_log_distances(self, tmp_path, line16_file):
        out = tmp_path / "flake.json"
        assert run("snowflake", "--in", line16_file, "--eps", 0.5, "--out", out) == 0
        assert load_space(out).distance(0, 9) == pytest.approx(3.0)

    def test_bad_exponent_exits_one(self, tmp_path, line16_file):
        assert run("snowflake", "--in", line16_file, "--eps", 2.0,
                   "--out", tmp_path / "x.json") == 1


class TestFill:
    def test_build_and_round_trip(self, tmp_path, line16_file):
        out = tmp_path / "f.json"
        dot = tmp_path / "f.dot"
        assert run("fill", "--in", line16_file, "--alpha", 2, "--tau", 4,
                   "--out", out, "--dot", dot) == 0
        loaded = load_filling(out)
        assert loaded.graph.vertex_count > 0
        # re-emitting the loaded graph reproduces the adjacency exactly
        raw = json.loads(out.read_text())
        edges = {tuple(e) for e in raw["edges"]}
        assert edges == set(loaded.graph.edges)
        assert dot.read_text().startswith("graph filling {")

    def test_small_tau_exits_one(self, tmp_path, line16_file):
        assert run("fill", "--in", line16_file, "--alpha", 2, "--tau", 3,
                   "--out", tmp_path / "x.json") == 1

    def test_missing_input_exits_two(self, tmp_path):
        assert run("fill", "--in", tmp_path / "nope.json", "--alpha", 2,
                   "--tau", 4, "--out", tmp_path / "x.json") == 2


class TestDelta:
    def test_single_column_is_tree(self, tmp_path):
        column = {
            "alpha": 2.0,
            "tau": 4.0,
            "n_min": 0,
            "n_max": 7,
            "vertices": [
                {"id": i, "center": 0, "height": i} for i in range(8)
            ],
            "edges": [[i, i + 1] for i in range(7)],
        }
        path = tmp_path / "col.json"
        path.write_text(json.dumps(column))
        out = tmp_path / "report.json"
        assert run("delta", "--filling", path, "--out", out) == 0
        report = json.loads(out.read_text())
        assert report["delta"] == 0.0
        assert report["mode"] == "exhaustive"

    def test_report_with_space_fits(self, tmp_path, line16_file):
        filling_path = tmp_path / "f.json"
        run("fill", "--in", line16_file, "--alpha", 2, "--tau", 4,
            "--out", filling_path)
        out = tmp_path / "report.json"
        assert run("delta", "--filling", filling_path, "--mode", "sampled",
                   "--samples", 2000, "--space", line16_file, "--out", out) == 0
        report = json.loads(out.read_text())
        assert set(report) == {"delta", "mode", "witness", "nu_fit", "compare_C_fit"}
        assert report["nu_fit"] is not None
        assert report["compare_C_fit"] >= 1.0

    def test_sampled_below_exhaustive(self, tmp_path):
        space_path = tmp_path / "s.json"
        run("gen", "--kind", "line", "--n", 5, "--out", space_path)
        filling_path = tmp_path / "f.json"
        run("fill", "--in", space_path, "--alpha", 2, "--tau", 4,
            "--out", filling_path)
        exact_out = tmp_path / "e.json"
        sampled_out = tmp_path / "s_rep.json"
        assert run("delta", "--filling", filling_path, "--out", exact_out) == 0
        assert run("delta", "--filling", filling_path, "--mode", "sampled",
                   "--samples", 500, "--out", sampled_out) == 0
        exact = json.loads(exact_out.read_text())["delta"]
        sampled = json.loads(sampled_out.read_text())["delta"]
        assert sampled <= exact


class TestPipelines:
    @pytest.fixture()
    def line8_file(self, tmp_path):
        path = tmp_path / "line8.json"
        run("gen", "--kind", "line", "--n", 8, "--out", path)
        return path

    def test_extend_writes_schema(self, tmp_path, line8_file):
        out = tmp_path / "ext.json"
        assert run("extend", "--space", line8_file, "--eps", 0.5,
                   "--out", out) == 0
        raw = json.loads(out.read_text())
        assert set(raw) == {"vertex_map", "geodesic_map", "constants"}
        assert raw["constants"]["theta"] == 2.0

    def test_analyze_report(self, tmp_path, line8_file):
        out = tmp_path / "an.json"
        assert run("analyze", "--space", line8_file, "--eps", 0.5,
                   "--samples", 2000, "--out", out) == 0
        raw = json.loads(out.read_text())
        assert raw["slopes"] == [0.5, 2.0]
        assert raw["k"] >= 0.0

    def test_boundary_report(self, tmp_path, line8_file):
        out = tmp_path / "b.json"
        assert run("boundary", "--space", line8_file, "--eps", 0.5,
                   "--out", out) == 0
        raw = json.loads(out.read_text())
        assert raw["equals_input"] is True
        assert raw["bijective"] is True

    def test_roundtrip_report(self, tmp_path, line8_file):
        out = tmp_path / "rt.json"
        assert run("roundtrip", "--space", line8_file, "--eps", 0.5,
                   "--theta", 2, "--out", out) == 0
        raw = json.loads(out.read_text())
        assert raw["slopes"] == [0.5, 2.0]
        assert raw["boundary_equal"] is True
        assert raw["qs_pass"] is True

    def test_map_file_pipeline(self, tmp_path, line8_file):
        flake_path = tmp_path / "flake8.json"
        run("snowflake", "--in", line8_file, "--eps", 0.5, "--out", flake_path)
        map_path = tmp_path / "m.json"
        map_path.write_text(json.dumps({
            "source": line8_file.name,
            "target": flake_path.name,
            "forward": list(range(8)),
        }))
        out = tmp_path / "rt.json"
        assert run("roundtrip", "--map", map_path, "--theta", 2,
                   "--out", out) == 0
        assert json.loads(out.read_text())["boundary_equal"] is True

    def test_malformed_map_exits_two(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken")
        assert run("roundtrip", "--map", bad, "--theta", 2,
                   "--out", tmp_path / "x.json") == 2
