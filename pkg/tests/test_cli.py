"""End-to-end tests for the command-line interface (in-process)."""

import json
import math

import numpy as np
import pytest

from conftest import make_graph, path_graph
from mmgraph import save_graph
from mmgraph.cli import main, read_scalar_csv, read_vector_csv

GRID_SPEC = '{"kind": "grid", "h": 0.25, "rect": [0, 0, 1, 1]}'


def run(*argv):
    return main([str(a) for a in argv])


def write_csv(path, rows, header=("vertex_id", "value")):
    lines = [",".join(map(str, header))] if header else []
    lines += [",".join(map(str, r)) for r in rows]
    path.write_text("\n".join(lines) + "\n")


@pytest.fixture
def grid_path(tmp_path):
    out = tmp_path / "grid.json"
    assert run("gen", "--spec", GRID_SPEC, "--out", out) == 0
    return out


@pytest.fixture
def path11(tmp_path):
    out = tmp_path / "path11.json"
    save_graph(path_graph(11, edge_len=0.1), out)
    return out


class TestGenAuditDist:
    def test_gen_report(self, tmp_path):
        out = tmp_path / "g.json"
        rep = tmp_path / "r.json"
        assert run("gen", "--spec", GRID_SPEC, "--out", out, "--report", rep) == 0
        payload = json.loads(rep.read_text())
        assert payload["command"] == "gen"
        assert payload["kind"] == "grid"
        assert payload["n_vertices"] == 25
        assert payload["n_edges"] == 72
        assert payload["schema_version"] == 1
        assert payload["seed"] == 0

    def test_gen_spec_from_file(self, tmp_path):
        spec = tmp_path / "spec.json"
        spec.write_text(GRID_SPEC)
        out = tmp_path / "g.json"
        assert run("gen", "--spec", spec, "--out", out) == 0
        assert json.loads(out.read_text())["vertices"]

    def test_audit(self, grid_path, tmp_path):
        rep = tmp_path / "audit.json"
        assert run("audit", "--graph", grid_path, "--report", rep) == 0
        payload = json.loads(rep.read_text())
        assert payload["n_vertices"] == 25
        assert payload["valid"] is True
        assert payload["components_graph_metric"] == 1
        assert payload["zero_measure_vertices"] == 0

    def test_dist_csv(self, grid_path, tmp_path):
        out = tmp_path / "d.csv"
        assert run("dist", "--graph", grid_path, "--source", 0, "--out", out) == 0
        d = read_scalar_csv(out)
        assert len(d) == 25
        assert d[0] == 0.0
        assert d[24] == pytest.approx(math.sqrt(2))

    def test_dist_target_report(self, grid_path, tmp_path):
        rep = tmp_path / "d.json"
        assert run(
            "dist", "--graph", grid_path, "--source", "0,24", "--target", 4,
            "--report", rep,
        ) == 0
        payload = json.loads(rep.read_text())
        assert payload["distance"] == pytest.approx(1.0)
        assert payload["source"] == 0
        assert payload["path"][0] == 0 and payload["path"][-1] == 4

    def test_essdist_skips_negligible_edges(self, tmp_path):
        # triangle with a zero-measure direct edge forcing the detour
        G = make_graph(
            [(0, 1.0), (1, 1.0), (2, 1.0)],
            [(0, 1, 1.0, 0.0), (0, 2, 3.0), (2, 1, 3.0)],
        )
        gp = tmp_path / "tri.json"
        save_graph(G, gp)
        rep = tmp_path / "e.json"
        assert run(
            "essdist", "--graph", gp, "--source", 0, "--target", 1, "--report", rep
        ) == 0
        payload = json.loads(rep.read_text())
        assert payload["distance"] == pytest.approx(6.0)
        assert payload["metric"] == "essential"
        rep2 = tmp_path / "g.json"
        assert run(
            "dist", "--graph", gp, "--source", 0, "--target", 1, "--report", rep2
        ) == 0
        assert json.loads(rep2.read_text())["distance"] == pytest.approx(1.0)


class TestAnalysisCommands:
    def test_qc_report(self, grid_path, tmp_path):
        rep = tmp_path / "qc.json"
        assert run(
            "qc", "--graph", grid_path, "--R", "inf", "--seed", 7, "--report", rep
        ) == 0
        payload = json.loads(rep.read_text())
        assert payload["command"] == "qc"
        assert payload["seed"] == 7
        assert payload["C"] >= 1.0
        assert len(payload["worst_pair"]) == 2

    def test_doubling_report(self, grid_path, tmp_path):
        rep = tmp_path / "db.json"
        assert run(
            "doubling", "--graph", grid_path, "--centers", "12", "--scales",
            "0.3,0.6", "--report", rep,
        ) == 0
        payload = json.loads(rep.read_text())
        assert payload["command"] == "doubling"
        assert len(payload["rows"]) >= 1
        assert all(r["ratio"] >= 1.0 for r in payload["rows"])

    def test_pi_check(self, path11, tmp_path):
        u_csv = tmp_path / "u.csv"
        rho_csv = tmp_path / "rho.csv"
        write_csv(u_csv, [(i, i * 0.1) for i in range(11)])
        write_csv(rho_csv, [(i, 1.0) for i in range(11)])
        rep = tmp_path / "pi.json"
        assert run(
            "pi-check", "--graph", path11, "--u", u_csv, "--rho", rho_csv,
            "--lam", 1.0, "--r", 2.0, "--report", rep,
        ) == 0
        payload = json.loads(rep.read_text())
        assert payload["command"] == "pi-check"
        assert np.isfinite(payload["best_C"])

    def test_csv_row_output(self, grid_path, path11, tmp_path):
        qc_csv = tmp_path / "qc.csv"
        assert run(
            "qc", "--graph", grid_path, "--R", "inf",
            "--report", tmp_path / "qc.json", "--csv", qc_csv,
        ) == 0
        lines = qc_csv.read_text().strip().split("\n")
        assert lines[0] == "source,target,ambient,chosen,ratio"
        assert len(lines) > 1
        assert all(float(line.split(",")[4]) >= 1.0 for line in lines[1:])

        db_csv = tmp_path / "db.csv"
        assert run(
            "doubling", "--graph", grid_path, "--centers", "12,0", "--scales",
            "0.3,0.6", "--report", tmp_path / "db.json", "--csv", db_csv,
        ) == 0
        lines = db_csv.read_text().strip().split("\n")
        assert lines[0] == "center,r,inner_measure,outer_measure,ratio"
        assert len(lines) == 5

        u_csv, rho_csv = tmp_path / "u.csv", tmp_path / "rho.csv"
        write_csv(u_csv, [(i, i * 0.1) for i in range(11)])
        write_csv(rho_csv, [(i, 1.0) for i in range(11)])
        pi_csv = tmp_path / "pi.csv"
        assert run(
            "pi-check", "--graph", path11, "--u", u_csv, "--rho", rho_csv,
            "--lam", 1.0, "--r", 2.0, "--report", tmp_path / "pi.json",
            "--csv", pi_csv,
        ) == 0
        lines = pi_csv.read_text().strip().split("\n")
        assert lines[0] == "center,radius,measure,oscillation,sup_rho,diameter,C"
        assert len(lines) == 1 + 11 * 4


class TestExtendCommand:
    def test_mcshane_roundtrip(self, path11, tmp_path):
        b_csv = tmp_path / "b.csv"
        write_csv(b_csv, [(0, 0.0), (10, 1.0)])
        out = tmp_path / "ext.csv"
        rep = tmp_path / "ext.json"
        assert run(
            "extend", "--graph", path11, "--boundary", b_csv, "--out", out,
            "--report", rep, "--certify",
        ) == 0
        ext = read_scalar_csv(out)
        assert ext[0] == 0.0 and ext[10] == 1.0
        payload = json.loads(rep.read_text())
        assert payload["certified"] is True
        assert payload["lip_extension"] <= payload["lip_boundary"] + 1e-9
        assert payload["unreachable"] == []

    def test_truncate_caps_sup_norm(self, path11, tmp_path):
        b_csv = tmp_path / "b.csv"
        write_csv(b_csv, [(0, 0.0), (1, 0.1)])
        out = tmp_path / "t.csv"
        rep = tmp_path / "t.json"
        assert run(
            "extend", "--graph", path11, "--boundary", b_csv, "--truncate",
            "--out", out, "--report", rep,
        ) == 0
        ext = read_scalar_csv(out)
        assert max(abs(v) for v in ext.values()) == pytest.approx(0.1)
        assert json.loads(rep.read_text())["sup_norm"] == pytest.approx(0.1)

    def test_certify_failure_exits_3(self, path11, tmp_path, monkeypatch):
        import mmgraph.extension as ext_mod

        def corrupt(G, omega, data, metric_choice="graph"):
            return {int(v): 0.5 for v in G.vertex_ids}

        monkeypatch.setattr(ext_mod, "mcshane_extend", corrupt)
        b_csv = tmp_path / "b.csv"
        write_csv(b_csv, [(0, 0.0), (10, 1.0)])
        assert run(
            "extend", "--graph", path11, "--boundary", b_csv, "--certify"
        ) == 3


class TestWhitneyCommand:
    def test_cover_only(self, grid_path, tmp_path):
        rep = tmp_path / "w.json"
        assert run(
            "whitney", "--graph", grid_path, "--omega", "0,1,5", "--certify",
            "--report", rep,
        ) == 0
        payload = json.loads(rep.read_text())
        assert payload["certified"] is True
        assert payload["multiplicity"] >= 1
        assert len(payload["blocks"]) >= 1

    def test_vector_extension(self, grid_path, tmp_path):
        b_csv = tmp_path / "f.csv"
        write_csv(
            b_csv,
            [(0, 1.0, 2.0), (1, 0.5, 1.5), (5, -1.0, 0.0)],
            header=("vertex_id", "v0", "v1"),
        )
        out = tmp_path / "F.csv"
        rep = tmp_path / "w.json"
        assert run(
            "whitney", "--graph", grid_path, "--boundary", b_csv, "--out", out,
            "--report", rep, "--certify",
        ) == 0
        F = read_vector_csv(out)
        assert F[0] == (1.0, 2.0)
        assert F[5] == (-1.0, 0.0)
        payload = json.loads(rep.read_text())
        assert payload["sup_norm_extension"] <= payload["sup_norm_data"] + 1e-12


class TestAmleCommand:
    def test_whole_boundary_path_solution(self, path11, tmp_path):
        b_csv = tmp_path / "b.csv"
        write_csv(b_csv, [(0, 0.0), (10, 1.0)])
        out = tmp_path / "u.csv"
        rep = tmp_path / "u.json"
        assert run(
            "amle", "--graph", path11, "--boundary", b_csv, "--whole-boundary",
            "--out", out, "--report", rep, "--certify",
        ) == 0
        u = read_scalar_csv(out)
        for k in range(11):
            assert u[k] == pytest.approx(k / 10, abs=1e-8)
        payload = json.loads(rep.read_text())
        assert payload["converged"] is True
        assert payload["certified"] is True
        assert payload["metric"] == "graph"

    def test_interface_mode(self, path11, tmp_path):
        # CSV covers the complement; the unknown region is extended across
        b_csv = tmp_path / "b.csv"
        write_csv(b_csv, [(0, 0.0), (10, 1.0)])
        out = tmp_path / "u.csv"
        rep = tmp_path / "u.json"
        assert run(
            "amle", "--graph", path11, "--boundary", b_csv, "--metric",
            "essential", "--out", out, "--report", rep,
        ) == 0
        u = read_scalar_csv(out)
        assert u[5] == pytest.approx(0.5, abs=1e-8)
        assert json.loads(rep.read_text())["metric"] == "essential"

    def test_graph_metric_needs_whole_boundary(self, path11, tmp_path):
        b_csv = tmp_path / "b.csv"
        write_csv(b_csv, [(0, 0.0), (10, 1.0)])
        assert run(
            "amle", "--graph", path11, "--boundary", b_csv, "--metric", "graph"
        ) == 2

    def test_nonconvergence_exits_4(self, path11, tmp_path):
        b_csv = tmp_path / "b.csv"
        write_csv(b_csv, [(0, 0.0), (10, 1.0)])
        rep = tmp_path / "u.json"
        assert run(
            "amle", "--graph", path11, "--boundary", b_csv, "--whole-boundary",
            "--init", "min", "--max-iter", 0, "--report", rep,
        ) == 4
        payload = json.loads(rep.read_text())
        assert payload["converged"] is False
        assert payload["iterations"] == 0


class TestErrorPaths:
    def test_missing_graph_file(self, tmp_path):
        assert run("audit", "--graph", tmp_path / "nope.json") == 2

    def test_bad_spec_json(self, tmp_path):
        assert run("gen", "--spec", "{not json", "--out", tmp_path / "g.json") == 2

    def test_bad_metric_name(self, path11, tmp_path):
        b_csv = tmp_path / "b.csv"
        write_csv(b_csv, [(0, 0.0), (10, 1.0)])
        assert run(
            "extend", "--graph", path11, "--boundary", b_csv, "--metric", "fancy"
        ) == 2

    def test_duplicate_csv_id(self, path11, tmp_path):
        b_csv = tmp_path / "b.csv"
        write_csv(b_csv, [(0, 0.0), (0, 1.0)])
        assert run("extend", "--graph", path11, "--boundary", b_csv) == 2

    def test_oversized_gen(self, tmp_path):
        spec = '{"kind": "grid", "h": 1e-05, "rect": [0, 0, 1, 1]}'
        assert run("gen", "--spec", spec, "--out", tmp_path / "g.json") == 2

    def test_unknown_subcommand_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            run("frobnicate")
        assert exc.value.code == 2

    def test_whitney_needs_omega_or_boundary(self, grid_path):
        assert run("whitney", "--graph", grid_path) == 2


class TestCsvReaders:
    def test_header_optional(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("3,1.5\n4,2.5\n")
        assert read_scalar_csv(p) == {3: 1.5, 4: 2.5}

    def test_vector_ragged_rejected(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("vertex_id,v0,v1\n0,1.0,2.0\n1,3.0\n")
        with pytest.raises(Exception):
            read_vector_csv(p)

    def test_empty_rejected(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("\n")
        from mmgraph import InputError

        with pytest.raises(InputError):
            read_scalar_csv(p)


class TestDeterminism:
    COMMANDS = (
        lambda g, t: ("qc", "--graph", g, "--R", "2.0", "--seed", "3",
                      "--report", t / "qc.json"),
        lambda g, t: ("doubling", "--graph", g, "--centers", "0,7,12",
                      "--scales", "0.3,0.6,0.9", "--report", t / "db.json"),
        lambda g, t: ("whitney", "--graph", g, "--omega", "0,1,2,3,4",
                      "--certify", "--report", t / "w.json"),
        lambda g, t: ("audit", "--graph", g, "--report", t / "a.json"),
    )

    def test_reports_byte_identical_across_threads(
        self, grid_path, tmp_path, monkeypatch
    ):
        outputs = {}
        for threads in ("1", "4"):
            monkeypatch.setenv("MMGRAPH_THREADS", threads)
            tdir = tmp_path / f"t{threads}"
            tdir.mkdir()
            blobs = []
            for mk in self.COMMANDS:
                argv = mk(grid_path, tdir)
                assert run(*argv) == 0
                blobs.append((argv[-1]).read_bytes())
            outputs[threads] = blobs
        assert outputs["1"] == outputs["4"]

    def test_repeated_runs_identical(self, grid_path, tmp_path):
        reps = []
        for k in range(2):
            rep = tmp_path / f"qc{k}.json"
            assert run(
                "qc", "--graph", grid_path, "--R", "inf", "--seed", "11",
                "--report", rep,
            ) == 0
            reps.append(rep.read_bytes())
        assert reps[0] == reps[1]
