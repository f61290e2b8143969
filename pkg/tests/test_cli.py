import json
import subprocess
import sys

import numpy as np
import pytest
import scipy.io

from spectra_lab import cli
from spectra_lab.errors import NoConvergence
from spectra_lab.lifts import InstanceGraph


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def inst_path(tmp_path):
    path = tmp_path / "inst.json"
    assert run("lift", "gen", "--c", 2, "--n", 4, "--atoms", "sort4", "--negation", "variable",
               "--seed", 3, "--out", path) == 0
    return path


def test_lift_gen_roundtrip(inst_path):
    inst = InstanceGraph.load(inst_path)
    assert inst.n_vertices == 16 and inst.congraph.seed == 3
    d = json.loads(inst_path.read_text())
    assert {"vertices", "edges", "atoms", "negation", "perms"} <= set(d)
    assert set(d["edges"][0]) == {"u", "v", "w", "atom_id"}


def test_global_flags_either_side(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("--seed", 9, "lift", "gen", "--c", 2, "--n", 3, "--atoms", "sort4", "--out", a) == 0
    assert run("lift", "gen", "--c", 2, "--n", 3, "--atoms", "sort4", "--seed", 9, "--out", b) == 0
    assert a.read_text() == b.read_text()


def test_ihara_check(inst_path, tmp_path):
    rep = tmp_path / "rep.json"
    assert run("ihara", "check", "--in", inst_path, "--report", rep) == 0
    d = json.loads(rep.read_text())
    assert d["passed"] and d["max_residual"] <= 1e-8 and len(d["samples"]) == 20
    assert d["spectrum"]["table"][0]["predicted_source"] in ("quadratic", "lambda1", "lambda2", "zero")
    assert run("ihara", "check", "--in", inst_path, "--spectrum-tol", "1e-30", "--report", rep) == 2


def test_nomadic_dump(inst_path, tmp_path):
    out = tmp_path / "b.mtx"
    assert run("nomadic", "dump", "--in", inst_path, "--out", out) == 0
    assert out.read_text().startswith("%%MatrixMarket matrix coordinate integer")
    B = scipy.io.mmread(out)
    assert B.shape == (64, 64)
    assert run("nomadic", "dump", "--in", inst_path) == 2


def test_sdp_and_waves(inst_path, capsys):
    assert run("sdp", "sandwich", "--in", inst_path, "--L", 1) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["chain_holds"] and d["opt"] <= d["sdp_upper"] + 1e-9
    assert run("waves", "ball", "--atoms", "k3", "--c", 3, "--radius", 2) == 2  # bad token
    assert run("waves", "ball", "--atoms", "complete:3", "--c", 3, "--radius", 2) == 0
    capsys.readouterr()
    assert run("waves", "rayleigh", "--L", 6) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["L"] == 6 and d["quotient"] > 2.0
    assert run("atom", "--atoms", "forrelation:2", "--c", 3) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["profile"]["gr"] == pytest.approx(8.0)


def test_experiments_write_files(tmp_path):
    out = tmp_path / "thr.csv"
    assert run("experiment", "threshold-table", "--out", out, "--gnuplot") == 0
    assert out.read_text().startswith("# spectra-lab ")
    assert (tmp_path / "thr.gp").exists()
    box = tmp_path / "box.csv"
    assert run("experiment", "boxplot", "--c", "2,3", "--n", 4, "--seeds", 3, "--out", box) == 0
    summary = (tmp_path / "box.summary.csv").read_text().splitlines()
    assert summary[1].startswith("c,") and len(summary) == 4
    js = tmp_path / "spec.json"
    assert run("experiment", "spectrum-b", "--c", "2:3", "--n", 2, "--format", "json", "--out", js) == 0
    d = json.loads(js.read_text())
    assert {r["c"] for r in d["rows"]} == {2, 3}
    assert run("experiment", "boxplot", "--n", 3, "--gnuplot") == 2


def test_determinism_across_runs_and_threads(tmp_path):
    outs = []
    for k, threads in enumerate((1, 1, 3)):
        path = tmp_path / f"run{k}.csv"
        assert run("experiment", "sandwich-sweep", "--c", 2, "--n", 5, "--seeds", 4, "--L", 1,
                   "--threads", threads, "--seed", 11, "--out", path) == 0
        outs.append(path.read_bytes().split(b"\n", 1)[1])
    assert outs[0] == outs[1] == outs[2]


def test_exit_codes(tmp_path, monkeypatch):
    assert run("lift", "gen", "--c", 2, "--n", 0, "--atoms", "sort4") == 2
    assert run("lift", "gen", "--c", 2, "--n", 3, "--atoms", "complete:3", "--negation", "constraint") == 2
    assert run("ihara", "check", "--in", tmp_path / "missing.json") == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("sdp", "sandwich", "--in", bad) == 2
    bad.write_text("{}")
    assert run("sdp", "sandwich", "--in", bad) == 2

    def boom(args):
        raise NoConvergence("stuck")

    monkeypatch.setitem(cli.COMMANDS, ("atom", None), boom)
    assert run("atom", "--atoms", "sort4") == 3
    with pytest.raises(SystemExit):
        run("frobnicate")


def test_console_script_entry(tmp_path):
    out = subprocess.run([sys.executable, "-m", "spectra_lab.cli", "atom", "--atoms", "sort4", "--c", "2"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["profile"]["dX"] == pytest.approx(4.0)
