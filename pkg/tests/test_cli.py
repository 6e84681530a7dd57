import json
import subprocess
import sys

import numpy as np
import pytest

from signedflow.cli import RunConfig, main, output_digest, resolve_graph, run
from signedflow.errors import GraphError
from signedflow.io import load_graph, read_json, save_graph
from signedflow.presets import KURAMOTO_SIX, LEADER_SYMMETRY_BALANCED


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestGraphFiles:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "g.json"
        save_graph(LEADER_SYMMETRY_BALANCED, path)
        assert load_graph(path) == LEADER_SYMMETRY_BALANCED

    def test_missing_file(self, tmp_path):
        with pytest.raises(GraphError):
            read_json(tmp_path / "nope.json")

    def test_bad_json(self, tmp_path):
        path = tmp_path / "g.json"
        path.write_text("{not json")
        with pytest.raises(GraphError):
            read_json(path)

    def test_preset(self):
        assert resolve_graph("preset:kuramoto-six") == KURAMOTO_SIX
        with pytest.raises(GraphError):
            resolve_graph("preset:nothing")


class TestCommands:
    def test_balance_ok(self, capsys):
        code, out, _ = call(capsys, "balance", "--graph", "preset:leader-symmetry-balanced")
        assert code == 0
        doc = json.loads(out)
        assert doc["status"] == "balanced" and doc["sigma"] == [1, 1, -1, 1]

    def test_balance_unbalanced_exit(self, capsys):
        code, out, _ = call(capsys, "balance", "--graph", "preset:leader-symmetry-unbalanced")
        assert code == 3
        assert json.loads(out)["witness_cycle"]

    def test_missing_graph_file(self, capsys, tmp_path):
        code, _, err = call(capsys, "balance", "--graph", str(tmp_path / "missing.json"))
        assert code == 2 and "no such file" in err

    def test_symmetry(self, capsys):
        code, out, _ = call(capsys, "symmetry", "--graph", "preset:leader-symmetry-balanced")
        doc = json.loads(out)
        assert code == 0
        assert [1, 2, 3, 4] == doc["automorphisms"][0]["map"]
        assert [3, 2, 1, 4] in [a["map"] for a in doc["automorphisms"]]

    def test_symmetry_size_guard(self, capsys, tmp_path):
        from signedflow.signed_graph import SignedGraph

        path = tmp_path / "big.json"
        save_graph(SignedGraph(13, tuple((i, i + 1, 1.0) for i in range(1, 13))), path)
        code, _, _ = call(capsys, "symmetry", "--graph", str(path))
        assert code == 2
        code, out, _ = call(capsys, "symmetry", "--graph", str(path), "--allow-large")
        assert code == 0 and json.loads(out)["count"] == 2

    def test_simulate_single_step(self, capsys, tmp_path):
        path = tmp_path / "t.csv"
        code, _, _ = call(capsys, "simulate", "--graph", "preset:leader-symmetry-balanced", "--x0", "1,1,1,1",
                          "--dt", "0.5", "--T", "0.5", "--out", str(path))
        assert code == 0
        assert len(path.read_text().splitlines()) == 3

    def test_simulate_bad_x0(self, capsys, tmp_path):
        code, _, err = call(capsys, "simulate", "--graph", "preset:leader-symmetry-balanced", "--x0", "1,1",
                            "--out", str(tmp_path / "t.csv"))
        assert code == 2 and "x0" in err

    def test_simulate_with_input(self, capsys, tmp_path):
        spec = tmp_path / "u.json"
        spec.write_text(json.dumps({"kind": "constant", "value": 1.0}))
        path = tmp_path / "t.csv"
        code, _, _ = call(capsys, "simulate", "--graph", "preset:leader-symmetry-balanced", "--x0", "0,0,0,0",
                          "--leader", "2", "--input", str(spec), "--dt", "0.1", "--T", "1", "--out", str(path))
        assert code == 0
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        assert data[-1, 2] == pytest.approx(1.0)

    def test_controllability_probe(self, capsys):
        code, out, _ = call(capsys, "controllability", "--graph", "preset:leader-symmetry-balanced",
                            "--flow", "relative", "--f", "cubic", "--leader", "2", "--probe", "--T", "2")
        doc = json.loads(out)
        assert code == 0
        assert doc["certificate"]["rule"] == "relative-flow"
        assert doc["probe"]["max_deviation"] <= 1e-12

    def test_controllability_none(self, capsys):
        code, out, _ = call(capsys, "controllability", "--graph", "preset:leader-symmetry-unbalanced",
                            "--f", "cubic", "--leader", "2")
        doc = json.loads(out)
        assert code == 0 and doc["certificate"] is None and "not a proof" in doc["note"]

    def test_controllability_linear_refused(self, capsys):
        code, _, _ = call(capsys, "controllability", "--graph", "preset:leader-symmetry-balanced",
                          "--flow", "linear", "--leader", "2")
        assert code == 2

    def test_edmd(self, capsys, tmp_path):
        traj = tmp_path / "t.csv"
        call(capsys, "simulate", "--graph", "preset:kuramoto-six", "--f", "sin",
             "--x0=-1.73,-0.38,-0.21,0.56,-0.65,-0.32", "--dt", "0.1", "--T", "5", "--out", str(traj))
        modes = tmp_path / "modes.csv"
        code, out, _ = call(capsys, "edmd", "--traj", str(traj), "--window", "2,5",
                            "--graph", "preset:kuramoto-six", "--modes-out", str(modes))
        doc = json.loads(out)
        assert code == 0
        assert doc["bipartition"]["signs"] == [1, 1, 1, -1, -1, -1]
        assert doc["gauge_match"] is True
        assert modes.read_text().startswith("re_mu,im_mu,re_v1")

    def test_edmd_bad_window(self, capsys, tmp_path):
        traj = tmp_path / "t.csv"
        call(capsys, "simulate", "--graph", "preset:kuramoto-six", "--dt", "0.1", "--T", "1", "--out", str(traj))
        code, _, _ = call(capsys, "edmd", "--traj", str(traj), "--window", "0,3", "--order", "1")
        assert code == 2

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["--version"])
        assert info.value.code == 0
        assert "0.1.0" in capsys.readouterr().out

    def test_module_entry(self):
        res = subprocess.run([sys.executable, "-m", "signedflow", "balance", "--graph", "preset:kuramoto-six"],
                             capture_output=True, text=True, check=False)
        assert res.returncode == 0 and json.loads(res.stdout)["sigma"] == [1, 1, 1, -1, -1, -1]


class TestPipeline:
    def test_report(self, tmp_path):
        report = run(RunConfig(command="pipeline", output_dir=str(tmp_path / "run")))
        assert report["gauge_match"] is True
        assert report["signs"] == [1, 1, 1, -1, -1, -1]
        assert len(report["windows"]) == 3
        names = {p.name for p in (tmp_path / "run").iterdir()}
        assert {"graph.json", "balance.json", "trajectory.csv", "report.json", "edmd_window3.json"} <= names

    def test_deterministic(self, tmp_path, capsys):
        argv = ["pipeline", "--random-x0", "--seed", "7", "--window", "0,4", "--T", "4"]
        assert call(capsys, *argv, "--output-dir", str(tmp_path / "a"))[0] == 0
        assert call(capsys, *argv, "--output-dir", str(tmp_path / "b"))[0] == 0
        assert output_digest(tmp_path / "a") == output_digest(tmp_path / "b")
        other = call(capsys, "pipeline", "--random-x0", "--seed", "8", "--window", "0,4", "--T", "4",
                     "--output-dir", str(tmp_path / "c"))
        assert other[0] in (0, 4)
        assert output_digest(tmp_path / "a") != output_digest(tmp_path / "c")

    def test_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"T": 3.0, "windows": [[0, 3]], "output_dir": str(tmp_path / "r")}))
        code, out, _ = call(capsys, "pipeline", "--config", str(cfg))
        assert code == 0 and json.loads(out)["gauge_match"] is True

    def test_unbalanced_graph(self, tmp_path, capsys):
        code, _, err = call(capsys, "pipeline", "--graph", "preset:leader-symmetry-unbalanced",
                            "--x0", "1,0,0,0", "--output-dir", str(tmp_path / "u"))
        assert code == 3 and "negative cycle" in err
