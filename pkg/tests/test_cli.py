import json
import subprocess
import sys
from pathlib import Path

import pytest

from irgvoter.cli import EXIT_CAP, EXIT_CENSORED, EXIT_INVALID, run
from irgvoter.graphgen import read_graph

FIX = Path(__file__).parent / "fixtures"


@pytest.fixture(autouse=True)
def outdir(tmp_path, monkeypatch):
    monkeypatch.setenv("IRGVOTER_OUTPUT_DIR", str(tmp_path))
    return tmp_path


def load(path):
    return json.loads(Path(path).read_text())


def test_gen_writes_header_and_config(outdir):
    assert run(["gen", "--n", "1000", "--beta", "0.1", "--gamma", "0.4", "--variant", "snr", "--seed", "7"]) == 0
    path = outdir / "graph_1000_snr_7.txt"
    lines = path.read_text().splitlines()
    assert lines[0] == "1000 0.1 0.4 snr"
    cfg = json.loads(lines[1][2:])
    assert cfg["command"] == "gen" and cfg["params"]["seed"] == 7 and "version" in cfg
    g = read_graph(path)
    assert g.n == 1000 and g.is_simple


def test_exact_on_p3(outdir):
    assert run(["exact", "--graph", str(FIX / "p3.txt"), "--dynamics", "classical", "--theta", "0",
                "--out", "p3"]) == 0
    doc = load(outdir / "p3.json")
    assert doc["result"]["t_hit"] == pytest.approx(4.0)
    assert sorted(doc["result"]["t_hit_worst_pair"]) == [1, 3]
    assert doc["config"]["params"]["dynamics"] == "classical"


def test_audit_on_star(outdir):
    assert run(["audit", "--graph", str(FIX / "k13.txt"), "--out", "a"]) == 0
    assert load(outdir / "a.json")["result"]["passed"] is True


def test_stats_csv(outdir):
    assert run(["stats", "--n", "2000", "--beta", "0.1", "--gamma", "0.4", "--seed", "3",
                "--format", "csv", "--out", "s"]) == 0
    lines = (outdir / "s.csv").read_text().splitlines()
    assert lines[0].startswith("# {") and lines[1].startswith("rep,size,edges")


def test_simulate_record(outdir):
    assert run(["simulate", "--graph", str(FIX / "k13.txt"), "--reps", "200", "--init", "unique",
                "--seed", "4", "--out", "sim"]) == 0
    rec = load(outdir / "sim.json")["result"]
    assert rec["reps"] == 200 and rec["init"] == "unique" and rec["seed"] == 4


def test_simulate_censoring_exit(outdir):
    code = run(["simulate", "--n", "3000", "--beta", "0.1", "--gamma", "0.4", "--reps", "3",
                "--horizon", "1e-6", "--out", "cen"])
    assert code == EXIT_CENSORED
    assert (outdir / "cen.json").exists()  # partial results are kept


def test_gw_tree_text(outdir):
    assert run(["gw", "--n", "100", "--beta", "0.2", "--gamma", "0.3", "--tree", "1", "--seed", "2",
                "--out", "t.txt"]) == 0
    lines = (outdir / "t.txt").read_text().splitlines()
    assert lines[0].startswith("# ") and lines[1].startswith("∅ 1 ")


def test_invalid_and_cap_exits(outdir, capsys):
    assert run(["gen", "--n", "100", "--beta", "0.3", "--gamma", "0.4"]) == EXIT_INVALID
    err = json.loads(capsys.readouterr().err.strip())
    assert err["error"] == "invalid_parameters" and err["exit"] == EXIT_INVALID
    big = outdir / "path.txt"
    big.write_text("300 0.1 0.2 cl\n" + "".join(f"{i} {i + 1}\n" for i in range(1, 300)))
    assert run(["exact", "--graph", str(big)]) == EXIT_CAP
    assert run(["exact", "--graph", str(outdir / "missing.txt")]) == EXIT_INVALID


def test_validate(capsys):
    assert run(["validate", "--n", "100", "--beta", "0.3", "--gamma", "0.4"]) == EXIT_INVALID
    diags = json.loads(capsys.readouterr().out)["diagnostics"]
    assert any("not subcritical" in d for d in diags)
    assert run(["validate", "--gamma", "0.5"]) == EXIT_INVALID
    assert any("K_gamma undefined" in d for d in json.loads(capsys.readouterr().out)["diagnostics"])
    assert run(["validate", "--n", "100", "--beta", "0.1", "--gamma", "0.4", "--grid", "512:16384:x2"]) == 0
    assert json.loads(capsys.readouterr().out)["diagnostics"] == []


def test_scaling_is_byte_identical(outdir):
    argv = ["scaling", "--dynamics", "discursive", "--theta", "0", "--gamma", "0.4", "--beta", "0.1",
            "--grid", "64:512:x2", "--reps", "50", "--seed", "1", "--n-boot", "100"]
    assert run(argv + ["--out", "a"]) == 0
    assert run(argv + ["--out", "b", "--threads", "4"]) == 0
    for sfx in (".csv", ".json"):
        a, b = (outdir / f"a{sfx}").read_text(), (outdir / f"b{sfx}").read_text()
        # out and threads are not part of the echoed config
        assert a == b
    doc = load(outdir / "a.json")
    assert doc["result"]["verdict"] in ("pass", "fail") and "slope" in doc["result"]


def test_module_entry_point(outdir):
    res = subprocess.run([sys.executable, "-m", "irgvoter", "validate", "--gamma", "0.3"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["diagnostics"] == []
