import json
import subprocess
import sys

import numpy as np
import pytest

from critcluster.cli import EXIT_OK, EXIT_USAGE, SCHEMA, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["schema"] == SCHEMA and "version" in doc and "seed" in doc and "tolerances" in doc
    return doc


def test_list(capsys):
    code, out, _ = run(capsys, "list")
    assert code == 0 and len(out.strip().splitlines()) >= 13
    code, out, _ = run(capsys, "list", "--kind", "ball")
    names = [ln.split()[0] for ln in out.strip().splitlines()]
    assert names == ["I12", "A66", "necklace12", "FCC", "HCP", "T3", "flex5"]


def test_list_json(capsys):
    code, out, _ = run(capsys, "list", "--json")
    rows = json.loads(out)["clusters"]
    assert code == 0 and {"o6", "gamma", "c6_family", "octahedron"} <= {r["name"] for r in rows}


def test_verify_o6(capsys):
    doc = run_json(capsys, "verify", "--cluster", "o6", "--probe-samples", "300")
    assert abs(doc["D"] - 1) < 1e-12 and abs(doc["radius"] - 1) < 1e-12
    a = doc["analysis"]
    assert a["is_critical"] and a["null_index_mod_so3"] == 6
    assert a["certificate"] == "certified_max" and a["margin"] > 0
    assert doc["probe"]["above_base"] == 0


def test_verify_gamma_midpoint(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "verify", "--cluster", "gamma", "--x", "1/2",
                       "--report", str(path), "--probe-samples", "300")
    assert code == 0 and out.strip() == str(path)
    doc = json.loads(path.read_text())
    assert abs(doc["D"] - np.sqrt(12 / 11)) < 1e-12
    assert abs(doc["radius"] - (3 + np.sqrt(33)) / 8) < 1e-12
    assert doc["analysis"]["null_index_mod_so3"] == 4


def test_verify_fcc(capsys):
    doc = run_json(capsys, "verify", "--cluster", "FCC", "--probe-samples", "800")
    assert abs(doc["delta"] - 1) < 1e-12
    assert doc["analysis"]["is_critical"] and doc["analysis"]["null_index_mod_so3"] == 1
    assert doc["unlock"]["fixed_count"] == 6


def test_verify_parallel_cluster_is_inconclusive(capsys):
    doc = run_json(capsys, "verify", "--cluster", "c6", "--probe-samples", "100")
    assert doc["analysis"]["inconclusive"] and "parallel" in doc["analysis"]["reason"]


@pytest.mark.parametrize("argv", [
    ["verify", "--cluster", "D20"],
    ["verify", "--cluster", "gamma"],
    ["verify", "--cluster", "gamma", "--x", "0"],
    ["sweep", "--solid", "octahedron", "--from", "1", "--to", "0.5"],
    ["sweep", "--family", "gamma", "--samples", "1"],
    ["optimize", "--family", "c6", "--start", "a,b"],
    ["galois", "--x", "one half"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_USAGE and err


def test_argparse_errors_exit_2(capsys):
    assert main(["frobnicate"]) == EXIT_USAGE


def parse_csv(text):
    rows = [ln for ln in text.splitlines() if not ln.startswith("#")]
    ext = [ln.split(",") for ln in text.splitlines() if ln.startswith("# extremum")]
    return rows[0].split(","), np.array([[float(v) for v in r.split(",")] for r in rows[1:]]), ext


def test_sweep_gamma_csv(capsys):
    code, out, _ = run(capsys, "sweep", "--family", "gamma", "--samples", "1000")
    header, data, ext = parse_csv(out)
    assert header == ["x", "phi", "delta", "kappa", "D", "radius"] and len(data) == 1000
    k = int(np.argmax(data[:, 4]))
    assert abs(data[k, 0] - 0.5) < 1e-12 and abs(data[k, 4] - 1.0444659) < 1e-7
    assert ext[0][:2] == ["# extremum", "max"] and float(ext[0][2]) == data[k, 0]
    # 17 significant digits give exact round trips
    first = out.splitlines()[1].split(",")
    assert all(float(repr(float(v))) == float(v) for v in first)
    assert float(first[4]) == data[0, 4]


def test_sweep_solids(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", "--solid", "tetrahedron", "--from", "0", "--to", "1.5708",
                       "--samples", "2000")
    _, data, ext = parse_csv(out)
    k = int(np.argmax(data[:, 1]))
    assert abs(data[k, 0] - np.pi / 4) < 1e-3 and abs(data[k, 1] - 1) < 1e-6
    svg = tmp_path / "o.svg"
    code, out, _ = run(capsys, "sweep", "--solid", "octahedron", "--from", "0", "--to", "1.5708",
                       "--samples", "500", "--out", str(tmp_path / "o.csv"), "--svg", str(svg))
    text = (tmp_path / "o.csv").read_text()
    mins = [e for e in parse_csv(text)[2] if e[1] == "min"]
    assert any(abs(float(e[2]) - np.arctan(np.sqrt(2))) < 1e-6 and float(e[3]) < 1e-9 for e in mins)
    s = svg.read_text()
    assert s.startswith("<svg") and "<polyline" in s and "<circle" in s


def test_optimize_family(capsys):
    doc = run_json(capsys, "optimize", "--family", "c6", "--start", "0.1,0.1,-0.05")
    assert doc["converged"] and abs(doc["value"] - np.sqrt(12 / 11)) < 1e-8


def test_optimize_o6_full(capsys):
    doc = run_json(capsys, "optimize", "--cluster", "o6", "--full", "--budget", "100000")
    assert doc["verdict"] == "no improvement"


def test_galois(capsys):
    doc = run_json(capsys, "galois", "--x", "1/2", "--den-bound", "10000000")
    assert doc["verdict"] == "symmetric" and not doc["symmetric_under_sigma_alone"]
    doc = run_json(capsys, "galois", "--x", "1/2", "--den-bound", "1000")
    assert doc["verdict"] == "inconclusive" and doc["failures"]


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("CRITCLUSTER_SEED", "17")
    assert run_json(capsys, "galois", "--x", "1/3", "--den-bound", "1000000000")["seed"] == 17
    assert run_json(capsys, "galois", "--x", "1/3", "--seed", "5")["seed"] == 5


def test_verify_deterministic_under_seed(capsys):
    a = run_json(capsys, "verify", "--cluster", "gamma", "--x", "1/2", "--probe-samples", "200", "--seed", "3")
    b = run_json(capsys, "verify", "--cluster", "gamma", "--x", "1/2", "--probe-samples", "200", "--seed", "3")
    assert a == b


def test_console_script_writes_identical_csv(tmp_path):
    outs = []
    for k in range(2):
        p = tmp_path / f"s{k}.csv"
        subprocess.run([sys.executable, "-m", "critcluster", "sweep", "--family", "gamma",
                        "--samples", "200", "--out", str(p)], check=True, capture_output=True)
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
