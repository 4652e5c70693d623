import json
import math
import subprocess
import sys

import numpy as np
import pytest

from nlsefam import Params, export
from nlsefam.cli import main
from nlsefam.verify import h_ode_residual_samples

EX1 = ["--a", "1", "--c1", "2", "--c2", "0.25", "--c3", "1"]
EX2 = EX1 + ["--h0", "1"]
EX3 = ["--a", "0.125", "--c1", "1", "--c2", "0.5", "--c3", "1"]
C2S = ["--a", str(4 / 3), "--c1", "2", "--c2", "0.25", "--c3", str(8 / 9)]
SMALL = ["--grid", "-3,3,61,-3,3,61"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_text_and_json(capsys):
    code, out, _ = run(capsys, "classify", *EX1)
    assert code == 0 and out.startswith("class: HyperbolicC2")
    code, out, _ = run(capsys, "classify", *EX1, "--format", "json")
    doc = json.loads(out)
    assert doc["class"] == "HyperbolicC2" and doc["schema_version"] == export.SCHEMA_VERSION
    assert doc["R1"]["structure"] == "simple+double"
    assert doc["K"]["admissible01"] or doc["K"]["admissible03"]
    code, out, _ = run(capsys, "classify", *C2S, "--format", "json")
    assert json.loads(out)["class"] == "RationalC2star"


def test_invalid_input(capsys):
    code, _, err = run(capsys, "classify", "--a", "0", "--c1", "2", "--c2", "0.25", "--c3", "1")
    assert code == 2 and "error" in err
    assert run(capsys, "classify", "--grid", "1,2,3")[0] == 2
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "verify", *EX1, "--checks", "T,bogus")[0] == 2
    assert run(capsys, "classify", "--help")[0] == 0


def test_config_file_and_unknown_keys(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"params": {"a": 0.125, "c1": 1, "c2": 0.5, "c3": 1},
                                "output": {"format": "json"}}))
    code, out, _ = run(capsys, "classify", "--config", str(good))
    assert code == 0 and json.loads(out)["params"]["a"] == 0.125
    # command-line values override the file
    code, out, _ = run(capsys, "classify", "--config", str(good), "--a", "1", "--c1", "2",
                       "--c2", "0.25")
    assert json.loads(out)["params"]["a"] == 1.0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"params": {"a": 1, "c1": 2, "c2": 0.25, "c3": 1, "k": 3}}))
    code, _, err = run(capsys, "classify", "--config", str(bad))
    assert code == 2 and "unknown" in err
    bad.write_text(json.dumps({"extras": {}}))
    assert run(capsys, "classify", "--config", str(bad))[0] == 2
    assert run(capsys, "classify", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_build_h_value(tmp_path, capsys):
    path = tmp_path / "h.csv"
    code, _, _ = run(capsys, "build", "h", *EX1, "--grid", "0,1,2,-3,3,601", "--out", str(path))
    assert code == 0
    with open(path) as fh:
        meta, cols, data = export.read_csv(fh)
    assert cols == ["z", "value"] and meta["schema_version"] == 1 and meta["what"] == "h"
    i = int(np.argmin(np.abs(data["z"] - 1.0)))
    assert data["value"][i] == pytest.approx(math.sinh(1) ** 2 / math.cosh(2), rel=1e-13)


def test_build_json_and_psi(capsys):
    code, out, _ = run(capsys, "build", "f", *EX1, "--grid", "-1,1,3,-1,1,3", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["columns"] == ["t", "z", "value"] and len(doc["data"]["t"]) == 9
    code, out, _ = run(capsys, "build", "psi", *EX1, "--grid", "-1,1,3,-1,1,3")
    assert code == 0 and out.splitlines()[1] == "t,z,re,im"


def test_phase_diagram_zeros(capsys):
    code, out, _ = run(capsys, "build", "phase_diagram", *EX1, "--format", "json")
    doc = json.loads(out)
    h, r = np.array(doc["data"]["h"]), np.array(doc["data"]["R1"])
    for root in (0.0, 0.5, 1.0):
        i = int(np.argmin(np.abs(h - root)))
        assert h[i] == pytest.approx(root, abs=1e-12) and abs(r[i]) < 1e-12


def test_unsupported_objects(capsys):
    code, _, err = run(capsys, "build", "psi", *C2S, *SMALL)
    assert code == 3 and "unsupported" in err
    # generic elliptic parameters offer h only
    generic = ["--a", "1", "--c1", "2", "--c2", "1", "--c3", "1"]
    assert run(capsys, "build", "f", *generic, *SMALL)[0] == 3
    assert run(capsys, "build", "h", *generic, *SMALL)[0] == 0
    assert run(capsys, "verify", *C2S, *SMALL, "--checks", "nlse")[0] == 3


def test_verify_example1_passes(capsys):
    code, out, _ = run(capsys, "verify", *EX1)
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert set(doc["results"]) == {"T", "hode", "fode", "nlse", "drift"}
    assert doc["results"]["T"]["max_abs"] < 1e-6


def test_verify_example2_expected_failure(capsys):
    code, out, _ = run(capsys, "verify", *EX2, "--checks", "T")
    assert code == 1 and json.loads(out)["results"]["T"]["max_abs"] > 0.1
    code, out, _ = run(capsys, "verify", *EX2, "--checks", "T", "--expect-failure")
    assert code == 0 and json.loads(out)["expect_failure"]


def test_verify_example3_t(capsys):
    code, out, _ = run(capsys, "verify", *EX3, "--checks", "T")
    assert code == 0 and json.loads(out)["results"]["T"]["max_abs"] < 1e-6


def test_csv_round_trip_reverifies_identically(tmp_path, capsys):
    path = tmp_path / "h.csv"
    argv = ["--grid", "0,1,2,-3,3,301"]
    assert run(capsys, "build", "h", *EX1, *argv, "--out", str(path))[0] == 0
    code, out1, _ = run(capsys, "verify", *EX1, "--from", str(path))
    code2, out2, _ = run(capsys, "verify", *EX1, "--from", str(path))
    assert code == code2 == 0 and out1 == out2
    # the file reproduces the in-memory samples bit for bit
    from nlsefam import build_bundle
    p = Params(1.0, 2.0, 0.25, 1.0)
    z = np.linspace(-3, 3, 301)
    direct = h_ode_residual_samples(z, build_bundle(p).h(z), p).to_dict()
    assert json.loads(out1)["results"]["hode"] == export.jsonable(direct)


def test_verify_from_rejects_other_tables(tmp_path, capsys):
    path = tmp_path / "f.csv"
    run(capsys, "build", "phi", *EX1, "--out", str(path))
    assert run(capsys, "verify", *EX1, "--from", str(path))[0] == 2


def test_scan_deterministic(tmp_path, capsys):
    argv = ["scan", "--budget", "6", "--seed", "4", *SMALL]
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert run(capsys, *argv, "--out", str(a))[0] == 0
    assert run(capsys, *argv, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert json.loads(lines[0])["schema_version"] == 1
    recs = [json.loads(x) for x in lines[1:-1]]
    assert [r["verdict"] for r in recs[:4]] == ["Vanishing", "NonVanishing", "Vanishing", "Vanishing"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nlsefam", "classify", *EX1],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "HyperbolicC2" in proc.stdout
