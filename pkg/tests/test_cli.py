import json

import numpy as np
import pytest

from ncpainleve.cli import main


def run(tmp_path, argv, config=None, name="out.json"):
    out = tmp_path / name
    args = list(argv) + ["--out", str(out)]
    if config is not None:
        cfg = tmp_path / ("cfg_" + name)
        cfg.write_text(json.dumps(config))
        args += ["--config", str(cfg)]
    code = main(args)
    return code, out.read_text() if out.exists() else ""


def points(state):
    return [np.array([complex(*c) for c in p]) for p in state["D"] + state["P"]]


def test_orbit_zero_steps(tmp_path):
    code, text = run(tmp_path, ["orbit", "--seed", "3"], {"word": "a(1,2)", "steps": 0})
    lines = text.splitlines()
    assert code == 0 and len(lines) == 1
    rec = json.loads(lines[0])
    assert rec["step"] == 0 and rec["pass"] is True and len(rec["inputs"]) == 16


def test_orbit_deterministic(tmp_path):
    cfg = {"word": "a(1,2) s3", "steps": 5}
    _, a = run(tmp_path, ["orbit", "--seed", "7"], cfg, "a.jsonl")
    _, b = run(tmp_path, ["orbit", "--seed", "7"], cfg, "b.jsonl")
    _, c = run(tmp_path, ["orbit", "--seed", "8"], cfg, "c.jsonl")
    assert a == b and a != c


def test_orbit_word_and_inverse(tmp_path):
    code, text = run(tmp_path, ["orbit", "--seed", "3"], {"word": "a(1,2) a(2,1)", "steps": 2})
    recs = [json.loads(line) for line in text.splitlines()]
    assert code == 0 and len(recs) == 3
    for x, y in zip(points(recs[0]["state"]), points(recs[2]["state"])):
        # compare projectively
        assert np.linalg.norm(np.cross(x, y)) < 1e-6 * np.linalg.norm(x) * np.linalg.norm(y)


def test_check_single_suite(tmp_path):
    code, text = run(tmp_path, ["check", "weyl-relations"])
    data = json.loads(text)
    assert code == 0 and data["passed"]
    assert "seconds" not in data["suites"][0]["info"]


def test_check_tolerance_override_fails(tmp_path):
    code, text = run(tmp_path, ["check", "sklyanin-calibration", "--tol", "1e-30"])
    assert code == 1 and json.loads(text)["passed"] is False


def test_usage_errors(tmp_path, capsys):
    assert main(["check", "no-such-suite"]) == 2
    assert json.loads(capsys.readouterr().err.strip())["error"] == "usage"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"word": "s1", "bogus": 1}))
    assert main(["orbit", "--config", str(bad)]) == 2
    assert main(["orbit", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["orbit", "--precision", "quad"]) == 2
    assert main([]) == 2


def test_sklyanin_info(tmp_path):
    code, text = run(tmp_path, ["sklyanin-info", "--seed", "1"])
    data = json.loads(text)
    assert code == 0
    assert {"cubic", "t", "theta"} <= set(data)
    assert len(data["cubic"]) == 10 and data["theta_kernel_dimension"] == 1


def test_sheaf_s0(tmp_path):
    code, text = run(tmp_path, ["sheaf-s0"])
    data = json.loads(text)
    assert code == 0 and data["pass"] and data["case"]["case"] == "generic"
    assert data["cross_oracle_distance"] < 1e-5 and data["roundtrip_distance"] < 1e-5
    assert len(data["new_params"]) == 9


def test_pairing(tmp_path):
    code, text = run(tmp_path, ["pairing"])
    data = json.loads(text)
    assert code == 0
    assert len(data["support"]) == 9 and len(data["residues"]) == 9


def test_toy_default_and_config(tmp_path):
    code, text = run(tmp_path, ["toy"])
    data = json.loads(text)
    assert code == 0 and data["report"]["roots_after"] == [["2/3", 1]]
    # rows are powers of y: (x - 1)(x - 2) + y
    cfg = {"f": [["2", "-3", "1"], ["1"]], "s": "1", "hbar": "1/3"}
    code, text = run(tmp_path, ["toy"], cfg, "toy2.json")
    data = json.loads(text)
    assert code == 0 and data["report"]["roots_after"] == [["2", 1], ["2/3", 1]]
