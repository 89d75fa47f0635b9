import csv
import io
import json
import math

import numpy as np
import pytest

from wnl.bollobas import normalize_v_with_result
from wnl.cli import main
from wnl.constants import delta_N
from wnl.norms import OptimizerConfig
from wnl.polynomial import constant, functional_power, random_diagonal
from wnl.space import Functional, LpSpace

FAST = ["--restarts", "8"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path):
    sp = LpSpace(4, 2)
    f2 = functional_power(Functional(np.eye(4)[0], sp), 2)
    (tmp_path / "f2.json").write_text(f2.to_json())
    (tmp_path / "c.json").write_text(constant(sp, 3 - 4j).to_json())
    P, res = normalize_v_with_result(random_diagonal(sp, 2, np.random.default_rng(0)), OptimizerConfig(restarts=8))
    (tmp_path / "p.json").write_text(P.to_json())
    (tmp_path / "x.json").write_text(json.dumps([[z.real, z.imag] for z in res.witness.coords]))
    return tmp_path


def test_constants_json_and_csv(capsys):
    code, out, _ = run(capsys, "constants", "--N-max", "2")
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == "1"
    assert doc["columns"] == ["N", "delta_N", "s_N", "s_half_N", "M_N"]
    assert doc["rows"][1]["delta_N"] == 0.25
    code, out_csv, _ = run(capsys, "constants", "--N-max", "2", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out_csv)))
    assert list(rows[0]) == doc["columns"]
    for r, j in zip(rows, doc["rows"]):
        assert {k: float(v) for k, v in r.items()} == {k: float(v) for k, v in j.items()}


def test_norm(capsys, files):
    code, out, _ = run(capsys, "norm", "--poly", str(files / "f2.json"), "--kind", "v", *FAST)
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == "1"
    assert doc["value"] == pytest.approx(0.25, abs=1e-9)
    _, out, _ = run(capsys, "norm", "--poly", str(files / "c.json"), "--kind", "v", *FAST)
    assert json.loads(out)["value"] == pytest.approx(5)
    _, out2, _ = run(capsys, "norm", "--poly", str(files / "f2.json"), "--kind", "v", *FAST)
    _, out3, _ = run(capsys, "norm", "--poly", str(files / "f2.json"), "--kind", "v", *FAST)
    assert out2 == out3
    _, out, _ = run(capsys, "norm", "--poly", str(files / "f2.json"), "--kind", "s", "--s", "0.5", *FAST)
    assert json.loads(out)["value"] == pytest.approx(0.25)


def test_norm_usage_errors(capsys, files, tmp_path):
    assert run(capsys, "norm", "--poly", str(files / "f2.json"), "--kind", "s")[0] == 64
    assert run(capsys, "norm", "--poly", str(tmp_path / "missing.json"))[0] == 64
    (tmp_path / "bad.json").write_text("{}")
    assert run(capsys, "norm", "--poly", str(tmp_path / "bad.json"))[0] == 64
    assert run(capsys, "norm", "--poly", str(files / "f2.json"), "--space", "3,2")[0] == 64
    assert run(capsys, "norm")[0] == 64
    assert run(capsys, "nonsense")[0] == 64


def test_counterexample_Q(capsys):
    code, out, _ = run(capsys, "counterexample", "--family", "Q", "--k", "2", "--p", "2", "--n-trunc", "16", *FAST)
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert doc["rows"][0]["numeric"] == pytest.approx(2, abs=1e-6)


def test_counterexample_fN_csv(capsys):
    code, out, _ = run(capsys, "counterexample", "--family", "fN", "--N", "3", "--format", "csv", *FAST)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["s", "numeric", "exact", "gap", "escape_index"]
    code, out, _ = run(capsys, "counterexample", "--family", "fN", "--N", "3", *FAST)
    assert json.loads(out)["v_norm"] == pytest.approx(delta_N(3), abs=1e-6)


def test_counterexample_domain_error(capsys):
    code, _, err = run(capsys, "counterexample", "--family", "Pr", "--k", "1", "--p", "2")
    assert code == 2 and "OutOfDomain" in err


def test_bollobas(capsys, files):
    code, out, _ = run(capsys, "bollobas", "--poly", str(files / "p.json"), "--x", str(files / "x.json"), "--eps", "0.1", *FAST)
    lines = [json.loads(s) for s in out.splitlines()]
    assert code == 0
    assert all(d["schema"] == "1" for d in lines)
    assert lines[-1]["kind"] == "verdict" and lines[-1]["passed"]
    assert lines[0]["kind"] == "iteration"


def test_bollobas_faithful(capsys, files):
    code, out, _ = run(
        capsys, "bollobas", "--poly", str(files / "p.json"), "--x", str(files / "x.json"), "--eps", "0.05", "--mode", "faithful", *FAST
    )
    lines = [json.loads(s) for s in out.splitlines()]
    assert code == 0 and len(lines) >= 2 and lines[-1]["passed"]


def test_bollobas_errors(capsys, files, tmp_path):
    assert run(capsys, "bollobas", "--poly", str(files / "p.json"))[0] == 64
    (tmp_path / "far.json").write_text(json.dumps([0.1, 0, 0, 0]))
    code, _, err = run(capsys, "bollobas", "--poly", str(files / "p.json"), "--x", str(tmp_path / "far.json"), *FAST)
    assert code == 2 and "HypothesisViolated" in err
    (tmp_path / "short.json").write_text("[1, 2]")
    assert run(capsys, "bollobas", "--poly", str(files / "p.json"), "--x", str(tmp_path / "short.json"))[0] == 64


def test_verify_filter_and_exit_codes(capsys):
    code, out, err = run(capsys, "verify", "--filter", "constants")
    doc = json.loads(out)
    assert code == 0 and doc["failed"] == 0
    assert {r["name"] for r in doc["results"]} == {"constants.delta_grid", "constants.s_alpha_identity", "constants.mu_increasing"}
    assert "PASS constants.delta_grid" in err
    code, out, err = run(capsys, "verify", "--filter", "Pr_upper_bound")
    assert code == 1 and "FAIL counterexamples.Pr_upper_bound" in err


def test_verify_is_deterministic(capsys):
    a = run(capsys, "verify", "--filter", "space,polynomial.contraction,polynomial.drift,norms.scaling")[1]
    b = run(capsys, "verify", "--filter", "space,polynomial.contraction,polynomial.drift,norms.scaling")[1]
    assert a == b


def test_config_and_env(capsys, files, tmp_path, monkeypatch):
    cfgf = tmp_path / "cfg.json"
    cfgf.write_text(json.dumps({"seed": 5, "kind": "sup", "restarts": 8}))
    _, out, _ = run(capsys, "norm", "--poly", str(files / "f2.json"), "--config", str(cfgf))
    doc = json.loads(out)
    assert doc["seed"] == 5 and doc["mode"] == "sup"
    _, out, _ = run(capsys, "norm", "--poly", str(files / "f2.json"), "--config", str(cfgf), "--seed", "9")
    assert json.loads(out)["seed"] == 9
    monkeypatch.setenv("WNL_SEED", "3")
    _, out, _ = run(capsys, "norm", "--poly", str(files / "f2.json"), "--kind", "sup", *FAST)
    assert json.loads(out)["seed"] == 3
    cfgf.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "norm", "--poly", str(files / "f2.json"), "--config", str(cfgf))[0] == 64
    monkeypatch.setenv("WNL_SEED", "x")
    assert run(capsys, "constants")[0] == 64


def test_output_file(capsys, tmp_path):
    path = tmp_path / "t.json"
    code, out, _ = run(capsys, "constants", "--N-max", "1", "--output", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["rows"][0]["N"] == 1


def test_p_infinity_is_serialised(capsys, tmp_path):
    sp = LpSpace(2, math.inf)
    (tmp_path / "q.json").write_text(constant(sp, 2).to_json())
    code, out, _ = run(capsys, "norm", "--poly", str(tmp_path / "q.json"), "--kind", "sup", *FAST)
    assert code == 0 and json.loads(out)["value"] == pytest.approx(2)
