import json
import math
import shutil
from pathlib import Path

import pytest

from geofix import cli
from geofix.errors import NumericFailure

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize(
    "args, expected",
    [
        (["ap", "--eps", "0.1", "--b", "1"], "100"),
        (["ap", "--eps", "3", "--b", "1"], "0"),
        (["firmly", "--eps", "1", "--b", "1", "--lambda", "0.5"], "23856"),
        (["averaged", "--eps", "1", "--b", "1", "--lambda", "0.5"], "3228"),
        (["parallel", "--eps", "0.5", "--b", "1", "--lambdas", "0.5,0.5", "--alphas", "0.5,0.5"], "512"),
        (["parallel-refined", "--eps", "0.5", "--b", "1", "--K", "0.125"], "128"),
        (["lp", "--eps", "0.5", "--b", "1", "--p", "4", "--K", "0.125"], "4096"),
        (["parallel-refined", "--eps", "0.5", "--b", "1", "--K", "0.125", "--modulus", "lp:4"], "4096"),
    ],
)
def test_rate(args, expected, capsys):
    code, out, _ = run(["rate", *args], capsys)
    assert code == 0 and out.strip() == expected


def test_rate_saturates(capsys):
    code, out, _ = run(["rate", "averaged", "--eps", "0.001", "--b", "1", "--lambda", "0.5"], capsys)
    assert code == 0 and out.startswith("saturated(≈10^1307")


@pytest.mark.parametrize(
    "args",
    [
        ["firmly", "--eps", "1", "--b", "1"],
        ["ap", "--eps", "-1", "--b", "1"],
        ["lp", "--eps", "1", "--b", "1", "--K", "0.1"],
        ["parallel", "--eps", "1", "--b", "1"],
        ["averaged", "--eps", "1", "--b", "1", "--lambda", "1.5"],
    ],
)
def test_rate_usage_errors(args, capsys):
    code, _, err = run(["rate", *args], capsys)
    assert code == 2 and err.startswith("error:")


def test_check_passes(tmp_path, capsys):
    code, out, _ = run(["check", "--space", "euclidean:2", "--props", "w-axioms,cn,ptolemy", "-n", "2000",
                        "--out", str(tmp_path)], capsys)
    assert code == 0
    assert out.count("PASS") == 6
    data = json.loads((tmp_path / "reports.json").read_text())
    assert [r["property"] for r in data["reports"]] == ["W1", "W2", "W3", "W4", "cn", "ptolemy"]


def test_check_cn_fails_in_l4(tmp_path, capsys):
    path = tmp_path / "cn.json"
    code, out, _ = run(["check", "--space", "lp:4:3", "--props", "cn", "-n", "2000", "--out", str(path)], capsys)
    assert code == 1 and out.startswith("FAIL cn")
    rep = json.loads(path.read_text())["reports"][0]
    assert not rep["passed"] and len(rep["witness"]) == 4


@pytest.mark.parametrize(
    "args",
    [
        ["--space", "euclidean:2", "--props", "nosuch"],
        ["--space", "hyperbolic:7"],
    ],
)
def test_check_usage_errors(args, capsys):
    assert run(["check", *args, "-n", "10"], capsys)[0] == 2


def test_missing_arguments_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["check"])
    assert exc.value.code == 2


def test_run_ap_halfplanes(tmp_path, capsys):
    code, out, _ = run(["run", "--config", str(CONFIGS / "ap_halfplanes.json"), "--out", str(tmp_path)], capsys)
    assert code == 0
    assert {p.name for p in tmp_path.iterdir()} == {"trace.csv", "trace.json", "certificates.json", "reports.json"}
    certs = json.loads((tmp_path / "certificates.json").read_text())["certificates"]
    # b = d((1, 1), (0, 0)) = sqrt 2, so the bound is floor(2 / eps^2)
    assert [c["bound"]["value"] for c in certs] == [200, 20000]
    assert all(c["observed_index"] <= 2 and c["passes"] for c in certs)
    assert certs[0]["inputs"]["b"] == pytest.approx(math.sqrt(2))


def test_run_parallel_refined(tmp_path, capsys):
    code, _, _ = run(["run", "--config", str(CONFIGS / "parallel_euclidean.json"), "--out", str(tmp_path)], capsys)
    assert code == 0
    c = json.loads((tmp_path / "certificates.json").read_text())["certificates"][0]
    assert c["epsilon"] == 0.5 and c["bound"]["value"] == 128 and c["observed_index"] <= 128


@pytest.mark.parametrize("name", ["parallel_disk.json", "firmly_tree.json"])
def test_run_other_configs(name, tmp_path, capsys):
    code, out, _ = run(["run", "--config", str(CONFIGS / name), "--out", str(tmp_path)], capsys)
    assert code == 0 and "FAIL" not in out
    reports = json.loads((tmp_path / "reports.json").read_text())
    assert reports["periodic_points"] == []
    assert all(r["passed"] for r in reports["reports"])


def test_run_bad_weights(tmp_path, capsys):
    code, _, err = run(["run", "--config", str(CONFIGS / "bad_weights.json"), "--out", str(tmp_path)], capsys)
    assert code == 2 and "error" in err


def test_run_missing_file(tmp_path, capsys):
    assert run(["run", "--config", str(tmp_path / "none.json")], capsys)[0] == 2


def test_run_malformed_json(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    assert run(["run", "--config", str(p)], capsys)[0] == 2


def test_run_certificate_failure(tmp_path, capsys):
    # disjoint half-planes: the gap never drops below 1, the finite bound is violated
    cfg = {
        "space": "euclidean:2",
        "scheme": "alternating_projection",
        "sets": [{"kind": "halfspace", "normal": [1, 0], "offset": 0},
                 {"kind": "halfspace", "normal": [-1, 0], "offset": -1}],
        "x0": [2, 0.7],
        "b": 3,
        "eps": [0.5],
        "n_max": 50,
    }
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg))
    code, out, _ = run(["run", "--config", str(p), "--out", str(tmp_path / "o")], capsys)
    assert code == 1 and "not reached" in out
    rep = json.loads((tmp_path / "o" / "reports.json").read_text())
    assert rep["minimal_displacement_estimate"] == 1


def test_run_numeric_failure(tmp_path, capsys, monkeypatch):
    def boom(cfg):
        raise NumericFailure(17)

    monkeypatch.setattr(cli, "_orbit", boom)
    code, _, err = run(["run", "--config", str(CONFIGS / "ap_halfplanes.json"), "--out", str(tmp_path)], capsys)
    assert code == 3 and "17" in err


def test_run_is_deterministic(tmp_path, capsys, monkeypatch):
    cfg = CONFIGS / "parallel_disk.json"
    for d in ("a", "b"):
        assert run(["run", "--config", str(cfg), "--out", str(tmp_path / d)], capsys)[0] == 0
    monkeypatch.setenv("GEOFIX_SEED", "99")
    assert run(["run", "--config", str(cfg), "--out", str(tmp_path / "c")], capsys)[0] == 0
    for name in ("trace.csv", "trace.json", "certificates.json", "reports.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    # the random start follows the overriding seed
    assert (tmp_path / "a" / "trace.json").read_bytes() != (tmp_path / "c" / "trace.json").read_bytes()


def test_center_on_alternating_trace(tmp_path, capsys):
    trace = {"config": {"space": {"kind": "euclidean", "dim": 1}}, "points": [{"coords": [float(i % 2)]} for i in range(20)]}
    p = tmp_path / "trace.json"
    p.write_text(json.dumps(trace))
    code, out, _ = run(["center", "--trace", str(p), "--space", "euclidean:1", "--tail", "1"], capsys)
    assert code == 0
    res = json.loads(out)
    assert res["center"]["coords"][0] == pytest.approx(0.5, abs=1e-3)
    assert res["radius"] == pytest.approx(0.5, abs=1e-3) and res["tail_length"] == 20


def test_center_after_run(tmp_path, capsys):
    shutil.copy(CONFIGS / "firmly_tree.json", tmp_path / "c.json")
    assert run(["run", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path)], capsys)[0] == 0
    code, out, _ = run(["center", "--trace", str(tmp_path / "trace.json")], capsys)
    assert code == 0
    res = json.loads(out)
    assert res["radius"] <= 0.02
