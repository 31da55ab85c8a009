import csv
import io
import json

import pytest
from gmpy2 import mpq

from negser import sweep
from negser.cli import main
from negser.numeric import float_domain, parse_scalar
from negser.sweep import SweepConfig, report_csv, run_sweep, summary_json
from negser.theorem import Verdict, d1_closed_form, parse_instance_file


def write_instance(tmp_path, name="golden", **body):
    body.setdefault("c", ["2", "1"])
    body.setdefault("mu", ["1/2", "1/2"])
    body.setdefault("order", 3)
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(body))
    return str(path)


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_coeffs_golden(tmp_path, capsys):
    assert main(["coeffs", write_instance(tmp_path)]) == 0
    assert capsys.readouterr().out == "j,D_j\n1,3/2\n2,1/8\n3,3/16\n"


def test_coeffs_order_one_is_d1(tmp_path, capsys):
    path = write_instance(tmp_path, c=["5", "3", "1/2"], mu=["1/4", "1/4", "1/2"])
    assert main(["coeffs", path, "--order", "1"]) == 0
    out = rows(capsys.readouterr().out)
    assert out[1:] == [["1", str(d1_closed_form(parse_instance_file(path)))]]


def test_coeffs_float_output(tmp_path, capsys):
    out_file = tmp_path / "d.csv"
    assert main(["coeffs", write_instance(tmp_path), "--domain", "float", "--out", str(out_file)]) == 0
    assert capsys.readouterr().out == ""
    dom = float_domain(128)
    vals = [parse_scalar(r[1], dom) for r in rows(out_file.read_text())[1:]]
    with dom.arith():
        for got, want in zip(vals, (mpq(3, 2), mpq(1, 8), mpq(3, 16))):
            assert abs(got - want) <= mpq(1, 10**30)


def test_verify_pass(tmp_path, capsys):
    assert main(["verify", write_instance(tmp_path)]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["status"] == "pass" and body["first_failure"] is None


def test_verify_excluded_case_warns(tmp_path, capsys, caplog):
    path = write_instance(tmp_path, c=["3"], mu=["1"], order=5)
    assert main(["verify", path]) == 0
    captured = capsys.readouterr()
    body = json.loads(captured.out)
    assert body["status"] == "excluded case" and "warning" in body
    assert "excluded case" in caplog.text


def test_verify_reports_failing_index(tmp_path, capsys):
    override = tmp_path / "d.json"
    override.write_text(json.dumps(["3/2", "-1/8", "3/16"]))
    assert main(["verify", write_instance(tmp_path), "--d-override", str(override)]) == 1
    body = json.loads(capsys.readouterr().out)
    assert body["status"] == "fail" and body["first_failure"] == 2


@pytest.mark.parametrize("body, code", [
    ({"c": ["1", "2"]}, "ordering"),
    ({"mu": ["1/2", "2/3"]}, "rho_exceeds_one"),
    ({"c": ["2", "-1"]}, "nonpositive_c"),
    ({"mu": ["1/2", "1/x"]}, "malformed_rational"),
    ({"extra": 1}, "schema"),
])
def test_invalid_instances_exit_2(tmp_path, capsys, body, code):
    assert main(["coeffs", write_instance(tmp_path, **body)]) == 2
    assert f"error[{code}]" in capsys.readouterr().err


def test_missing_file_exits_3(tmp_path, capsys):
    assert main(["verify", str(tmp_path / "nope.json")]) == 3
    assert "I/O error" in capsys.readouterr().err


def test_bad_arguments_exit_2(tmp_path, capsys):
    assert main(["frobnicate"]) == 2
    assert main(["analyze-cn", write_instance(tmp_path), "--m-range", "3"]) == 2
    assert main(["perturb", write_instance(tmp_path)]) == 2


def test_analyze_cn_golden(tmp_path, capsys):
    path = write_instance(tmp_path, c=["1", "1/2"], order=4)
    assert main(["analyze-cn", path, "--m-range", "1..4"]) == 0
    out = rows(capsys.readouterr().out)
    assert out[0][:4] == ["instance_id", "m", "endpoint_sign_0", "endpoint_sign_prev"]
    by_m = {int(r[1]): r for r in out[1:]}
    assert by_m[1][2:5] == ["-1", "-1", "none"]
    assert by_m[2][2:] == ["-1", "0", "none", "1/8", "1/8", "true"]
    assert all(r[4] == "none" and r[-1] == "true" for r in out[2:])


def test_analyze_cn_three_factor_signs(tmp_path, capsys):
    path = write_instance(tmp_path, c=["3", "2", "1"], mu=["1/3", "1/3", "1/3"], order=8)
    assert main(["analyze-cn", path]) == 0
    out = rows(capsys.readouterr().out)[1:]
    assert len(out) == 8
    assert all(r[2:5] == ["-1", "-1", "none"] for r in out)


def test_perturb_golden(tmp_path, capsys):
    path = write_instance(tmp_path, c=["1", "1/2"], order=4)
    assert main(["perturb", path, "--m", "2", "--eps-ladder", "10,3"]) == 0
    out = rows(capsys.readouterr().out)
    head = out[0]
    recs = [dict(zip(head, r)) for r in out[1:]]
    assert len(recs) == 3
    for r in recs:
        assert r["rate"] == r["bound_rate"] == "1/8"
        assert r["satisfied"] == "true"


def test_perturb_rejects_m1(tmp_path, capsys):
    assert main(["perturb", write_instance(tmp_path), "--m", "1"]) == 2


def test_sweep_writes_reports(tmp_path):
    out = tmp_path / "run"
    assert main(["sweep", "--count", "8", "--order", "12", "--seed", "3", "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["failures"] == 0 and summary["instances"] == 8
    assert len(rows((out / "report.csv").read_text())) == 9
    assert not (out / "reproducers").exists()


def test_sweep_is_byte_identical(tmp_path):
    args = ["sweep", "--count", "6", "--order", "10", "--n-range", "2..4", "--seed", "11"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--workers", "2"]) == 0
    for name in ("report.csv", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_sweep_matches_library(tmp_path):
    out = tmp_path / "run"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"count": 5, "order": 9, "seed": 4, "rho_mode": "random"}))
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    result = run_sweep(SweepConfig(count=5, order=9, seed=4, rho_mode="random"), workers=1)
    assert (out / "report.csv").read_text() == report_csv(result)
    assert (out / "summary.json").read_text() == summary_json(result)


def test_sweep_writes_reproducers_on_failure(tmp_path, monkeypatch):
    def fake(D, tol=None):
        ok = D.source.label != "sweep-1"
        return Verdict(ok, None if ok else 2, 2, D.d[1], D.order, True)

    monkeypatch.setattr(sweep, "verify_positivity", fake)
    out = tmp_path / "run"
    args = ["sweep", "--count", "3", "--order", "6", "--workers", "1", "--out", str(out)]
    assert main(args) == 1
    repro = sorted(p.name for p in (out / "reproducers").iterdir())
    assert repro == ["instance-1.json"]
    inst = parse_instance_file(out / "reproducers" / "instance-1.json")
    assert inst.rho == 1 and inst.order == 6


def test_sweep_bad_config_exits_2(tmp_path):
    assert main(["sweep", "--count", "0", "--out", str(tmp_path / "x")]) == 2
    assert main(["sweep", "--rho", "3/2", "--out", str(tmp_path / "x")]) == 2
