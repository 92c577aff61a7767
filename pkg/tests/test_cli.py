import io
import json
import subprocess
import sys

import pytest

from nilbohr.cli import ExperimentConfig, ResultRecord, main, run


def run_cfg(kind, **params):
    out, err = io.StringIO(), io.StringIO()
    status = run(ExperimentConfig(kind, params), out, err)
    return status, [json.loads(line) for line in out.getvalue().splitlines()], err.getvalue()


def test_return_set_example():
    status, rows, _ = run_cfg("return-set", d=2, alpha=["1/2", "1/2"], epsilon="3/10", window=[1, 8])
    assert status == 0
    assert [r["n"] for r in rows] == [2, 6, 8]
    assert all(r["op"] == "nil_return_set" for r in rows)


def test_sgd_example():
    status, rows, _ = run_cfg("sgd", P=[1, 2, 4], d=1)
    assert status == 0 and [r["n"] for r in rows] == [1, 2, 3, 4, 6, 7]


def test_verify_power_rows():
    status, rows, err = run_cfg("verify", suite=["power"])
    assert status == 0
    trials = [r for r in rows if "trial" in r]
    assert len(trials) == 6 * 200
    assert {(r["d"], r["trial"]) for r in trials} == {(d, t) for d in range(1, 7) for t in range(200)}
    assert rows[-1]["passed"] is True and rows[-1]["suite"] == "power"
    assert err.startswith("[PASS] power")


def test_verify_failure_exits_one():
    status, rows, err = run_cfg("verify", suite=["containment"])
    assert status == 1
    assert rows[-1]["passed"] is False and "alpha=" in rows[-1]["failure"]


def test_exact_strings_round_trip():
    status, rows, _ = run_cfg("orbit", alpha=["1/3", "-2/7", "5/11"], window="-5:5", floats=True)
    assert status == 0 and len(rows) == 11
    from fractions import Fraction
    for r in rows:
        assert str(Fraction(r["max_abs"])) == r["max_abs"]
        assert r["approx"]["max_abs"] == pytest.approx(float(Fraction(r["max_abs"])))


@pytest.mark.parametrize("kind, params", [
    ("orbit", dict(alpha=["1/3", "-2/7", "5/11"], window="-40:40")),
    ("multi-return", dict(system="torus", d=2, alpha=["1/7"], epsilon="1/5", window="-60:60", grid=8)),
    ("level-set", dict(constraint=["n**2/3 : 1/4", "n*[n/5] : 1/3"], window="-50:50")),
])
def test_output_independent_of_jobs(kind, params):
    outs = []
    for jobs in (1, 3):
        buf = io.StringIO()
        assert run(ExperimentConfig(kind, {**params, "jobs": jobs}), buf, io.StringIO()) == 0
        outs.append(buf.getvalue())
    assert outs[0] == outs[1] and outs[0]


@pytest.mark.parametrize("kind, params, field", [
    ("return-set", dict(alpha=["1/2"], epsilon=0.3, window="1:8"), "epsilon"),
    ("return-set", dict(alpha=["1/2"], epsilon="3/10", window="8:1"), "window"),
    ("return-set", dict(alpha=["x"], epsilon="3/10", window="1:8"), "alpha"),
    ("return-set", dict(alpha=["1/2"], d=3, epsilon="3/10", window="1:8"), "d"),
    ("sgd", dict(P=[1, 2]), "d"),
    ("sgd", dict(P=[1, 0], d=1), "P"),
    ("level-set", dict(constraint=["n+1 : 1/4"], window="0:5"), "constraint"),
    ("verify", dict(suite=["nope"]), "suite"),
    ("bogus", {}, "kind"),
])
def test_invalid_input_exits_two(kind, params, field):
    status, rows, err = run_cfg(kind, **params)
    assert status == 2 and rows == []
    assert err.startswith(f"error: {field}:")


def test_other_kinds():
    _, rows, _ = run_cfg("eval", alpha=["1/3", "1/2"], window="3:3")
    assert rows == [{"op": "eval_P", "n": 3, "value": "-1/4"}]
    _, rows, _ = run_cfg("power", alpha=[1, 1], window="4:4")
    assert rows[0]["entries"] == {"1,1": "4", "2,1": "4", "1,2": "6"}
    _, rows, _ = run_cfg("power", entries=["1", "2", "3"], window="-1:-1")
    assert rows[0]["op"] == "pow_general" and rows[0]["entries"] == {"1,1": "-1", "2,1": "-2", "1,2": "-1"}
    _, rows, _ = run_cfg("reduce", entries="7/10,3/5,9/10")
    assert rows[0]["rep"] == {"1,1": "-3/10", "2,1": "-2/5", "1,2": "1/5"}
    assert rows[0]["lattice"] == {"1,1": "-1", "2,1": "-1", "1,2": "0"}
    _, rows, _ = run_cfg("orbit", system="torus", d=2, alpha=["1/4"], window="3:3")
    assert rows[0]["coords"] == ["3/4", "3/4"]
    _, rows, _ = run_cfg("multi-return", system="torus", d=1, alpha=["1/4"], epsilon="1/8",
                         window="0:8", grid=4)
    assert [r["n"] for r in rows] == [0, 4, 8]
    _, rows, _ = run_cfg("progressions", members=[0, 3, 6, 9], window="0:9", order=2)
    assert [r["n"] for r in rows] == [0, 3]
    _, rows, _ = run_cfg("level-set", constraint=["n**2/3 : 1/4"], window="0:5")
    assert [r["n"] for r in rows] == [0, 3]
    _, rows, _ = run_cfg("eval", expr="n*[n/2]", window="0:3")
    assert [r["value"] for r in rows] == ["0", "0", "2", "3"]


def test_csv_format():
    out = io.StringIO()
    run(ExperimentConfig("sgd", {"P": [1, 2, 4], "d": 1, "format": "csv"}), out, io.StringIO())
    lines = out.getvalue().splitlines()
    assert lines[0] == "op,n" and lines[1:] == [f"sg_d,{n}" for n in (1, 2, 3, 4, 6, 7)]


def test_record_serialization():
    rec = ResultRecord("x", {"n": 1}, {"v": "1/2"}, {"v": 0.5})
    assert rec.to_json() == '{"op":"x","n":1,"v":"1/2","approx":{"v":0.5}}'


def cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "nilbohr", *args], capture_output=True, text=True, cwd=cwd)


def test_main_entry_and_config_precedence(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text('alpha: ["1/2", "1/2"]\nepsilon: "3/10"\nwindow: [1, 8]\n')
    res = cli("return-set", "--config", str(cfg))
    assert res.returncode == 0 and [json.loads(l)["n"] for l in res.stdout.splitlines()] == [2, 6, 8]
    res = cli("return-set", "--config", str(cfg), "--window", "-8:4")
    assert res.returncode == 0 and [json.loads(l)["n"] for l in res.stdout.splitlines()] == [-8, -6, -2, 0, 2]
    bad = tmp_path / "b.json"
    bad.write_text('{"alpha": ["1/2"],\n "epsilon": }')
    res = cli("return-set", "--config", str(bad))
    assert res.returncode == 2 and "line 2" in res.stderr
    other = tmp_path / "s.json"
    other.write_text('{"kind": "sgd", "P": [1, 2, 4], "d": 1}')
    assert cli("eval", "--config", str(other)).returncode == 2
    assert cli("sgd", "--config", str(other)).stdout.count("\n") == 6


def test_main_exit_codes():
    assert main(["sgd", "--P", "1,2,4", "--d", "1"]) == 0
    assert main(["sgd", "--P", "1,2,4"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    assert cli("verify", "--suite", "known").returncode == 0
