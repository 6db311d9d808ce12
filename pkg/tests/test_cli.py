from __future__ import annotations

import json
import subprocess
import sys

import pytest

from fusionlink import cli


def _run(*args, cwd=None):
    proc = subprocess.run([sys.executable, "-m", "fusionlink", *args], capture_output=True, text=True, cwd=cwd)
    return proc.returncode, proc.stdout


def test_centrics_a4(data_dir):
    code, out = _run("centrics", "--group", str(data_dir / "a4.json"), "--p", "2")
    assert code == 0
    res = json.loads(out)["result"]
    assert len(res["centrics"]) == 1 and len(res["centrics"][0]) == 4


def test_cohomology_c2(data_dir):
    code, out = _run("cohomology", "--group", str(data_dir / "c2.json"), "--p", "2",
                     "--module", str(data_dir / "f2.json"), "--max-degree", "3")
    assert code == 0
    degs = json.loads(out)["result"]["degrees"]
    assert [len(d["invariant_factors"]) for d in degs] == [1, 1, 1, 1]


def test_verify_trivial_a4_and_output_file(data_dir, tmp_path):
    target = tmp_path / "report.json"
    code, out = _run("verify-trivial", "--group", str(data_dir / "a4.json"), "--p", "2", "--max-degree", "2",
                     "--output", str(target), "--threads", "1")
    assert code == 0 and out == ""
    rep = json.loads(target.read_text())
    assert rep["ok"] and rep["result"]["hom_to_Cp_dimension"] == 0
    assert all(d["factors_equal"] for d in rep["result"]["degrees"])


@pytest.mark.parametrize("args,needle", [
    (["--group", "missing.json", "--p", "2"], "No such file"),
    (["--group", "{bad}", "--p", "2"], "line 1 column"),
    (["--group", "{a4}", "--p", "5"], "does not divide"),
    (["--group", "{a4}", "--p", "2", "--module", "{badmod}"], "field 'rank'"),
    (["--group", "{badperm}", "--p", "2"], "generators[0]"),
])
def test_input_errors_exit_two(data_dir, tmp_path, args, needle):
    (tmp_path / "bad.json").write_text('{"degree": 3, "generators": [[1, 0, 2]')
    (tmp_path / "badmod.json").write_text('{"p": 2, "e": 1}')
    (tmp_path / "badperm.json").write_text('{"degree": 3, "generators": [[0, 0, 1]]}')
    subs = {"{bad}": tmp_path / "bad.json", "{a4}": data_dir / "a4.json", "{badmod}": tmp_path / "badmod.json",
            "{badperm}": tmp_path / "badperm.json"}
    args = [str(subs.get(a, a)) for a in args]
    code, out = _run("centrics" if "--module" not in args else "stable", *args)
    assert code == 2
    msg = json.loads(out)["message"]
    assert needle in msg


def test_failed_verification_exit_one(monkeypatch, data_dir):
    monkeypatch.setitem(cli.HANDLERS, "verify-main", lambda job: ({"pass": False, "seconds": 1.0}, False))
    code, text = cli.run(cli.JobSpec("verify-main", data_dir / "a4.json", 2))
    assert code == 1
    rep = json.loads(text)
    assert rep["ok"] is False and "seconds" not in rep["result"]


def test_twist_files(data_dir):
    code, out = _run("explore-conjecture", "--group", str(data_dir / "a4.json"), "--p", "2",
                     "--module", str(data_dir / "v2.json"), "--twist", str(data_dir / "twist_a4_order3.json"))
    assert code == 0
    assert json.loads(out)["result"]["nilpotent"] is False
    code, out = _run("verify-main", "--group", str(data_dir / "d8.json"), "--p", "2",
                     "--module", str(data_dir / "v2.json"), "--twist", str(data_dir / "twist_unipotent.json"))
    assert code == 0
    assert json.loads(out)["result"]["filtration"] == {"nilpotent": True, "length": 2}


def test_group_module_action(data_dir):
    code, out = _run("stable", "--group", str(data_dir / "s4.json"), "--p", "2",
                     "--module", str(data_dir / "s4_s3_f2.json"), "--max-degree", "1")
    assert code == 0
    assert json.loads(out)["result"]["degrees"][0]["stable"] == []
