import io
import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from conftest import conferencing_toy, planted_code
from maccoop.channel import DiscreteMAC
from maccoop.cli import EXIT_CERT, EXIT_INVALID, EXIT_OK, EXIT_USAGE, dumps, main, parse_alphas
from maccoop.code import CooperationCode

FAST = ["--grid", "11", "--sweeps", "3", "--restarts", "2"]


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), stdout=buf)
    return code, buf.getvalue()


def run_json(*argv):
    code, text = run(*argv)
    return code, json.loads(text)


@pytest.fixture
def planted_files(tmp_path):
    mac, code = planted_code()
    ch, co = tmp_path / "channel.json", tmp_path / "code.json"
    ch.write_text(dumps(mac.to_dict()))
    co.write_text(dumps(code.to_dict()))
    return str(ch), str(co)


def test_channel_info():
    code, rep = run_json("channel", "info", "--channel", "contraction")
    assert code == EXIT_OK and rep["status"] == "ok"
    assert rep["result"]["shape"] == [4, 2, 12]
    assert rep["tool"] == "maccoop" and rep["command"] == "channel info"


def test_channel_extend_writes_file(tmp_path):
    out = tmp_path / "ext.json"
    code, rep = run_json("channel", "extend", "--channel", "adder", "--n", "2", "--out", str(out))
    assert code == EXIT_OK and rep["result"]["shape"] == [4, 4, 9]
    ext = DiscreteMAC.from_dict(json.loads(out.read_text()))
    assert ext.shape == (4, 4, 9)


def test_channel_extend_size_guard():
    code, rep = run_json("channel", "extend", "--channel", "contraction", "--n", "9")
    assert code == EXIT_INVALID and "Y^n" in rep["result"]["error"]


def test_code_eval(planted_files):
    ch, co = planted_files
    code, rep = run_json("code", "eval", "--channel", ch, "--code", co, "--r1", "1", "--r2", "1")
    assert code == EXIT_OK
    res = rep["result"]
    assert res["avg"] == pytest.approx(4 / 256) and res["max"] == 1.0
    assert res["certificates"] == ["upper_bound"]


def test_code_eval_exact_over_budget(planted_files):
    ch, co = planted_files
    code, rep = run_json("code", "eval", "--channel", ch, "--code", co, "--r1", "1", "--r2", "1", "--exact")
    assert code == EXIT_INVALID and "M_i <= 8" in rep["result"]["error"]


def test_perm_search_pass_and_fail(tmp_path):
    good = tmp_path / "good.json"
    bits = np.zeros((6, 6), int)
    bits[:3, :3] = 1
    good.write_text(json.dumps(bits.tolist()))
    code, rep = run_json("perm", "search", "--matrix", str(good), "--k", "3")
    assert code == EXIT_OK and rep["result"]["verification"] == "pass"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"matrix": np.ones((4, 4), int).tolist()}))
    code, rep = run_json("perm", "search", "--matrix", str(bad), "--k", "2")
    assert code == EXIT_CERT and rep["status"] == "certificate_failure"


def test_transform_extra_round(planted_files, tmp_path):
    ch, co = planted_files
    out = tmp_path / "new.json"
    code, rep = run_json(
        "transform", "thm1", "--channel", ch, "--code", co,
        "--r1", str(4 / 3), "--r2", str(4 / 3), "--delta", "0.2", "--out", str(out),
    )
    assert code == EXIT_OK
    res = rep["result"]
    assert res["certificates"] == ["certified", "pass"]
    assert res["verification"]["after"]["max"] == 0.0
    new = CooperationCode.from_dict(json.loads(out.read_text()))
    assert new.messages == (8, 8)


def test_transform_quarter_blocks(tmp_path):
    mac, code = conferencing_toy(0)
    ch, co = tmp_path / "ch.json", tmp_path / "co.json"
    ch.write_text(dumps(mac.to_dict()))
    co.write_text(dumps(code.to_dict()))
    rc, rep = run_json("transform", "prop3", "--channel", str(ch), "--code", str(co), "--c12", "0.5", "--c21", "0.5")
    assert rc == EXIT_OK
    cert = rep["result"]["verification"]["certificate"]
    assert cert["status"] == "pass" and cert["kind"] == "4 eps / 3"


def test_transform_quarter_blocks_rejects_plain_code(planted_files):
    ch, co = planted_files
    rc, rep = run_json("transform", "prop3", "--channel", ch, "--code", co, "--c12", "0.5", "--c21", "0.5")
    assert rc == EXIT_INVALID


def test_capacity_calpha():
    rc, rep = run_json("capacity", "calpha", "--channel", "adder", "--alpha", "0.5")
    assert rc == EXIT_OK
    assert rep["result"]["value"] == pytest.approx(0.75, abs=1e-9)
    assert rep["result"]["certificates"] == ["lower_bound"]
    rc, rep = run_json("capacity", "calpha", "--channel", "adder", "--alpha", "0.5", "--conf", "5", "5", *FAST)
    assert rep["result"]["value"] == pytest.approx(math.log2(3) / 2, abs=1e-4)


def test_capacity_dueck_json_and_csv():
    rc, rep = run_json("capacity", "dueck", "--alphas", "0.5")
    assert rc == EXIT_OK
    assert rep["result"]["rows"][0]["gap"] == pytest.approx(1 / 9, abs=1e-12)
    rc, text = run("capacity", "dueck", "--alphas", "0:1:0.5", "--out", "csv")
    lines = text.splitlines()
    assert lines[0].startswith("# {")
    assert json.loads(lines[0][2:])["status"] == "ok"
    assert lines[1] == "alpha,pstar,avg_lower,max_upper,gap"
    assert len(lines) == 5


def test_capacity_region():
    rc, rep = run_json("capacity", "region", "--channel", "adder", "--alphas", "0,0.5,1", *FAST)
    assert rc == EXIT_OK
    verts = {tuple(v) for v in rep["result"]["vertices"]}
    assert (1.0, 0.5) in verts and (0.5, 1.0) in verts


def test_capacity_continuity():
    rc, rep = run_json("capacity", "continuity", "--channel", "adder", "--alpha", "0.5", "--levels", "0,0.25", *FAST)
    assert rc == EXIT_OK and rep["result"]["all_hold"]
    assert len(rep["result"]["rows"]) == 4


@pytest.mark.parametrize("argv", [
    ["channel", "info", "--channel", "adder", "--bogus"],
    ["capacity", "dueck", "--alphas", "0:1:-1"],
    ["capacity", "dueck", "--alphas", "1.5"],
    ["capacity", "dueck", "--tol", "0"],
    ["transform"],
])
def test_usage_errors(argv):
    assert run(*argv)[0] == EXIT_USAGE


def test_missing_file_is_invalid(tmp_path):
    rc, rep = run_json("channel", "info", "--channel", str(tmp_path / "nope.json"))
    assert rc == EXIT_INVALID and "cannot read" in rep["result"]["error"]


def test_parse_alphas():
    assert parse_alphas("0:1:0.25") == [0, 0.25, 0.5, 0.75, 1.0]
    assert parse_alphas("0.1,0.2") == [0.1, 0.2]
    assert len(parse_alphas("0:1:0.05")) == 21


def test_output_is_byte_identical():
    argv = ["capacity", "calpha", "--channel", "contraction", "--alpha", "0.3", *FAST]
    a = run(*argv, "--workers", "1")[1]
    b = run(*argv, "--workers", "1")[1]
    c = run(*argv, "--workers", "4")[1]
    assert a == b == c


def test_console_script():
    exe = shutil.which("maccoop")
    if exe is None:
        pytest.skip("console script not installed")
    proc = subprocess.run([exe, "capacity", "dueck", "--alphas", "0.5"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["rows"][0]["pstar"] == pytest.approx(1 / 3)
