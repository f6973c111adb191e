import csv
import io
import json
import re
import subprocess
import sys
from pathlib import Path

import pytest

from spiraldelone.harness import cli
from spiraldelone.harness.registry import lookup, registry
from spiraldelone.harness.report import Report, fmt_float, to_json

ROOT = Path(__file__).resolve().parent.parent


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_float_format_round_trips():
    for x in (0.1, 1 / 3, 2.0 ** -40, 1e300, -7.5):
        s = fmt_float(x)
        assert float(s) == x
    assert fmt_float(0.1) == "0.10000000000000001"
    assert to_json({"a": [1, 0.5, None, True]}, 0).replace("\n", "") == '{"a": [1, 0.5, null, true]}'


def test_report_shapes():
    r = Report("x", {"command": "x"}, ["a", "b"], [[1, 0.25], [2, None]], {"k": 1}, True)
    doc = json.loads(r.to_json())
    assert doc["schema_version"] == "1.0" and doc["passed"] is True and doc["records"][1] == [2, None]
    rows = list(csv.reader(io.StringIO(r.to_csv())))
    assert rows == [["a", "b"], ["1", "0.25"], ["2", ""]]
    assert Report("x", {}, passed=False).exit_code == 1
    assert Report("x", {}).exit_code == 0


def test_cf_golden(capsys):
    code, out, _ = run_cli(capsys, "cf", "--theta", "golden", "--depth", "10")
    doc = json.loads(out)
    assert code == 0 and doc["columns"] == ["i", "a_i", "p_i", "q_i", "quality"]
    assert [r[3] for r in doc["records"][:6]] == [1, 1, 2, 3, 5, 8]


def test_spiral_emit_csv(capsys):
    code, out, _ = run_cli(capsys, "spiral", "emit", "--alpha", "1/2", "--theta", "golden",
                           "--annulus", "2,3", "--emit", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["n", "radius", "frac_angle", "x", "y"]
    assert [int(r[0]) for r in rows[1:]] == list(range(4, 10))


def test_packing_golden_passes(capsys):
    code, out, _ = run_cli(capsys, "scan", "packing", "--alpha", "1/2", "--theta", "golden",
                           "--beta-critical", "--nu", "1:2000")
    doc = json.loads(out)
    assert code == 0 and doc["passed"] is True
    assert doc["summary"]["min_n1"] >= doc["summary"]["packing_lower"]


def test_packing_rational_fails_with_witness(capsys):
    code, out, err = run_cli(capsys, "scan", "packing", "--alpha", "1/2", "--theta", "rat:1/3",
                             "--beta", "0", "--nu", "1:2000")
    doc = json.loads(out)
    assert code == 1 and doc["passed"] is False
    assert "assertion failed" in err and doc["summary"]["witness"]["nu"] > 0


def test_covering_golden_passes(capsys):
    code, out, _ = run_cli(capsys, "scan", "covering", "--alpha", "1/2", "--theta", "golden",
                           "--beta", "0", "--annulus", "400,800", "--samples", "300")
    assert code == 0 and json.loads(out)["passed"] is True


@pytest.mark.parametrize("argv", [
    ["scan", "covering", "--alpha", "1/2", "--theta", "golden", "--beta", "0", "--annulus", "10,20"],
    ["spiral", "emit", "--alpha", "1/2", "--theta", "golden", "--annulus", "3,2"],
    ["spiral", "emit", "--alpha", "-1", "--theta", "golden", "--annulus", "1,2"],
    ["cf", "--theta", "nonsense:1"],
    ["scan", "packing", "--alpha", "1/2", "--theta", "golden", "--beta", "1.5", "--nu", "1:10"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["scan", "packing", "--alpha", "1/2"])
    assert exc.value.code == 2


def test_scenery_scan_window(capsys):
    code, out, _ = run_cli(capsys, "scenery", "scan", "--theta", "golden", "--t-max", "t12", "--grid", "100")
    doc = json.loads(out)
    assert code == 0 and doc["summary"]["M"] == 1
    assert any(r[1] == "3" for r in doc["records"]) and any(r[1] == "" for r in doc["records"])


def test_verdict(capsys):
    code, out, _ = run_cli(capsys, "verdict", "--alpha", "1/2", "--theta", "golden", "--nu", "1:3000",
                           "--annulus", "400,800", "--samples", "200")
    s = json.loads(out)["summary"]
    assert code == 0
    assert s["relatively_dense_evidence"] is True and s["uniformly_discrete_evidence"] is True


@pytest.mark.parametrize("argv", [
    ["verify", "lemmas", "--samples", "20000", "--seed", "5"],
    ["scan", "covering", "--alpha", "1/2", "--theta", "golden", "--beta", "0", "--annulus", "400,900",
     "--samples", "500", "--seed", "9", "--emit", "csv"],
    ["scan", "packing", "--alpha", "1", "--theta", "surd:(0+sqrt(2))/1", "--beta", "0.5", "--nu", "1:30000"],
    ["scenery", "scan", "--theta", "golden", "--t-max", "t10", "--grid", "200"],
])
def test_thread_count_does_not_change_bytes(capsys, argv):
    outs = {run_cli(capsys, *argv, "--threads", str(n))[1] for n in (1, 4)}
    assert len(outs) == 1


def test_out_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.OUT_DIR_ENV, str(tmp_path))
    assert cli.resolve_out("r.json") == tmp_path / "r.json"
    assert cli.resolve_out("/abs/r.json") == Path("/abs/r.json")
    code, out, _ = run_cli(capsys, "registry", "--out", "sub/reg.json")
    assert code == 0 and out == ""
    assert json.loads((tmp_path / "sub" / "reg.json").read_text())["summary"]["entries"] == len(registry())


def test_registry_targets_exist():
    for entry in registry():
        path, _, node = entry.test.partition("::")
        name = node.split("[")[0]
        src = (ROOT / path).read_text()
        assert re.search(rf"^def {name}\(", src, re.M), entry.test
        mod, _, fn = entry.module.partition(".")
        pkg = __import__(f"spiraldelone.{mod}", fromlist=["_"])
        for f in fn.split("+"):
            assert hasattr(pkg, f), entry.module
    assert lookup("Lemma 8")[0].module == "contfrac.lemma8_check"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "spiraldelone", "registry", "--emit", "csv"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[0] == "lemma,module,test"
