import json
import math

import pytest

from modop.cli import main


def test_check_thm36_passes(capsys):
    assert main(["check", "thm36", "--count", "100", "--seed", "7"]) == 0
    assert "thm36" in capsys.readouterr().out


def test_unknown_suite_is_usage_error(capsys):
    assert main(["check", "nosuch"]) == 2
    assert "nosuch" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["check", "thm36", "--count", "x"],
                                  ["check", "thm36", "--tol", "junk=1"],
                                  ["transform", "--family", "diag-poly:abc"],
                                  ["transform", "--family", "/nonexistent.json"],
                                  ["check", "thm36", "--block-dims", "9"]])
def test_usage_errors(argv):
    assert main(argv) == 2


def test_transform_prints_scalar_formula(capsys):
    assert main(["transform", "--family", "diag-poly:1", "--n", "16"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 16
    for line in lines:
        j, v = line.split("\t")
        j = int(j)
        assert abs(float(v) - j / math.sqrt(1 + j * j)) <= 1e-15


def test_transform_inverse_of_constant(capsys):
    assert main(["transform", "--family", "diag-const:0.6", "--n", "2", "--inverse"]) == 0
    out = capsys.readouterr().out.split()
    assert float(out[1]) == pytest.approx(0.75)


def test_transform_family_file(tmp_path, capsys):
    assert main(["gen", "--seed", "3", "--json", str(tmp_path / "inst.json")]) == 0
    inst = json.loads((tmp_path / "inst.json").read_text())
    (tmp_path / "fam.json").write_text(json.dumps(inst["family"]))
    out = tmp_path / "F.json"
    assert main(["transform", "--family", str(tmp_path / "fam.json"), "--n", "3",
                 "--json", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["op"] == "bounded_transform" and len(data["blocks"]) == 3


def test_gen_is_deterministic(capsys):
    main(["gen", "--seed", "5", "--count", "2", "--block-dims", "2,1", "--mult", "1,2"])
    a = capsys.readouterr().out
    main(["gen", "--seed", "5", "--count", "2", "--block-dims", "2,1", "--mult", "1,2"])
    assert a == capsys.readouterr().out
    items = json.loads(a)
    assert [i["spec"]["block_dims"] for i in items] == [[2, 1], [2, 1]]


def test_report(tmp_path):
    out = tmp_path / "r.json"
    assert main(["report", "--suites", "prop23,thm34", "--count", "4", "--trunc", "8",
                 "--json", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["schema"] == "modop-report/1" and data["passed"]
    assert [s["suite"] for s in data["suites"]] == ["prop23", "thm34"]
    assert main(["report", "--suites", "bogus"]) == 2
