import json
import subprocess
import sys

import pytest

from flatdeform.cli import parse_ideal_params, parse_ideal_spec, read_config, run
from flatdeform.errors import SpecParseError, UnknownFamily


def stable(report):
    r = dict(report)
    r.pop("timing")
    return json.dumps(r, indent=2, default=str)


def test_parse_ideal_spec_examples():
    assert parse_ideal_spec("theta-k1").name == "theta-k1"
    assert parse_ideal_spec("theta-fkk:k=2", qorder=4).degree == 2
    fam = parse_ideal_spec("conj51:t=2/3,qt=1", qorder=3)
    assert fam.conjecture and dict(fam.params)["t"] == pytest.approx(2 / 3)
    with pytest.raises(UnknownFamily):
        parse_ideal_spec("theta-k9")


@pytest.mark.parametrize("text,pos", [("", 0), ("theta-k1;", 8), ("conj51:", 7), ("conj51:t", 8),
                                      ("conj51:t=", 9), ("conj51:t=1 qt=1", 10), ("conj51:t=1,t=2", 11)])
def test_parse_error_positions(text, pos):
    with pytest.raises(SpecParseError) as ei:
        parse_ideal_params(text)
    assert ei.value.pos == pos


def test_exit_codes(capsys):
    assert run(["theta-verify", "--qorder", "6", "--nk-qorder", "4"])[1] == 0
    assert run(["flatness", "--ideal", "theta-k1:perturb=1", "--N", "6", "--lmax", "3", "--q", "1/3"])[1] == 1
    assert run(["flatness", "--ideal", "nope"])[1] == 2
    assert run(["flatness", "--q", "0.5"])[1] == 2
    assert run(["flatness", "--q", "0"])[1] == 2
    assert run(["flatness", "--ideal", "conj51:t=2/3,"])[1] == 2
    assert run(["frobnicate"])[1] == 2
    assert run(["rewrite-confluence", "--samples", "0"])[1] == 2
    capsys.readouterr()


def test_flatness_report_layout(capsys):
    rep, code = run(["flatness", "--ideal", "theta-k1", "--N", "6", "--lmax", "3", "--q", "1/3", "--q", "2/5",
                     "--qorder", "8"])
    capsys.readouterr()
    assert code == 0 and rep["status"] == "pass"
    assert list(rep) == ["command", "parameters", "checks", "status", "version", "timing"]
    for c in rep["checks"]:
        assert c["window"]


def test_byte_stability(capsys):
    argv = ["rewrite-confluence", "--k", "1", "--samples", "500", "--seed", "7"]
    a, _ = run(argv)
    b, _ = run(argv)
    capsys.readouterr()
    assert stable(a) == stable(b)


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# theta check\nideal = theta-k1\nN = 6\nlmax = 2\nq = 1/3\nq = 2/5\n")
    assert read_config(str(cfg))["q"] == "1/3,2/5"
    rep, code = run(["flatness", "--config", str(cfg)])
    capsys.readouterr()
    assert code == 0 and rep["parameters"]["N"] == 6
    rep, code = run(["flatness", "--config", str(cfg), "--N", "7"])
    capsys.readouterr()
    assert rep["parameters"]["N"] == 7
    bad = tmp_path / "bad.cfg"
    bad.write_text("no equals sign\n")
    assert run(["flatness", "--config", str(bad)])[1] == 2


def test_out_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    _, code = run(["constraints-check", "--candidate", "a1=1", "--out", str(out)])
    assert code == 1
    assert json.loads(out.read_text())["status"] == "fail"
    assert capsys.readouterr().out == ""


def test_conjecture_status(capsys):
    rep, code = run(["relations-solve", "--ideal", "fermi-fkk:k=2", "--expect", "1", "--at-least"])
    capsys.readouterr()
    assert code == 0 and rep["status"] == "conjecture-support"


def test_console_entry():
    p = subprocess.run([sys.executable, "-m", "flatdeform", "constraints-derive", "--W", "2", "--adeg-cap", "2"],
                       capture_output=True, text=True)
    assert p.returncode == 0
    assert json.loads(p.stdout)["command"] == "constraints-derive"
