import json

import pytest

from bigraded_toda import cli
from bigraded_toda.algebra import NotExact


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_construct_log(capsys):
    code, out, _ = run(capsys, "construct", "log", "--N", "1", "--M", "1", "--K", "2")
    assert code == 0
    assert [line.split(" = ")[0] for line in out.splitlines()] == ["w[-1]", "w[0]", "w[1]"]


def test_construct_bottom_generator(capsys):
    code, out, _ = run(capsys, "construct", "A", "--N", "2", "--M", "3", "--alpha=-M", "--p", "0")
    assert code == 0
    assert out.strip() == "A[-3,0] = [(1)]*ε∂"


def test_construct_json_is_deterministic(capsys):
    argv = ("construct", "density", "--N", "2", "--M", "1", "--alpha", "N-1", "--p", "1",
            "--format", "json")
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    doc = json.loads(first)
    assert doc["object"] == "density" and "h[1,1]" in doc["value"]


def test_construct_density_value(capsys):
    _, out, _ = run(capsys, "construct", "density", "--N", "1", "--M", "1", "--alpha", "0",
                    "--p", "0", "--format", "json")
    terms = json.loads(out)["value"]["h[0,0]"]["terms"]
    assert terms["u[0]^2"] == "1/2" and terms["v"] == "1/1"


def test_check_passes(capsys):
    code, out, _ = run(capsys, "check", "zs", "--N", "1", "--M", "1", "--K", "2")
    assert code == 0
    assert out.strip().splitlines()[-1].endswith("passed")


def test_check_failure_exit_code(capsys):
    code, out, _ = run(capsys, "check", "matrices", "--N", "1", "--M", "2", "--K", "1")
    assert code == 1
    assert "FAIL" in out


def test_check_frobenius_json(capsys, tmp_path):
    target = tmp_path / "report.json"
    code, _, _ = run(capsys, "check-frobenius", "--N", "2", "--M", "1", "--samples", "5",
                     "--format", "json", "--output", str(target))
    assert code == 0
    doc = json.loads(target.read_text())
    assert doc["pass"] is True and doc["reports"]


@pytest.mark.parametrize("argv", [
    ("construct", "B", "--N", "2", "--M", "1", "--alpha", "5", "--p", "0"),
    ("construct", "B", "--N", "2", "--M", "1", "--alpha", "M+", "--p", "0"),
    ("construct", "B", "--N", "2", "--M", "1", "--alpha", "0"),
    ("construct", "B", "--N", "1", "--M", "1", "--alpha", "0", "--p", "0", "--lo", "3", "--hi", "1"),
    ("check", "zs", "--N", "0", "--M", "1"),
])
def test_configuration_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "configuration error" in err


def test_algebra_errors(capsys, monkeypatch):
    def boom(cfg):
        raise NotExact("not a total derivative")
    monkeypatch.setattr(cli, "construct", boom)
    code, _, err = run(capsys, "construct", "log", "--N", "1", "--M", "1")
    assert code == 3
    assert "NotExact" in err


def test_thread_count_does_not_change_output(capsys, monkeypatch):
    argv = ("check", "tau", "--N", "1", "--M", "1", "--K", "2", "--pmax", "0", "--format", "json")
    _, serial, _ = run(capsys, *argv)
    monkeypatch.setenv(cli.THREADS_ENV, "4")
    _, parallel, _ = run(capsys, *argv)
    assert serial == parallel


def test_bad_thread_count(capsys, monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "many")
    code, _, _ = run(capsys, "check", "zs", "--N", "1", "--M", "1", "--K", "1", "--pmax", "0")
    assert code == 2


def test_parse_alpha():
    assert cli.parse_alpha("-M", 2, 3) == -3
    assert cli.parse_alpha("N-1", 2, 3) == 1
    assert cli.parse_alpha(" 0 ", 2, 3) == 0
    assert cli.parse_alpha(None, 2, 3) is None
