import csv
import io
import json
import subprocess
import sys

import pytest

from kgcoulomb import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_spectrum_rr(capsys):
    code, out, _ = run(capsys, "spectrum", "--gamma", "1", "--delta", "2.449489743", "--method", "rr", "--count", "3")
    assert code == 0
    r = rows(out)
    assert list(r[0]) == cli.SPECTRUM_COLUMNS
    assert [float(x["W"]) for x in r] == pytest.approx([6, 9.805784090, 13.66928892], abs=1e-8)
    assert all(x["E_squared"] == "" for x in r)


def test_spectrum_rpm_zero_coupling(capsys):
    code, out, _ = run(capsys, "spectrum", "--gamma", "1", "--delta", "0", "--method", "rpm", "--count", "1")
    assert code == 0
    r = rows(out)
    assert len(r) == 1 and r[0]["method"] == "rpm" and float(r[0]["W"]) == 4


def test_spectrum_physical_parameters(capsys):
    code, out, _ = run(capsys, "spectrum", "--m", "1", "--omega", "0.6666666667", "--f", "1", "--l", "0",
                       "--method", "rr", "--count", "1")
    assert code == 0
    r = rows(out)[0]
    assert float(r["W"]) == pytest.approx(6, abs=1e-9)
    # E^2 = m omega W + m^2 - m omega
    assert float(r["E_squared"]) == pytest.approx(0.6666666667 * float(r["W"]) + 1 - 0.6666666667, abs=1e-11)


@pytest.mark.parametrize("text, value", [("2/3", 2 / 3), ("1.5/2", 0.75), (" -sqrt(6) ", -6 ** 0.5),
                                         ("sqrt(3/4)", 0.75 ** 0.5), ("1e-3", 1e-3)])
def test_parse_real_forms(text, value):
    assert float(cli.parse_real(text, 100)) == pytest.approx(value, rel=1e-15)


def test_fraction_on_command_line(capsys):
    code, out, _ = run(capsys, "spectrum", "--m", "1", "--omega", "2/3", "--f", "1", "--l", "0",
                       "--method", "rr", "--count", "1")
    assert code == 0
    assert float(rows(out)[0]["W"]) == pytest.approx(6, abs=1e-9)


def test_sqrt_syntax_and_json(capsys):
    code, out, _ = run(capsys, "spectrum", "--gamma", "1", "--delta=-sqrt(6)", "--count", "2", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == cli.SCHEMA_VERSION and doc["columns"] == cli.SPECTRUM_COLUMNS
    assert [r["W"] for r in doc["rows"]] == pytest.approx([1.600357154, 6], abs=1e-9)


def test_truncate_report(capsys):
    code, out, _ = run(capsys, "truncate", "--gamma", "1", "--n", "1", "--m", "1", "--f", "1")
    assert code == 0
    r = rows(out)
    assert [float(x["delta"]) for x in r] == pytest.approx([-6 ** 0.5, 6 ** 0.5])
    assert all(float(x["W"]) == 6 and float(x["omega"]) == pytest.approx(2 / 3) for x in r)
    assert [x["nu"] for x in r] == ["1", "0"]
    assert [x["sign_consistent"] for x in r] == ["false", "true"]


def test_truncate_gamma2(capsys):
    code, out, _ = run(capsys, "truncate", "--gamma", "2", "--n", "1")
    r = rows(out)
    assert code == 0 and [float(x["delta"]) for x in r] == pytest.approx([-10 ** 0.5, 10 ** 0.5])
    assert {x["W"] for x in r} == {"8"} and {x["omega"] for x in r} == {""}


@pytest.mark.parametrize("argv", [
    ["truncate", "--gamma", "1", "--n", "0"],
    ["spectrum", "--gamma", "1"],
    ["spectrum", "--gamma", "1", "--delta", "1", "--m", "1"],
    ["spectrum", "--gamma", "abc", "--delta", "1"],
    ["spectrum", "--gamma", "1", "--delta", "1", "--tol", "-1"],
    ["spectrum", "--gamma", "-1", "--delta", "1"],
    ["frobnicate"],
    [],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1 and err


def test_solver_failure_exit_code(capsys, monkeypatch):
    from kgcoulomb.core_model import ConvergenceError

    def boom(*a, **k):
        raise ConvergenceError("rotations stalled")

    monkeypatch.setattr(cli.rayleigh_ritz, "converge_spectrum", boom)
    code, _, err = run(capsys, "spectrum", "--gamma", "1", "--delta", "1")
    assert code == 2 and "rotations stalled" in err


def test_compare_positive_branch(capsys):
    code, out, _ = run(capsys, "compare", "--gamma", "1", "--delta", "sqrt(6)")
    assert code == 0
    r = rows(out)
    assert list(r[0]) == cli.COMPARE_COLUMNS
    assert float(r[0]["W_truncation"]) == 6 and r[1]["W_truncation"] == ""
    for x in r:
        assert x["flag"] == ""
        for key in ("dev_rr_rpm", "dev_rr_oracle", "dev_rpm_oracle"):
            assert float(x[key]) < 1e-7


def test_compare_negative_branch(capsys):
    code, out, _ = run(capsys, "compare", "--gamma", "1", "--delta=-sqrt(6)")
    r = rows(out)
    assert code == 0
    assert [float(x["W_rr"]) for x in r] == pytest.approx([1.600357154, 6, 10.21072810], abs=5e-9)
    assert [x["W_truncation"] for x in r] == ["", "6", ""]


def test_compare_zero_coupling(capsys):
    code, out, _ = run(capsys, "compare", "--gamma", "1", "--delta", "0", "--count", "1")
    r = rows(out)
    assert code == 0 and len(r) == 1
    assert float(r[0]["W_rr"]) == 4 and float(r[0]["W_rpm"]) == 4
    assert float(r[0]["W_oracle"]) == pytest.approx(4, abs=1e-6)


def test_sweep_grid(capsys):
    code, out, _ = run(capsys, "sweep", "--gamma", "1", "--delta-min", "-3", "--delta-max", "3", "--step", "0.5",
                       "--count", "3", "--jobs", "2")
    assert code == 0
    r = rows(out)
    assert list(r[0]) == cli.SWEEP_COLUMNS and len(r) == 39
    deltas = sorted({float(x["delta"]) for x in r})
    assert len(deltas) == 13 and deltas[6] == 0
    by = {(float(x["delta"]), int(x["nu"])): float(x["W"]) for x in r}
    assert [by[(0.0, nu)] for nu in range(3)] == pytest.approx([4, 8, 12])
    for d in (0.5, 1.5, 3.0):
        assert all(abs(by[(d, nu)] - by[(-d, nu)]) > 0.1 for nu in range(3))


def test_sweep_is_deterministic_and_serial_equals_parallel(capsys):
    args = ["sweep", "--gamma", "1", "--delta-min", "2.4", "--delta-max", "2.5", "--step", "0.05", "--count", "1"]
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args, "--jobs", "3")
    _, c, _ = run(capsys, *args)
    assert a == b == c


def test_sweep_marks_families(capsys):
    code, out, _ = run(capsys, "sweep", "--gamma", "1", "--delta-min", "2.4", "--delta-max", "2.5", "--step", "0.05",
                       "--count", "2", "--include-families")
    r = rows(out)
    marked = [x for x in r if x["on_truncation_family"]]
    assert len(marked) == 1 and marked[0]["nu"] == "0" and float(marked[0]["W"]) == 6
    assert marked[0]["on_truncation_family"] == "1"


def test_empty_sweep(capsys):
    code, out, _ = run(capsys, "sweep", "--gamma", "1", "--delta-min", "1", "--delta-max", "0", "--step", "0.1")
    assert code == 0 and out == ",".join(cli.SWEEP_COLUMNS) + "\n"


def test_config_precedence(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# test\ngamma = 1\ndelta = 0\ncount = 2\nformat = json\n")
    code, out, _ = run(capsys, "spectrum", "--config", str(conf))
    doc = json.loads(out)
    assert code == 0 and len(doc["rows"]) == 2
    code, out, _ = run(capsys, "spectrum", "--config", str(conf), "--count", "1", "--format", "csv")
    assert code == 0 and len(rows(out)) == 1


def test_bad_config(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("colour = blue\n")
    code, _, err = run(capsys, "spectrum", "--config", str(conf))
    assert code == 1 and "colour" in err
    code, _, err = run(capsys, "spectrum", "--config", str(tmp_path / "missing.conf"))
    assert code == 1


def test_out_file(tmp_path, capsys):
    target = tmp_path / "w.csv"
    code, out, _ = run(capsys, "spectrum", "--gamma", "1", "--delta", "0", "--count", "1", "--out", str(target))
    assert code == 0 and out == ""
    assert target.read_text().splitlines()[1].startswith("rayleigh_ritz,0,4,")


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "kgcoulomb", "truncate", "--gamma", "1", "--n", "0"],
                       capture_output=True, text=True, env={"NO_COLOR": "1", "PATH": ""})
    assert p.returncode == 1 and "\x1b[" not in p.stderr
