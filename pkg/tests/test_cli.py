import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from rvclass.cli import RunConfig, UsageError, main, read_config_file


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array([[float(a), float(b)] for a, b in rows[1:]])


# trace


def test_trace_x_over_log_orders_converge_to_one(capsys):
    code, out, _ = run(["trace", "--catalog", "x_over_log", "--quantity", "orders"], capsys)
    assert code == 0
    head, rows = parse_csv(out)
    assert head == ["y", "value"]
    # l(y)/y = 1 - log(y)/y exactly
    np.testing.assert_allclose(rows[:, 1], 1 - np.log(rows[:, 0]) / rows[:, 0], rtol=1e-12)
    assert abs(rows[-1, 1] - 1) < abs(rows[0, 1] - 1) < 1e-4
    assert np.all(np.diff(rows[:, 0]) > 0)


def test_trace_power_zero_is_all_zero(capsys):
    code, out, _ = run(["trace", "--catalog", "power", "--param", "rho=0"], capsys)
    assert code == 0
    _, rows = parse_csv(out)
    assert len(rows) > 0 and np.all(rows[:, 1] == 0.0)


def test_trace_orv_not_m_alternates_at_integer_exponents(capsys):
    code, out, _ = run(["trace", "--catalog", "orv_not_m", "--quantity", "orders", "--grid", "geometric"], capsys)
    assert code == 0
    _, rows = parse_csv(out)
    hi, lo = math.e / (math.e + 1), 1 / (math.e + 1)
    ns = [n for n in range(5, 20) if rows[0, 0] <= math.exp(n) <= rows[-1, 0]]
    assert len(ns) >= 4
    for n in ns:
        i = np.argmin(np.abs(rows[:, 0] - math.exp(n)))
        assert rows[i, 0] == pytest.approx(math.exp(n), rel=1e-9)
        assert rows[i, 1] == pytest.approx(hi if n % 2 else lo, abs=1e-3)


def test_trace_ratio_header_and_values(capsys):
    code, out, _ = run(["trace", "--catalog", "power", "--param", "rho=1.5", "--quantity", "ratio:2"], capsys)
    assert code == 0
    head, rows = parse_csv(out)
    assert head == ["s", "value"]
    np.testing.assert_allclose(rows[:, 1], 1.5 * math.log(2), rtol=1e-8)


def test_trace_scaled_vanishes_at_minus_index(capsys):
    argv = ["trace", "--catalog", "power", "--param", "rho=2", "--quantity", "scaled:-2,10"]
    code, out, _ = run(argv, capsys)
    assert code == 0
    head, rows = parse_csv(out)
    assert head == ["s", "value"]
    np.testing.assert_allclose(rows[:, 1], 0.0, atol=1e-6)


@pytest.mark.parametrize("quantity", ["bogus", "ratio:", "ratio:x", "ratio:-1", "scaled:1", "scaled:1,-2"])
def test_trace_bad_quantity_is_usage_error(quantity, capsys):
    code, _, err = run(["trace", "--catalog", "power", "--quantity", quantity], capsys)
    assert code == 2
    assert "error" in err


def test_trace_is_deterministic(capsys):
    argv = ["trace", "--catalog", "orv_not_m", "--grid", "geometric"]
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv, capsys)
    assert a == b


# catalog listing


def test_catalog_listing(capsys):
    code, out, _ = run(["catalog"], capsys)
    assert code == 0
    assert "orv_not_m" in out
    names = [line.split(":")[0].split("(")[0] for line in out.splitlines() if not line.startswith(" ")]
    assert names == sorted(names)
    block = out.split("x_sin")[1]
    assert "M: out" in block
    xol = out.split("x_over_log")[1].split("x_sin")[0]
    assert "rho=1" in xol


# config layering


def test_config_file_parsing(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# settings\ngrid = geometric\nwindows=6\n\nt_grid=2,4  # inline\n")
    cfg = read_config_file(path)
    assert cfg == RunConfig(grid="geometric", windows=6, t_grid=(2.0, 4.0))


@pytest.mark.parametrize("text", ["windows", "colour=red", "windows=two", "tol_stable=-1", "windows=1"])
def test_config_file_rejects_bad_lines(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text + "\n")
    with pytest.raises(UsageError):
        read_config_file(path)


def test_flags_override_config_file(tmp_path, capsys):
    path = tmp_path / "run.cfg"
    path.write_text("points=10\nwindows=3\n")
    base = ["trace", "--catalog", "power", "--config", str(path)]
    # adjacent windows share an edge point
    _, out, _ = run(base, capsys)
    assert len(out.splitlines()) == 1 + 3 * 10 - 2
    _, out, _ = run(base + ["--points", "7"], capsys)
    assert len(out.splitlines()) == 1 + 3 * 7 - 2


def test_bad_config_file_exits_2(tmp_path, capsys):
    path = tmp_path / "run.cfg"
    path.write_text("grid=spiral\n")
    code, _, _ = run(["classify", "--catalog", "power", "--config", str(path)], capsys)
    assert code == 2
    code, _, _ = run(["classify", "--catalog", "power", "--config", str(tmp_path / "missing.cfg")], capsys)
    assert code == 2


def test_output_file(tmp_path, capsys):
    dest = tmp_path / "report.json"
    code, out, _ = run(["classify", "--catalog", "power", "--param", "rho=2", "--output", str(dest)], capsys)
    assert code == 0 and out == ""
    report = json.loads(dest.read_text())
    assert report["target"] == "power(rho=2)"
    assert report["rho_hat"] == pytest.approx(2.0, abs=1e-9)


# targets and exit codes


def test_param_without_catalog_is_usage_error(tmp_path, capsys):
    path = tmp_path / "t.txt"
    path.write_text("1 1\n2 2\n")
    code, _, _ = run(["classify", "--table", str(path), "--param", "rho=1"], capsys)
    assert code == 2


@pytest.mark.parametrize("param", ["rho", "rho=abc", "=3"])
def test_malformed_param_is_usage_error(param, capsys):
    code, _, _ = run(["classify", "--catalog", "power", "--param", param], capsys)
    assert code == 2


def test_table_target(tmp_path, capsys):
    xs = np.exp(np.linspace(0.0, 40.0, 4001)).tolist()
    path = tmp_path / "power.txt"
    path.write_text("".join(f"{x!r} {x ** 1.5!r}\n" for x in xs))
    code, out, _ = run(["classify", "--table", str(path)], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["verdicts"]["M"] == "in"
    assert report["rho_hat"] == pytest.approx(1.5, abs=1e-6)
    assert report["x_empirical"] is False


def test_malformed_table_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("1 2\nthree 4\n")
    code, _, err = run(["classify", "--table", str(path)], capsys)
    assert code == 2 and "error" in err


def test_evaluation_failure_names_grid_point(capsys):
    code, out, err = run(["classify", "--catalog", "exp_decay", "--y-start", "650", "--growth", "10"], capsys)
    assert code == 3
    assert out == ""
    assert "y=" in err


def test_help_exits_0(capsys):
    assert main(["--help"]) == 0
    assert main([]) == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "rvclass", "classify", "--catalog", "power", "--param", "rho=2"],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    report = json.loads(proc.stdout)
    assert report["verdicts"]["RV"] == "in"
