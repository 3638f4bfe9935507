import json
import math
import subprocess
import sys

import pytest

from pamzi.cli import main
from pamzi.sweep import COLUMNS


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_point_coherent_only(capsys):
    code, out, _ = run_cli(["point", "--alpha", "1", "--r", "0",
                            "--phi", "1.5707963", "--scheme", "original",
                            "--detector", "idiff"], capsys)
    assert code == 0
    record = json.loads(out.strip().splitlines()[-1])
    assert abs(record["delta_phi"] - 1.0) < 1e-6
    assert abs(record["f_ideal"] - 2.0) < 1e-9


def test_point_vacuum_qfi_zero(capsys):
    code, out, _ = run_cli(["point", "--alpha", "0", "--r", "0",
                            "--scheme", "original", "--detector", "idiff"],
                           capsys)
    # vacuum input: every slope vanishes -> singular-point exit
    assert code == 3


def test_point_zero_slope_exit(capsys):
    code, _, err = run_cli(["point", "--alpha", "0", "--r", "1",
                            "--scheme", "original", "--detector", "homodyne"],
                           capsys)
    assert code == 3
    assert "singular" in err


def test_point_parameter_error(capsys):
    code, _, err = run_cli(["point", "--T", "1.2"], capsys)
    assert code == 2


def test_missing_required_flag_exits_2():
    proc = subprocess.run(
        [sys.executable, "-m", "pamzi.cli", "sweep", "--axis", "T"],
        capture_output=True, text=True)
    assert proc.returncode == 2


def test_sweep_contract(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code, _, _ = run_cli(["sweep", "--axis", "phi", "--start", "0.4",
                          "--stop", "2.0", "--steps", "3", "--ms", "0,1",
                          "--schemes", "a,b", "--detectors", "idiff,homodyne",
                          "--alpha", "1", "--r", "0.5", "--out", str(out)],
                         capsys)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(COLUMNS)
    # 3 values x (m=0 once + m=1 twice) x 2 detectors
    assert len(lines) - 1 == 3 * 3 * 2
    first = dict(zip(COLUMNS, lines[1].split(",")))
    assert first["axis"] == "phi" and first["status"] == "ok"
    float(first["delta_phi"])  # parses


def test_sweep_zero_slope_rows_are_nan(tmp_path, capsys):
    out = tmp_path / "zs.csv"
    code, _, _ = run_cli(["sweep", "--axis", "phi", "--values", "1.0",
                          "--ms", "0", "--schemes", "a",
                          "--detectors", "homodyne", "--alpha", "0",
                          "--r", "0.8", "--out", str(out)], capsys)
    assert code == 0
    row = dict(zip(COLUMNS, out.read_text().splitlines()[1].split(",")))
    assert row["status"] == "zero_slope"
    assert row["delta_phi"] == "NaN"
    assert float(row["f_ideal"]) > 0.0


def test_sweep_determinism(tmp_path, capsys):
    args = ["sweep", "--axis", "T", "--start", "0.3", "--stop", "1.0",
            "--steps", "2", "--ms", "0,2", "--alpha", "0.8", "--r", "0.4"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_cli(args + ["--out", str(a)], capsys)
    run_cli(args + ["--out", str(b)], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_figure_writes_panels(tmp_path, capsys):
    code, out, _ = run_cli(["figure", "--id", "F7", "--out",
                            str(tmp_path), "--steps", "4"], capsys)
    assert code == 0
    names = sorted(p.name for p in tmp_path.glob("*.csv"))
    assert names == ["fig7_a.csv", "fig7_b.csv"]
    header = (tmp_path / "fig7_a.csv").read_text().splitlines()[0]
    assert header == ",".join(COLUMNS)


def test_figure_f11_columns(tmp_path, capsys):
    code, _, _ = run_cli(["figure", "--id", "F11", "--out", str(tmp_path),
                          "--steps", "4"], capsys)
    assert code == 0
    rows = (tmp_path / "fig11_a.csv").read_text().splitlines()
    row = dict(zip(COLUMNS, rows[1].split(",")))
    assert row["axis"] == "eta"
    assert float(row["f_lossy"]) <= float(row["f_ideal"]) + 1e-12


def test_config_file_with_flag_override(tmp_path, capsys):
    conf = tmp_path / "pamzi.conf"
    conf.write_text("alpha=2.0\nr=0.0\nphi=1.5707963\n# comment\n")
    code, out, _ = run_cli(["point", "--scheme", "original", "--detector",
                            "homodyne", "--config", str(conf)], capsys)
    assert code == 0
    record = json.loads(out.strip().splitlines()[-1])
    assert record["alpha"] == 2.0
    assert abs(record["delta_phi"] - 0.5) < 1e-6
    # explicit flag beats the file
    code, out, _ = run_cli(["point", "--scheme", "original", "--detector",
                            "homodyne", "--alpha", "1.0", "--config",
                            str(conf)], capsys)
    record = json.loads(out.strip().splitlines()[-1])
    assert record["alpha"] == 1.0


def test_optimize_phi_flag(capsys):
    code, out, _ = run_cli(["point", "--alpha", "1", "--r", "0", "--phi",
                            "0.3", "--scheme", "original", "--detector",
                            "idiff", "--optimize-phi"], capsys)
    assert code == 0
    record = json.loads(out.strip().splitlines()[-1])
    assert abs(record["phi"] - math.pi / 2) < 1e-5
    assert abs(record["delta_phi"] - 1.0) < 1e-8
