import csv
import re
import subprocess
import sys

import pytest

from gic_feedback.cli import SWEEP_COLUMNS, main
from gic_feedback.rate_theory import ChannelParams, symmetric_rate


def rate_line(text):
    return float(re.search(r"symmetric rate: ([0-9.]+) bits/channel use", text).group(1))


def read_sweep(path):
    with open(path, newline="") as fh:
        lines = fh.read().split("\n")
    assert lines[0].startswith("#")
    rows = list(csv.reader(lines[1:-1]))
    return rows[0], rows[1:]


class TestRate:
    def test_degraded(self, capsys):
        assert main(["rate", "--a", "0", "--P", "3"]) == 0
        out = capsys.readouterr().out
        assert rate_line(out) == 1.0
        assert "bits/s/Hz" in out

    def test_passthrough(self, capsys):
        assert main(["rate", "--a", "1", "--P", "10"]) == 0
        lib = symmetric_rate(ChannelParams(1.0, 10.0)).rate_bits_per_use
        assert rate_line(capsys.readouterr().out) == pytest.approx(lib, abs=1e-12)

    def test_grid_refinement(self, capsys):
        main(["rate", "--a", "1", "--P", "10", "--grid-step", "1e-3"])
        coarse = rate_line(capsys.readouterr().out)
        main(["rate", "--a", "1", "--P", "10", "--grid-step", "1e-5"])
        fine = rate_line(capsys.readouterr().out)
        assert abs(coarse - fine) < 1e-3

    def test_snr_db(self, capsys):
        main(["rate", "--a", "1", "--snr-db", "10"])
        assert rate_line(capsys.readouterr().out) == pytest.approx(
            symmetric_rate(ChannelParams(1.0, 10.0)).rate_bits_per_use, abs=1e-12)

    @pytest.mark.parametrize("argv", [["rate"], ["rate", "--a", "x", "--P", "1"],
                                      ["rate", "--a", "1", "--P", "1", "--snr-db", "3"], ["bogus"]])
    def test_usage_errors(self, argv):
        with pytest.raises(SystemExit) as ei:
            main(argv)
        assert ei.value.code == 2

    @pytest.mark.parametrize("argv", [["rate", "--a", "1", "--P", "-1"],
                                      ["rate", "--a", "1", "--P", "1", "--grid-step", "0.1"]])
    def test_domain_errors(self, argv, capsys):
        assert main(argv) == 3


class TestSweep:
    def test_rows_and_dominance(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["sweep", "--snr-db", "20", "--out", str(out)]) == 0
        header, rows = read_sweep(out)
        assert tuple(header) == SWEEP_COLUMNS
        assert len(rows) == 21
        for r in rows:
            assert float(r[3]) >= float(r[4]) - 1e-12
        alpha1 = [r for r in rows if float(r[0]) == 1.0]
        assert len(alpha1) == 1 and float(alpha1[0][2]) == float(alpha1[0][1]) == 20.0

    def test_alpha_one_row_a_is_one(self, tmp_path):
        out = tmp_path / "s.csv"
        main(["sweep", "--snr-db", "20", "--alpha-min", "1", "--alpha-max", "1.1",
              "--alpha-step", "0.1", "--out", str(out)])
        _, rows = read_sweep(out)
        lib = symmetric_rate(ChannelParams(1.0, 100.0))
        assert float(rows[0][3]) == pytest.approx(lib.rate_bits_per_use, rel=1e-14)

    def test_lf_and_precision(self, tmp_path):
        out = tmp_path / "s.csv"
        main(["sweep", "--snr-db", "10", "--alpha-min", "0.5", "--alpha-max", "0.7", "--out", str(out)])
        data = out.read_bytes()
        assert b"\r" not in data
        _, rows = read_sweep(out)
        mantissa = rows[0][3].split("e")[0].replace(".", "").lstrip("-")
        assert len(mantissa) >= 12

    def test_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["sweep", "--snr-db", "15", "--alpha-min", "0.5", "--alpha-max", "1.5"]
        main(argv + ["--out", str(a)])
        main(argv + ["--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_sign_flip_rates(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["sweep", "--snr-db", "15", "--alpha-min", "0.5", "--alpha-max", "1.5"]
        main(argv + ["--out", str(a)])
        main(argv + ["--a-sign", "-1", "--out", str(b)])
        ra = [r[3:5] for r in read_sweep(a)[1]]
        rb = [r[3:5] for r in read_sweep(b)[1]]
        assert ra == rb

    @pytest.mark.parametrize("extra", [["--alpha-min", "2", "--alpha-max", "1"], ["--alpha-step", "0"]])
    def test_bad_alpha_range(self, extra, capsys):
        assert main(["sweep", "--snr-db", "10"] + extra) == 3

    def test_unwritable(self, tmp_path):
        assert main(["sweep", "--snr-db", "10", "--alpha-max", "0.6",
                     "--out", str(tmp_path / "missing" / "x.csv")]) == 1


class TestGdof:
    def test_table(self, capsys):
        assert main(["gdof", "--alpha", "2"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()[2:]
        ratios = [float(l.split()[2]) for l in lines]
        refs = [float(l.split()[3]) for l in lines]
        assert ratios == pytest.approx([0.9653732695, 0.9645280991, 0.9750588339], abs=1e-9)
        assert refs == [0.75, 0.75, 0.75]

    def test_boundary(self, capsys):
        assert main(["gdof", "--alpha", "1.01", "--powers", "100"]) == 0
        assert main(["gdof", "--alpha", "1.0"]) == 3


class TestSimulate:
    ARGS = ["simulate", "--steps", "40", "--trials", "2000"]

    def test_deterministic(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(self.ARGS + ["--seed", "42", "--out", str(a)])
        first = capsys.readouterr().out
        main(self.ARGS + ["--seed", "42", "--out", str(b)])
        assert capsys.readouterr().out == first
        assert a.read_bytes() == b.read_bytes()

    def test_zero_noise(self, capsys):
        main(self.ARGS + ["--zero-noise"])
        out = capsys.readouterr().out
        assert re.findall(r"error rate ([0-9.]+)", out) == ["0.000000", "0.000000"]

    def test_default_config_passes(self, capsys):
        assert main(["simulate"]) == 0
        out = capsys.readouterr().out
        assert "moment check" in out and "pass" in out

    def test_infeasible_rho(self, capsys):
        assert main(["simulate", "--rho", "0.9", "--trials", "10"]) == 3
        assert "rho_max" in capsys.readouterr().err

    def test_target_rate_above_scheme_rate(self, capsys):
        assert main(self.ARGS + ["--target-rate", "10"]) == 3

    def test_invariant_failure_exit(self, capsys, monkeypatch):
        import gic_feedback.cli as cli
        monkeypatch.setattr(cli, "moment_check", lambda *a, **k: ["forced"])
        assert main(self.ARGS) == 4
        assert "FAIL" in capsys.readouterr().out

    @pytest.mark.parametrize("bad", [["--steps", "x"], ["--target-rate", "1", "--half-width", "2"]])
    def test_usage(self, bad):
        with pytest.raises(SystemExit) as ei:
            main(["simulate"] + bad)
        assert ei.value.code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gic_feedback", "rate", "--a", "0", "--P", "15"],
                         capture_output=True, text=True, check=True)
    assert rate_line(res.stdout) == 2.0
