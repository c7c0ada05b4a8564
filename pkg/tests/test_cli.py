import argparse
import csv
import io
import json
import math
import subprocess
import sys

import pytest

from fspec.cli import main, parse_angle, parse_mu, parse_point, parse_range
from fspec.config import RunConfig, ScanRecord, format_number, load_config
from fspec.errors import InvalidArgument
from oracles import J0_REFERENCE

MU0 = math.sqrt(6.0 / J0_REFERENCE)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestParsing:
    @pytest.mark.parametrize(
        "token, value",
        [("pi", math.pi), ("-pi", -math.pi), ("pi/2", math.pi / 2), ("0.5pi", math.pi / 2),
         ("2*pi/3", 2 * math.pi / 3), ("1.25", 1.25), ("-1e-3", -1e-3)],
    )
    def test_angle(self, token, value):
        assert parse_angle(token) == pytest.approx(value)

    def test_point_wraps(self):
        assert parse_point("3pi,0,-pi") == pytest.approx((math.pi, 0.0, math.pi))

    @pytest.mark.parametrize("bad", ["1,2", "a,b,c", "nan,0,0"])
    def test_bad_point(self, bad):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_point(bad)

    def test_mu_multiples(self):
        assert parse_mu("mu0") == pytest.approx(MU0, rel=1e-9)
        assert parse_mu("1.5mu0") == pytest.approx(1.5 * MU0, rel=1e-9)
        assert parse_mu("0.3") == 0.3
        with pytest.raises(argparse.ArgumentTypeError):
            parse_mu("xmu0")

    def test_range(self):
        assert parse_range("-1,2") == [-1.0, 2.0]
        with pytest.raises(argparse.ArgumentTypeError):
            parse_range("1,2,3")


class TestCommands:
    def test_band(self, capsys):
        assert run(capsys, "band", "--k", "0,0,0")[:2] == (0, "m=0 M=9.375\n")
        assert run(capsys, "band", "--k", "pi,pi,pi")[:2] == (0, "m=8.625 M=18\n")

    def test_integral(self, capsys):
        code, out, _ = run(capsys, "integral", "--k", "0,0,0", "--z", "0", "--tol", "1e-9")
        assert code == 0
        assert float(out.split()[0].split("=")[1]) == pytest.approx(J0_REFERENCE, abs=1e-7)

    def test_det_virtual_level(self, capsys):
        code, out, _ = run(capsys, "det", "--k", "pi,pi,pi", "--z", "18", "--mu", "mu0")
        assert code == 0
        assert abs(float(out.split()[0].split("=")[1])) < 1e-6

    def test_det_inside_band_is_usage_error(self, capsys):
        code, _, err = run(capsys, "det", "--k", "0,0,0", "--z", "4")
        assert code == 2 and "band" in err

    def test_eigen(self, capsys):
        code, out, _ = run(capsys, "eigen", "--k", "0,0,0", "--gamma", "-1", "--mu", "1", "--side", "below")
        assert code == 0
        z = float(out.split()[1].split("=")[1])
        assert z == pytest.approx(-14.478680665780931, abs=1e-7)

    def test_eigen_none(self, capsys):
        code, out, _ = run(capsys, "eigen", "--k", "0,0,0", "--mu", "0.5mu0")
        assert code == 0
        assert out.count("none") == 2

    def test_classify(self, capsys):
        code, out, _ = run(capsys, "classify", "--gamma", "6", "--mu", "mu0")
        assert (code, out) == (0, "lower=VirtualLevelBelow upper=VirtualLevelAbove\n")

    def test_sweep_exit_codes(self, capsys):
        assert run(capsys, "sweep", "--grid", "3", "--z", "-1,-0.01,18.01")[0] == 0
        code, out, _ = run(capsys, "sweep", "--grid", "3", "--z", "-0.01", "--mu", "2mu0")
        assert code == 1 and "violations=0" not in out

    def test_expansion_json(self, capsys):
        code, out, _ = run(capsys, "expansion", "--end", "lower")
        data = json.loads(out)
        assert code == 0 and data["fitted_exponent"] == pytest.approx(0.5, abs=0.005)

    def test_scan_csv(self, capsys, tmp_path):
        path = tmp_path / "scan.csv"
        code, _, _ = run(capsys, "scan", "--gamma-range", "-1,13", "--mu-range", "0.5mu0",
                         "--steps", "3", "--out", str(path))
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(path.read_text())))
        assert tuple(rows[0]) == ScanRecord.HEADER
        assert [r["gamma"] for r in rows] == ["-1", "6", "13"]
        assert rows[0]["regime_lower"] == "unique" and rows[0]["z_below"]
        assert rows[1]["regime_lower"] == "none" and rows[1]["z_below"] == ""
        assert rows[2]["regime_upper"] == "unique" and float(rows[2]["z_above"]) > 18

    def test_bad_output_path(self, capsys, tmp_path):
        code, _, err = run(capsys, "band", "--k", "0,0,0", "--out", str(tmp_path / "no" / "x"))
        assert code == 2 and "I/O" in err

    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["band"])
        assert exc.value.code == 2

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "fspec", "band", "--k", "0,0,0"],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == 0 and proc.stdout == "m=0 M=9.375\n"


class TestVerifyAll:
    def test_subset_passes_and_is_deterministic(self, capsys):
        args = ("verify-all", "--only", "band_edges", "--only", "quadratic_model")
        code, first, _ = run(capsys, *args)
        assert code == 0
        assert run(capsys, *args)[1] == first
        checks = json.loads(first)
        assert {c["status"] for c in checks} == {"pass"}
        assert set(checks[0]) >= {"check_name", "status", "measured", "expected", "tolerance"}

    def test_loose_tolerance_reports_error(self, capsys):
        code, out, _ = run(capsys, "verify-all", "--only", "threshold_symmetry", "--tol", "1e-2")
        assert code == 1
        assert "error" in {c["status"] for c in json.loads(out)}

    def test_config_file_changes_outcome(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"sweep_mu_factor": 2.0, "sweep_grid": 3}))
        code, out, _ = run(capsys, "verify-all", "--config", str(cfg), "--only", "sweep")
        assert code == 1
        assert json.loads(out)[0]["status"] == "fail"


class TestConfig:
    def test_precedence(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"seed": 1, "sweep_grid": 5, "quad_tol": 1e-8}))
        env = {"FSPEC_SEED": "2", "FSPEC_SWEEP_Z": "-1,19", "UNRELATED": "x"}
        cfg = load_config(str(path), env, {"seed": 3, "root_tol": None})
        assert (cfg.seed, cfg.sweep_grid, cfg.quad_tol) == (3, 5, 1e-8)
        assert cfg.sweep_z == (-1.0, 19.0)
        assert cfg.root_tol == RunConfig().root_tol

    @pytest.mark.parametrize("data", [{"bogus": 1}, {"sweep_grid": 1}, {"quad_tol": -1}, {"seed": "x"}])
    def test_rejects(self, tmp_path, data):
        path = tmp_path / "c.json"
        path.write_text(json.dumps(data))
        with pytest.raises(InvalidArgument):
            load_config(str(path), {})

    def test_not_json(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{")
        with pytest.raises(InvalidArgument):
            load_config(str(path), {})

    def test_format_number(self):
        assert format_number(None) == ""
        assert float(format_number(0.1 + 0.2)) == 0.1 + 0.2
