import csv
import io
import json
import math
import re
import subprocess
import sys

import pytest

from ccrit import cli
from ccrit import criticality as crit
from ccrit.checks import e2_identity_value, film_gap_root

GL = ["--alpha", "1", "--lambda", "1", "--t0", "1"]


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def text_fields(out):
    return dict(line.split(" = ", 1) for line in out.splitlines() if " = " in line)


class TestFormatting:
    @pytest.mark.parametrize("x,digits,expected", [
        (0.1, 12, "0.1"), (1.0 / 3.0, 6, "0.333333"), (0.0, 12, "0"), (True, 12, "true"),
        (7, 12, "7"), (1e-20, 12, "1e-20"), (2.5e10, 4, "2.5e+10"),
    ])
    def test_fmt(self, x, digits, expected):
        assert cli.fmt(x, digits) == expected

    def test_fmt_round_trips(self):
        for x in (math.pi, 1 / 7, 1e-300, 123456.789):
            assert float(cli.fmt(x, 15)) == pytest.approx(x, rel=1e-14)
            assert float(cli.fmt(x, 15)) == float(f"{x:.15g}")


class TestConstants:
    def test_text(self, capsys):
        code, out, _ = run(capsys, "constants")
        assert code == 0
        assert "C1 = 1.1024" in out
        assert "published 1.1024" in out
        assert "2.7657" in out and "2.6757" in out

    def test_json(self, capsys):
        code, out, _ = run(capsys, "constants", "--format", "json")
        data = json.loads(out)
        for name in ("C1", "C2", "C3"):
            assert {"value", "error_bound", "terms_used"} <= set(data[name])
        assert abs(data["C2"]["value"] - 1.6571) <= 1e-4

    def test_check_passes(self, capsys):
        code, _, _ = run(capsys, "constants", "--check")
        assert code == 0

    def test_check_fails_when_off(self, capsys, monkeypatch):
        monkeypatch.setattr(crit, "PUBLISHED_C2", 1.7)
        code, _, err = run(capsys, "constants", "--check")
        assert code == 1
        assert "deviates" in err


class TestTc:
    def test_film(self, capsys):
        code, out, _ = run(capsys, "tc", "--film", "10", *GL)
        f = text_fields(out)
        assert code == 0
        assert float(f["tc"]) == pytest.approx(0.88976, abs=5e-6)
        assert f["transition_exists"] == "true"

    def test_wire(self, capsys):
        code, out, _ = run(capsys, "tc", "--wire-area", "100", *GL)
        assert float(text_fields(out)["tc"]) == pytest.approx(0.83429, abs=1e-4)

    def test_grain(self, capsys):
        code, out, _ = run(capsys, "tc", "--grain-volume", "1000", *GL, "--format", "json")
        data = json.loads(out)
        assert data["tc"] == pytest.approx(1 - crit.c3_constant().value / 10, abs=1e-11)

    def test_film_at_min_size(self, capsys):
        lmin = repr(crit.tc_film(crit.GLParams(1, 1, 1), 1.0).min_size)
        code, out, _ = run(capsys, "tc", "--film", lmin, *GL)
        f = text_fields(out)
        assert float(f["tc"]) == 0.0
        assert f["transition_exists"] == "false"

    def test_wire_sides(self, capsys):
        code, out, _ = run(capsys, "tc", "--wire-sides", "1,2", *GL)
        assert code == 0 and math.isfinite(float(text_fields(out)["tc"]))

    @pytest.mark.parametrize("argv", [
        ["tc", *GL],
        ["tc", "--film", "1", "--wire-area", "2", *GL],
        ["tc", "--film", "1", "--alpha", "1", "--lambda", "1"],
        ["tc", "--film", "-1", *GL],
        ["tc", "--film", "1", "--alpha", "0", "--lambda", "1", "--t0", "1"],
        ["tc", "--wire-sides", "1", *GL],
        ["tc", "--film", "1", *GL, "--precision", "30"],
    ])
    def test_usage_errors(self, capsys, argv):
        code, out, err = run(capsys, *argv)
        assert code == 2
        assert out == "" and "error" in err

    def test_argparse_errors_exit_2(self, capsys):
        with pytest.raises(SystemExit) as info:
            cli.main(["tc", "--film", "abc"])
        assert info.value.code == 2
        with pytest.raises(SystemExit) as info:
            cli.main([])
        assert info.value.code == 2


class TestGap:
    def test_oracle(self, capsys):
        code, out, _ = run(capsys, "gap", "--D", "3", "--d", "1", "--lengths", "1",
                           "--m0sq", "0.05", "--lambda", "0.1", "--precision", "15")
        assert code == 0
        assert float(text_fields(out)["m_sq"]) == pytest.approx(film_gap_root(1.0, 0.05, 0.1) ** 2,
                                                                abs=1e-9)

    def test_free(self, capsys):
        code, out, _ = run(capsys, "gap", "--d", "1", "--lengths", "1", "--m0sq", "0.05", "--lambda", "0")
        assert float(text_fields(out)["m_sq"]) == 0.05

    def test_bulk_limit(self, capsys):
        code, out, _ = run(capsys, "gap", "--d", "1", "--lengths", "50", "--m0sq", "1",
                           "--lambda", "0.1", "--format", "json", "--precision", "15")
        assert abs(json.loads(out)["m_sq"] - 1.0) <= 1e-12

    def test_no_solution_exit_3(self, capsys):
        code, out, err = run(capsys, "gap", "--D", "5", "--d", "1", "--lengths", "1",
                             "--m0sq", "-5", "--lambda", "0.1")
        assert code == 3
        assert "no solution" in err and "defect" in err

    def test_bad_problem(self, capsys):
        code, _, _ = run(capsys, "gap", "--d", "2", "--lengths", "1", "--m0sq", "0", "--lambda", "0.1")
        assert code == 2


class TestEpstein:
    def test_direct(self, capsys):
        code, out, _ = run(capsys, "epstein", "--nu", "2", "--lengths", "1,1", "--method", "direct")
        f = text_fields(out)
        assert code == 0
        assert abs(float(f["value"]) - e2_identity_value()) <= 1e-7
        assert float(f["error_bound"]) >= 0.0 and int(f["terms_used"]) >= 1

    def test_both_agree(self, capsys):
        code, out, _ = run(capsys, "epstein", "--nu", "2", "--lengths", "1,1", "--method", "both",
                           "--format", "json")
        data = json.loads(out)
        bound = data["direct"]["error_bound"] + data["recurrence"]["error_bound"]
        assert abs(data["difference"]) <= bound

    def test_continued(self, capsys):
        code, out, _ = run(capsys, "epstein", "--nu", "3", "--lengths", "1,1,1", "--method", "continued")
        assert code == 0

    def test_divergent_direct(self, capsys):
        code, _, err = run(capsys, "epstein", "--nu", "0.8", "--lengths", "1,1", "--method", "direct")
        assert code == 3
        assert "Nonconvergence" in err

    def test_pole(self, capsys):
        code, _, err = run(capsys, "epstein", "--nu", "0.5", "--lengths", "1,1", "--method", "continued")
        assert code == 3

    def test_budget_exit_3(self, capsys):
        code, _, _ = run(capsys, "epstein", "--nu", "2", "--lengths", "1,1", "--method", "direct",
                         "--max-index", "10")
        assert code == 3


class TestSweep:
    def test_five_steps(self, capsys):
        code, out, _ = run(capsys, "sweep", "--geometry", "film", "--from", "1", "--to", "5",
                           "--steps", "5", *GL)
        lines = out.split("\n")
        assert lines[-1] == ""
        assert len(lines) - 1 == 6
        assert lines[0] == "size,inv_linear_size,tc,transition_exists"
        assert "\r" not in out

    def test_collinear(self, capsys):
        code, out, _ = run(capsys, "sweep", "--geometry", "film", "--from", "0.5", "--to", "20",
                           "--steps", "40", *GL, "--precision", "15")
        rows = list(csv.DictReader(io.StringIO(out)))
        pts = [(float(r["inv_linear_size"]), float(r["tc"])) for r in rows]
        slope = (pts[-1][1] - pts[0][1]) / (pts[-1][0] - pts[0][0])
        for x, y in pts:
            assert abs(pts[0][1] + slope * (x - pts[0][0]) - y) <= 1e-12

    def test_min_size_row(self, capsys):
        lmin = crit.tc_film(crit.GLParams(1, 1, 1), 1.0).min_size
        code, out, _ = run(capsys, "sweep", "--geometry", "film", "--from", repr(lmin), "--to", "5",
                           "--steps", "3", *GL)
        first = list(csv.DictReader(io.StringIO(out)))[0]
        assert float(first["tc"]) == 0.0 and first["transition_exists"] == "false"

    @pytest.mark.parametrize("geometry", ["wire", "grain"])
    def test_other_geometries(self, capsys, geometry):
        code, out, _ = run(capsys, "sweep", "--geometry", geometry, "--from", "1", "--to", "100",
                           "--steps", "4", *GL)
        assert code == 0 and len(out.splitlines()) == 5

    def test_json(self, capsys):
        code, out, _ = run(capsys, "sweep", "--geometry", "film", "--from", "1", "--to", "2",
                           "--steps", "2", *GL, "--format", "json")
        assert len(json.loads(out)) == 2

    @pytest.mark.parametrize("extra", [
        ["--from", "5", "--to", "1", "--steps", "5"],
        ["--from", "1", "--to", "5", "--steps", "1"],
        ["--from", "0", "--to", "5", "--steps", "3"],
    ])
    def test_usage(self, capsys, extra):
        code, _, _ = run(capsys, "sweep", "--geometry", "film", *extra, *GL)
        assert code == 2


class TestConfig:
    def test_file_and_override(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# material\nalpha = 1\nlambda = 1\nt0 = 1\nfilm = 10\nformat = json\n")
        code, out, _ = run(capsys, "tc", "--config", str(cfg))
        assert json.loads(out)["tc"] == pytest.approx(0.88976, abs=5e-6)
        code, out, _ = run(capsys, "tc", "--config", str(cfg), "--t0", "2")
        assert json.loads(out)["tc"] == pytest.approx(2 - crit.c1_constant() / 10, abs=1e-11)

    def test_unknown_key(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("alpha = 1\ncolour = blue\n")
        code, _, err = run(capsys, "constants", "--config", str(cfg))
        assert code == 2 and "unknown key" in err

    def test_malformed(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("alpha 1\n")
        assert run(capsys, "constants", "--config", str(cfg))[0] == 2
        cfg.write_text("precision = many\n")
        assert run(capsys, "constants", "--config", str(cfg))[0] == 2
        assert run(capsys, "constants", "--config", str(tmp_path / "missing.cfg"))[0] == 2

    def test_env_max_index(self, capsys, monkeypatch):
        monkeypatch.setenv("CCRIT_MAX_INDEX", "10")
        code, _, _ = run(capsys, "epstein", "--nu", "2", "--lengths", "1,1", "--method", "direct")
        assert code == 3
        code, _, _ = run(capsys, "epstein", "--nu", "2", "--lengths", "1,1", "--method", "direct",
                         "--max-index", "100000")
        assert code == 0


class TestOutputContract:
    def test_json_round_trip(self, capsys):
        code, out, _ = run(capsys, "tc", "--wire-area", "7", *GL, "--format", "json", "--precision", "8")
        data = json.loads(out)
        res = crit.tc_wire_square(crit.GLParams(1, 1, 1), 7.0)
        assert data["tc"] == float(f"{res.tc:.8g}")
        assert data["min_size"] == float(f"{res.min_size:.8g}")

    def test_csv_single_record(self, capsys):
        code, out, _ = run(capsys, "tc", "--film", "3", *GL, "--format", "csv")
        lines = out.splitlines()
        assert lines[0] == "tc,c_constant,min_size,transition_exists" and len(lines) == 2

    def test_deterministic(self, capsys):
        argv = ["constants", "--format", "json"]
        assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


class TestVerify:
    def test_passes(self, capsys):
        code, out, _ = run(capsys, "verify")
        assert code == 0
        rows = [l for l in out.splitlines() if re.match(r"^\s*\d+  (PASS|FAIL)  ", l)]
        assert len(rows) >= 12 and all("PASS" in r for r in rows)
        c3 = next(r for r in rows if "C3" in r)
        assert "2.7657" in c3 and "2.6757" in c3 and "DISCREPANCY" in c3

    def test_json(self, capsys):
        code, out, _ = run(capsys, "verify", "--format", "json")
        data = json.loads(out)
        assert data["passed"] and len(data["checks"]) >= 12

    def test_injected_failure(self, capsys):
        code, out, _ = run(capsys, "verify", "--max-index", "1")
        assert code == 1
        assert "FAIL" in out

    def test_console_entry(self):
        proc = subprocess.run([sys.executable, "-m", "ccrit", "constants", "--format", "csv"],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == 0
        assert proc.stdout.startswith("C1.value,")
