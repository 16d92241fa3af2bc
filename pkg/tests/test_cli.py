import io
import json

import pytest

from twtl.cli import main

FORMULA = "[H^2 A]^[1,5]\n"
CONFIG = {"atoms": {"A": {"signal": "x", "op": ">=", "sigma": 4.0,
                          "min": 0.0, "max": 8.0}}}
TRACE = "time,x\n0,5.0\n1,4.5\n2,4.2\n3,4.8\n4,5.0\n5,6.0\n"


@pytest.fixture
def files(tmp_path):
    paths = {
        "formula": tmp_path / "f.twtl",
        "config": tmp_path / "cfg.json",
        "trace": tmp_path / "trace.csv",
    }
    paths["formula"].write_text(FORMULA)
    paths["config"].write_text(json.dumps(CONFIG))
    paths["trace"].write_text(TRACE)
    return {k: str(v) for k, v in paths.items()}


def run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


class TestParseCommand:
    def test_ok(self, files, capsys):
        rc, out, _ = run(capsys, "parse", "--formula", files["formula"],
                         "--config", files["config"])
        assert rc == 0
        assert out.splitlines() == ["[H^2 A]^[1,5]", "horizon: 5"]

    def test_syntax_error(self, files, capsys, tmp_path):
        bad = tmp_path / "bad.twtl"
        bad.write_text("[H^1 A]^[3,1]")
        rc, _, err = run(capsys, "parse", "--formula", str(bad))
        assert rc == 2
        assert "malformed time bound" in err

    def test_unresolved_atom(self, files, capsys, tmp_path):
        bad = tmp_path / "bad.twtl"
        bad.write_text("H^1 Zz")
        rc, _, err = run(capsys, "parse", "--formula", str(bad),
                         "--config", files["config"])
        assert rc == 2
        assert "Zz" in err


class TestCheckCommand:
    def test_satisfied(self, files, capsys):
        rc, out, _ = run(capsys, "check", "--formula", files["formula"],
                         "--config", files["config"], "--trace", files["trace"])
        assert rc == 0
        assert out.startswith("sat rho=0.8 eta=")

    def test_violated(self, files, capsys, tmp_path):
        trace = tmp_path / "bad_trace.csv"
        trace.write_text("time,x\n" + "".join(f"{t},1.0\n" for t in range(6)))
        rc, out, _ = run(capsys, "check", "--formula", files["formula"],
                         "--config", files["config"], "--trace", str(trace))
        assert rc == 1
        assert out.startswith("unsat rho=-3")

    def test_missing_trace_file(self, files, capsys):
        rc, _, err = run(capsys, "check", "--formula", files["formula"],
                         "--config", files["config"], "--trace", "/nope.csv")
        assert rc == 2
        assert "error" in err

    def test_rho_eta_values(self, files, capsys):
        rc, out, _ = run(capsys, "rho", "--formula", files["formula"],
                         "--config", files["config"], "--trace", files["trace"])
        assert rc == 0 and float(out) == pytest.approx(0.8)
        rc, out, _ = run(capsys, "eta", "--formula", files["formula"],
                         "--config", files["config"], "--trace", files["trace"])
        assert rc == 0 and -1.0 <= float(out) <= 1.0

    def test_eta_needs_bounds(self, files, capsys, tmp_path):
        cfg = tmp_path / "nobounds.json"
        cfg.write_text(json.dumps(
            {"atoms": {"A": {"signal": "x", "op": ">=", "sigma": 4.0}}}))
        rc, _, err = run(capsys, "eta", "--formula", files["formula"],
                         "--config", str(cfg), "--trace", files["trace"])
        assert rc == 2
        assert "bounds" in err


class TestMonitorCommand:
    HEADER = "t,rho_lo,rho_hi,eta_lo,eta_hi,verdict_rho,verdict_eta"

    def test_csv_all_steps(self, files, capsys):
        rc, out, _ = run(capsys, "monitor", "--formula", files["formula"],
                         "--config", files["config"], "--trace", files["trace"])
        lines = out.splitlines()
        assert rc == 0
        assert lines[0] == self.HEADER
        assert len(lines) == 7
        assert lines[-1].split(",")[0] == "5"
        assert lines[-1].endswith("satisfied,satisfied")

    def test_tau_filter(self, files, capsys):
        rc, out, _ = run(capsys, "monitor", "--formula", files["formula"],
                         "--config", files["config"], "--trace", files["trace"],
                         "--tau", "2,5")
        lines = out.splitlines()
        assert rc == 0
        assert [row.split(",")[0] for row in lines[1:]] == ["2", "5"]

    def test_jsonl_and_out_file(self, files, capsys, tmp_path):
        out_path = tmp_path / "mon.jsonl"
        rc, out, _ = run(capsys, "monitor", "--formula", files["formula"],
                         "--config", files["config"], "--trace", files["trace"],
                         "--format", "jsonl", "--out", str(out_path))
        assert rc == 0
        rows = [json.loads(line) for line in out_path.read_text().splitlines()]
        assert len(rows) == 6
        assert rows[3]["verdict_rho"] == "satisfied"
        assert rows[0]["rho_lo"] == -10.0
        assert rows[-1]["rho_lo"] == rows[-1]["rho_hi"] == pytest.approx(0.8)

    def test_short_trace_is_inconclusive(self, files, capsys, tmp_path):
        trace = tmp_path / "short.csv"
        trace.write_text("time,x\n0,5.0\n1,4.5\n")
        rc, out, _ = run(capsys, "monitor", "--formula", files["formula"],
                         "--config", files["config"], "--trace", str(trace))
        assert rc == 3
        assert out.splitlines()[-1].endswith("inconclusive,inconclusive")

    def test_stream_mode(self, files, capsys, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.StringIO(TRACE))
        rc, out, _ = run(capsys, "monitor", "--formula", files["formula"],
                         "--config", files["config"], "--stream")
        assert rc == 0
        assert len(out.splitlines()) == 7

    def test_stream_bad_header(self, files, capsys, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.StringIO("a,b\n1,2\n"))
        rc, _, err = run(capsys, "monitor", "--formula", files["formula"],
                         "--config", files["config"], "--stream")
        assert rc == 2
        assert "header" in err

    def test_custom_rho_bounds(self, files, capsys, tmp_path):
        trace = tmp_path / "one.csv"
        trace.write_text("time,x\n0,5.0\n")
        rc, out, _ = run(capsys, "monitor", "--formula", files["formula"],
                         "--config", files["config"], "--trace", str(trace),
                         "--rho-bot", "-3", "--rho-top", "3")
        assert rc == 3
        row = out.splitlines()[1].split(",")
        assert (row[1], row[2]) == ("-3", "3")

    def test_conservative_eta_widens(self, files, capsys, tmp_path):
        trace = tmp_path / "one.csv"
        trace.write_text("time,x\n0,5.0\n")
        rows = {}
        for flag in ([], ["--conservative-eta"]):
            rc, out, _ = run(capsys, "monitor", "--formula", files["formula"],
                             "--config", files["config"], "--trace", str(trace), *flag)
            assert rc == 3
            row = out.splitlines()[1].split(",")
            rows[bool(flag)] = (float(row[3]), float(row[4]))
        assert rows[True][0] <= rows[False][0]
        assert rows[True][1] >= rows[False][1]


class TestCaseStudyCommand:
    def test_writes_bundle(self, capsys, tmp_path):
        out_dir = tmp_path / "cs"
        rc, out, _ = run(capsys, "casestudy", "--out", str(out_dir))
        assert rc == 0
        assert "horizon: 50" in out
        for name in ("formula.twtl", "predicates.json", "trace_nominal.csv",
                     "trace_tight.csv", "monitor_nominal.csv", "monitor_tight.csv"):
            assert (out_dir / name).exists()
        final = (out_dir / "monitor_nominal.csv").read_text().splitlines()[-1]
        assert final.endswith("satisfied,satisfied")
