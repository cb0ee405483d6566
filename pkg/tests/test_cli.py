import json

import pytest

from forge import collatz, runner
from forge.cli import _int, main


def test_int_forms():
    assert _int("1e6") == _int("10**6") == _int("1_000_000") == 10**6


def test_usage_errors_exit_64(capsys):
    assert main([]) == 64
    assert main(["collatz", "verify", "--from", "x", "--to", "9"]) == 64
    assert main(["goldbach", "minimal", "7"]) == 64  # odd n is a domain error
    assert main(["run", "--task", "collatz_verify", "--from", "2", "--to", "9", "--chunk", "0", "--out", "/dev/null"]) == 64


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0


def test_collatz_verify_ok(capsys):
    assert main(["collatz", "verify", "--from", "2", "--to", "1e5"]) == 0
    assert "verified" in capsys.readouterr().out


def test_collatz_candidate_exits_2(capsys):
    assert main(["collatz", "verify", "--from", "2", "--to", "100", "--budget", "5"]) == 2


def test_trajectory(capsys):
    assert main(["collatz", "trajectory", "27"]) == 0
    out = capsys.readouterr().out
    assert "111" in out and "9232" in out


def test_goldbach_commands(capsys, tmp_path):
    assert main(["goldbach", "minimal", "100"]) == 0
    assert "3 + 97" in capsys.readouterr().out
    assert main(["goldbach", "verify", "--from", "10000", "--to", "11000", "--method", "2", "--delta", "50"]) == 1
    assert main(["goldbach", "verify", "--from", "10000", "--to", "11000", "--method", "2", "--delta", "50", "--auto"]) == 0
    out = tmp_path / "sail.csv"
    assert main(["goldbach", "sail", "--to", "1000", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "even_n,p_min"


def test_other_commands(capsys, tmp_path):
    assert main(["gilbreath", "verify", "--prime-bound", "10000"]) == 0
    assert main(["pnt", "table", "--checkpoints", "1e5", "1e6"]) == 0
    assert main(["pnt", "theta", "--x", "1000"]) == 0
    assert main(["gaps", "stats", "--to", "1e5"]) == 0
    assert main(["gaps", "bands", "--kmax", "4"]) == 0
    assert main(["partitions", "exact", "200"]) == 0
    assert "3972999029388" in capsys.readouterr().out
    assert main(["partitions", "compare", "--to", "50", "--step", "7"]) == 0


def test_run_resume_report(capsys, tmp_path):
    ckpt = tmp_path / "c.ckpt"
    base = ["run", "--task", "collatz_verify", "--from", "2", "--to", "50000", "--chunk", "5000", "--out", str(ckpt)]
    assert main(base + ["--workers", "2"]) == 0
    assert main(["resume", str(ckpt)]) == 0
    out = tmp_path / "r.json"
    assert main(["report", str(ckpt), "--format", "json", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["status"] == "completed"


def test_counterexample_run_exits_2(capsys, tmp_path, monkeypatch):
    real = collatz.verify_interval

    def fake(lo, hi, step_budget=collatz.DEFAULT_BUDGET):
        r = real(lo, hi, step_budget)
        if lo <= 12345 <= hi:
            return collatz.CollatzVerificationResult((lo, hi), collatz.CANDIDATE, r.worst_stopping_time, r.worst_excursion, 12345)
        return r

    monkeypatch.setattr(collatz, "verify_interval", fake)
    code = main(["run", "--task", "collatz_verify", "--from", "2", "--to", "50000", "--chunk", "5000",
                 "--out", str(tmp_path / "c.ckpt")])
    assert code == 2
    assert "12345" in capsys.readouterr().out


def test_integrity_error_exits_3(capsys, tmp_path):
    ckpt = tmp_path / "c.ckpt"
    main(["run", "--task", "collatz_verify", "--from", "2", "--to", "20000", "--chunk", "5000", "--out", str(ckpt)])
    lines = ckpt.read_text().splitlines()
    d = json.loads(lines[1])
    d["summary"]["worst_stopping_time"] += 1
    d["digest"] = runner.digest(tuple(d["chunk"]), d["status"], d["summary"])
    lines[1] = json.dumps(d)
    ckpt.write_text("\n".join(lines) + "\n")
    assert main(["resume", str(ckpt), "--recheck", "1"]) == 3


def test_parse_error_exits_3(capsys, tmp_path):
    ckpt = tmp_path / "c.ckpt"
    main(["run", "--task", "collatz_verify", "--from", "2", "--to", "20000", "--chunk", "5000", "--out", str(ckpt)])
    lines = ckpt.read_text().splitlines()
    lines[2] = "garbage"
    ckpt.write_text("\n".join(lines) + "\n")
    assert main(["resume", str(ckpt)]) == 3
    assert ":3:" in capsys.readouterr().err


def test_interrupted_report_exits_0_and_says_so(capsys, tmp_path):
    spec = runner.JobSpec("collatz_verify", 2, 20000, 5000, 1, {}, str(tmp_path / "c.ckpt"))
    runner.run_job(spec, stop_after=1)
    assert main(["report", spec.output_path, "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "interrupted"
