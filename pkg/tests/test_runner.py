import csv
import io
import json

import pytest

from forge import collatz, runner
from forge.errors import CheckpointParseError, DomainError, IntegrityError
from forge.runner import JobSpec

from .oracles import minimal_partition_brute


def _spec(tmp_path, task="collatz_verify", lo=2, hi=20000, chunk=1000, workers=2, name="job.ckpt", **params):
    return JobSpec(task, lo, hi, chunk, workers, params, str(tmp_path / name))


def _lines(path):
    return path.read_text().splitlines()


def test_digest_is_canonical():
    a = runner.digest((1, 2), "verified", {"b": 1, "a": [1, 2.5, None, True]})
    b = runner.digest((1, 2), "verified", {"a": [1, 2.5, None, True], "b": 1})
    assert a == b and len(a) == 16
    # bool and int are tagged apart
    assert runner.digest((1, 2), "verified", {"a": 1}) != runner.digest((1, 2), "verified", {"a": True})


def test_job_id_ignores_workers_and_path(tmp_path):
    a = _spec(tmp_path, workers=1, name="a")
    b = _spec(tmp_path, workers=8, name="b")
    assert a.job_id == b.job_id
    assert a.job_id != _spec(tmp_path, chunk=999).job_id


def test_chunks_tile_the_range(tmp_path):
    s = _spec(tmp_path, lo=2, hi=2500, chunk=1000)
    assert s.chunks() == [(2, 1001), (1002, 2001), (2002, 2500)]


@pytest.mark.parametrize("workers", [1, 2, 8])
def test_digests_independent_of_workers(tmp_path, workers):
    ref = runner.run_job(_spec(tmp_path, workers=1, name="ref"))
    got = runner.run_job(_spec(tmp_path, workers=workers, name=f"w{workers}"))
    assert got.digests == ref.digests
    assert got.aggregate == ref.aggregate
    assert got.status == runner.COMPLETED


def test_checkpoint_file_layout(tmp_path):
    rep = runner.run_job(_spec(tmp_path, hi=5001))
    lines = _lines(tmp_path / "job.ckpt")
    header = json.loads(lines[0])
    assert header["format"] == "forge-ckpt/1" and header["job_id"] == rep.job_id
    first = json.loads(lines[1])
    assert set(first) == {"job_id", "chunk", "status", "summary", "digest", "wall_time_ms"}
    assert [json.loads(x)["chunk"] for x in lines[1:]] == [list(c) for c in rep.spec.chunks()]


def test_collatz_job_matches_direct_scan(tmp_path):
    rep = runner.run_job(_spec(tmp_path, hi=10**5, chunk=7919, workers=3))
    direct = collatz.verify_interval(2, 10**5)
    assert rep.aggregate["worst_stopping_time"] == direct.worst_stopping_time
    assert rep.aggregate["worst_excursion"] == direct.worst_excursion
    assert rep.aggregate["seeds"] == 10**5 - 1


def test_resume_after_interrupt(tmp_path):
    spec = _spec(tmp_path)
    full = runner.run_job(_spec(tmp_path, name="full"))
    part = runner.run_job(spec, stop_after=7)
    assert part.status == runner.INTERRUPTED and len(part.checkpoints) == 7
    done = runner.resume_job(spec.output_path, recheck_fraction=0.2, seed=3)
    assert done.status == runner.COMPLETED
    assert done.digests == full.digests
    assert len(done.rechecked) == 1  # 20% of 7, rounded
    assert runner.check_tiling(spec, done.checkpoints)
    assert len(_lines(tmp_path / "job.ckpt")) == 1 + len(spec.chunks())


def test_resume_truncates_torn_line(tmp_path):
    spec = _spec(tmp_path)
    runner.run_job(spec, stop_after=5)
    path = tmp_path / "job.ckpt"
    with open(path, "a") as fh:
        fh.write('{"job_id":"' + spec.job_id + '","chunk":[50')
    done = runner.resume_job(path)
    assert done.status == runner.COMPLETED
    assert len(_lines(path)) == 1 + len(spec.chunks())
    assert all(json.loads(x) for x in _lines(path))


def test_resume_restores_missing_final_newline(tmp_path):
    spec = _spec(tmp_path)
    runner.run_job(spec, stop_after=3)
    path = tmp_path / "job.ckpt"
    path.write_text(path.read_text().rstrip("\n"))
    assert runner.resume_job(path).status == runner.COMPLETED
    assert len(_lines(path)) == 1 + len(spec.chunks())


def test_corrupt_middle_line_names_line(tmp_path):
    runner.run_job(_spec(tmp_path))
    path = tmp_path / "job.ckpt"
    lines = _lines(path)
    lines[4] = lines[4][:20]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(CheckpointParseError) as exc:
        runner.resume_job(path)
    assert exc.value.lineno == 5


def test_bad_header(tmp_path):
    path = tmp_path / "x.ckpt"
    path.write_text('{"format":"other/9"}\n')
    with pytest.raises(CheckpointParseError) as exc:
        runner.load_checkpoint(path)
    assert exc.value.lineno == 1


def test_tampered_summary_is_recomputed(tmp_path):
    spec = _spec(tmp_path)
    ref = runner.run_job(spec)
    path = tmp_path / "job.ckpt"
    lines = _lines(path)
    d = json.loads(lines[3])
    d["summary"]["worst_excursion"] += 1  # digest no longer matches
    lines[3] = json.dumps(d, separators=(",", ":"))
    path.write_text("\n".join(lines) + "\n")
    done = runner.resume_job(path, recheck_fraction=0)
    assert done.recomputed == [tuple(d["chunk"])]
    assert done.digests == ref.digests


def test_forged_chunk_fails_recheck(tmp_path):
    spec = _spec(tmp_path, hi=5001)
    runner.run_job(spec)
    path = tmp_path / "job.ckpt"
    lines = _lines(path)
    d = json.loads(lines[2])
    d["summary"]["worst_excursion"] += 1
    d["digest"] = runner.digest(tuple(d["chunk"]), d["status"], d["summary"])  # self-consistent forgery
    lines[2] = json.dumps(d, separators=(",", ":"))
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(IntegrityError) as exc:
        runner.resume_job(path, recheck_fraction=1.0)
    assert exc.value.chunk == tuple(d["chunk"])


def test_nondeterministic_task_fails_recheck(tmp_path, monkeypatch):
    spec = _spec(tmp_path, hi=5001)
    runner.run_job(spec)
    real = runner.TASKS["collatz_verify"]
    bumped = lambda s, t, lo, hi: (runner.VERIFIED, {**real.run(s, t, lo, hi)[1], "seeds": -1})  # noqa: E731
    monkeypatch.setitem(runner.TASKS, "collatz_verify", runner.Task(bumped, real.aggregate, real.columns, real.rows))
    with pytest.raises(IntegrityError):
        runner.resume_job(spec.output_path, recheck_fraction=0.01)


def test_resume_rejects_other_spec(tmp_path):
    spec = _spec(tmp_path)
    runner.run_job(spec, stop_after=2)
    with pytest.raises(DomainError):
        runner.resume_job(spec.output_path, spec=_spec(tmp_path, hi=30000))


def test_counterexample_halts_job(tmp_path, monkeypatch):
    real = collatz.verify_interval

    def fake(lo, hi, step_budget=collatz.DEFAULT_BUDGET):
        res = real(lo, hi, step_budget)
        if lo <= 7777 <= hi:
            return collatz.CollatzVerificationResult((lo, hi), collatz.CANDIDATE, res.worst_stopping_time, res.worst_excursion, 7777)
        return res

    monkeypatch.setattr(collatz, "verify_interval", fake)
    rep = runner.run_job(_spec(tmp_path, workers=4))
    assert rep.status == runner.HALTED and rep.witness == 7777
    assert rep.checkpoints[-1].chunk == (7002, 8001)
    # nothing past the halting chunk is published
    assert len(_lines(tmp_path / "job.ckpt")) == 1 + 8


def test_retry_once_then_fail(tmp_path, monkeypatch):
    calls = []
    real = runner.TASKS["collatz_verify"]

    def flaky(s, t, lo, hi):
        calls.append(lo)
        if lo == 1002 and calls.count(1002) == 1:
            raise RuntimeError("transient")
        return real.run(s, t, lo, hi)

    monkeypatch.setitem(runner.TASKS, "collatz_verify", runner.Task(flaky, real.aggregate, real.columns, real.rows))
    assert runner.run_job(_spec(tmp_path, hi=3001, workers=1)).status == runner.COMPLETED

    def broken(s, t, lo, hi):
        if lo == 1002:
            raise RuntimeError("persistent")
        return real.run(s, t, lo, hi)

    monkeypatch.setitem(runner.TASKS, "collatz_verify", runner.Task(broken, real.aggregate, real.columns, real.rows))
    rep = runner.run_job(_spec(tmp_path, hi=3001, workers=1, name="b"))
    assert rep.status == runner.JOB_FAILED
    assert rep.checkpoints[-1].status == runner.FAILED and "persistent" in rep.checkpoints[-1].summary["error"]


def test_goldbach_job_max_p_min(tmp_path):
    rep = runner.run_job(_spec(tmp_path, "goldbach_verify", 4, 20000, 5000, method=2, delta=16))
    brute = max(minimal_partition_brute(n)[0] for n in range(4, 20001, 2))
    assert rep.status == runner.COMPLETED
    assert rep.aggregate["max_p_min"] == brute
    assert rep.aggregate["evens"] == 9999


def test_goldbach_job_method_one(tmp_path):
    rep = runner.run_job(_spec(tmp_path, "goldbach_verify", 10**4, 2 * 10**4, 2000, method=1, delta=200))
    assert rep.status == runner.COMPLETED and rep.aggregate["uncovered"] == 0


def test_goldbach_job_without_auto_delta_fails(tmp_path):
    rep = runner.run_job(_spec(tmp_path, "goldbach_verify", 10**4, 11000, 1000, method=2, delta=50, auto_delta=False))
    assert rep.status == runner.JOB_FAILED


def test_gilbreath_job(tmp_path):
    rep = runner.run_job(_spec(tmp_path, "gilbreath_verify", 3, 100000, 25000))
    assert rep.status == runner.COMPLETED
    assert rep.aggregate["base_count"] == 9592


def test_pnt_job_csv(tmp_path):
    spec = _spec(tmp_path, "pnt_table", 10, 10**6, 10**5, checkpoints=[10, 100, 1000, 10**4, 10**5, 10**6])
    rep = runner.run_job(spec)
    text = runner.emit_report(rep, "csv")
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == runner.PNT_COLUMNS
    assert [int(r[1]) for r in rows[1:]] == [4, 25, 168, 1229, 9592, 78498]
    assert float(rows[-1][5]) == pytest.approx(10**6 / (6 * 2.302585092994046 - 1.08366))


def test_sail_rows(tmp_path):
    rep = runner.run_job(_spec(tmp_path, "goldbach_sail", 4, 10**5, 20000))
    rows = rep.rows()
    assert len(rows) == 49999
    assert rows[0] == [4, 2] and rows[-1][0] == 10**5
    assert dict(rep.aggregate["S"])[19] == 98


def test_gaps_job_matches_direct(tmp_path, table_1e6):
    from forge.asymptotics import gap_statistics

    rep = runner.run_job(_spec(tmp_path, "gap_stats", 2, 10**6, 77777))
    direct = gap_statistics(table_1e6, 10**6)
    assert dict(rep.rows()) == direct.histogram
    assert rep.aggregate["cramer_max"] == pytest.approx(direct.cramer_max)
    assert rep.aggregate["champion_gap"] == direct.champion_gap


def test_partitions_job(tmp_path):
    rep = runner.run_job(_spec(tmp_path, "partitions_compare", 1, 300, 64, step=10))
    ns = [r[0] for r in rep.rows()]
    assert ns == list(range(1, 301, 10))
    assert dict((r[0], r[1]) for r in rep.rows())[101] == 214481126


def test_report_roundtrip(tmp_path):
    spec = _spec(tmp_path, hi=8001)
    ref = runner.run_job(spec)
    loaded = runner.load_report(spec.output_path)
    assert loaded.digests == ref.digests and loaded.aggregate == ref.aggregate
    doc = json.loads(runner.emit_report(loaded, "json", tmp_path / "r.json"))
    assert doc["job_id"] == ref.job_id and doc["status"] == "completed"
    assert [r["chunk_lo"] for r in doc["rows"]] == [c[0] for c in spec.chunks()]
    csv_rows = list(csv.DictReader(io.StringIO(runner.emit_report(loaded, "csv"))))
    assert [r["digest"] for r in csv_rows] == [r["digest"] for r in doc["rows"]]
    with pytest.raises(DomainError):
        runner.emit_report(loaded, "xml")


@pytest.mark.parametrize(
    "task, lo, params",
    [
        ("nope", 2, {}),
        ("collatz_verify", 0, {}),
        ("collatz_verify", 2, {"step_budget": 0}),
        ("collatz_verify", 2, {"delta": 3}),
        ("goldbach_verify", 4, {"method": 3}),
        ("goldbach_verify", 4, {"delta": "64"}),
        ("goldbach_verify", 4, {"auto_delta": 1}),
        ("goldbach_verify", 2, {}),
    ],
)
def test_schema_validation(tmp_path, task, lo, params):
    with pytest.raises(DomainError):
        JobSpec(task, lo, 100, 10, 1, params, str(tmp_path / "x")).validate()


def test_forge_workers_env(monkeypatch, tmp_path):
    monkeypatch.setenv("FORGE_WORKERS", "3")
    assert runner.default_workers() == 3
    assert JobSpec("collatz_verify", 2, 10, 5).workers == 3
    monkeypatch.setenv("FORGE_WORKERS", "zero")
    with pytest.raises(DomainError):
        runner.default_workers()
    monkeypatch.setenv("FORGE_WORKERS", "0")
    with pytest.raises(DomainError):
        runner.default_workers()
    monkeypatch.delenv("FORGE_WORKERS")
    assert runner.default_workers() >= 1
