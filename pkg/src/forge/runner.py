"""Batch jobs: chunked dispatch over a thread pool, checkpoints, resume, reports.

A checkpoint file is line-delimited JSON.  The first line is a header
``{"format": "forge-ckpt/1", "job_id": ..., "spec": {...}}``; each later line
records one finished chunk.  Lines are appended in ascending chunk order only,
so a chunk is never published before every chunk below it.  For Collatz jobs
that ordering is what makes a "verified" stopping-time result sound.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import random
import struct
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import asymptotics, collatz, gilbreath, goldbach, partitions
from .errors import (
    CheckpointParseError,
    CounterexampleFound,
    DomainError,
    IntegrityError,
)
from .primes import MAX_BOUND, PrimeTable, build_table

FORMAT = "forge-ckpt/1"
WORKERS_ENV = "FORGE_WORKERS"

VERIFIED = "verified"
FAILED = "failed"
OVERFLOW = "overflow"
COUNTEREXAMPLE = "counterexample"

COMPLETED = "completed"
HALTED = "counterexample"
INTERRUPTED = "interrupted"
JOB_FAILED = "failed"
JOB_OVERFLOW = "overflow"


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise DomainError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return n


# ---------------------------------------------------------------------------
# canonical encoding and digests


def canonical_bytes(obj: Any) -> bytes:
    """Type-tagged little-endian encoding; dict keys are sorted."""
    out = bytearray()
    _encode(obj, out)
    return bytes(out)


def _encode(obj: Any, out: bytearray) -> None:
    if obj is None:
        out += b"n"
    elif isinstance(obj, bool):
        out += b"t" if obj else b"F"
    elif isinstance(obj, int):
        size = max(1, (obj.bit_length() + 8) // 8)
        out += b"i" + struct.pack("<I", size) + obj.to_bytes(size, "little", signed=True)
    elif isinstance(obj, float):
        out += b"f" + struct.pack("<d", obj)
    elif isinstance(obj, str):
        raw = obj.encode()
        out += b"s" + struct.pack("<Q", len(raw)) + raw
    elif isinstance(obj, (list, tuple)):
        out += b"l" + struct.pack("<Q", len(obj))
        for item in obj:
            _encode(item, out)
    elif isinstance(obj, dict):
        out += b"d" + struct.pack("<Q", len(obj))
        for key in sorted(obj):
            _encode(str(key), out)
            _encode(obj[key], out)
    else:
        raise TypeError(f"cannot encode {type(obj).__name__}")


def digest(chunk: tuple[int, int], status: str, summary: dict) -> str:
    payload = canonical_bytes([list(chunk), status, summary])
    return hashlib.blake2b(payload, digest_size=8).hexdigest()


# ---------------------------------------------------------------------------
# job spec and task schemas


@dataclass(frozen=True)
class Param:
    kind: type
    default: Any
    check: Callable[[Any], bool] = lambda v: True
    rule: str = ""


def _pos(v) -> bool:
    return v >= 1


SCHEMAS: dict[str, dict[str, Param]] = {
    "collatz_verify": {"step_budget": Param(int, collatz.DEFAULT_BUDGET, _pos, ">= 1")},
    "goldbach_verify": {
        "method": Param(int, 2, lambda v: v in (1, 2), "1 or 2"),
        "delta": Param(int, 64, _pos, ">= 1"),
        "auto_delta": Param(bool, True),
    },
    "gilbreath_verify": {},
    "pnt_table": {"checkpoints": Param(list, None, lambda v: all(isinstance(x, int) for x in v), "integers")},
    "gap_stats": {"cramer_from": Param(int, asymptotics.CRAMER_FROM, lambda v: v >= 2, ">= 2")},
    "partitions_compare": {"step": Param(int, 1, _pos, ">= 1")},
    "goldbach_sail": {},
}

_MIN_LO = {
    "collatz_verify": 1,
    "goldbach_verify": 4,
    "gilbreath_verify": 3,
    "pnt_table": 3,
    "gap_stats": 2,
    "partitions_compare": 1,
    "goldbach_sail": 4,
}


@dataclass(frozen=True)
class JobSpec:
    task: str
    lo: int
    hi: int
    chunk_size: int
    workers: int = field(default_factory=default_workers)
    task_params: dict = field(default_factory=dict)
    output_path: str = "forge.ckpt"

    def validate(self) -> "JobSpec":
        if self.task not in SCHEMAS:
            raise DomainError(f"unknown task {self.task!r}; expected one of {sorted(SCHEMAS)}")
        if self.lo > self.hi:
            raise DomainError(f"empty range [{self.lo}, {self.hi}]")
        if self.lo < _MIN_LO[self.task]:
            raise DomainError(f"{self.task} needs lo >= {_MIN_LO[self.task]}, got {self.lo}")
        if self.chunk_size < 1 or self.workers < 1:
            raise DomainError("chunk_size and workers must be >= 1")
        cap = partitions.MAX_N if self.task == "partitions_compare" else MAX_BOUND
        if self.task != "collatz_verify" and self.hi > cap:
            raise DomainError(f"{self.task} supports hi <= {cap}, got {self.hi}")
        schema = SCHEMAS[self.task]
        unknown = set(self.task_params) - set(schema)
        if unknown:
            raise DomainError(f"unknown parameters for {self.task}: {sorted(unknown)}")
        for name, value in self.task_params.items():
            p = schema[name]
            if not isinstance(value, p.kind) or (p.kind is int and isinstance(value, bool)):
                raise DomainError(f"{name} must be {p.kind.__name__}, got {value!r}")
            if not p.check(value):
                raise DomainError(f"{name} must be {p.rule}, got {value!r}")
        return self

    def param(self, name: str):
        return self.task_params.get(name, SCHEMAS[self.task][name].default)

    def chunks(self) -> list[tuple[int, int]]:
        return [(a, min(self.hi, a + self.chunk_size - 1)) for a in range(self.lo, self.hi + 1, self.chunk_size)]

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "range": [self.lo, self.hi],
            "chunk_size": self.chunk_size,
            "workers": self.workers,
            "task_params": dict(self.task_params),
            "output_path": self.output_path,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "JobSpec":
        try:
            lo, hi = d["range"]
            return cls(
                d["task"], int(lo), int(hi), int(d["chunk_size"]), int(d["workers"]),
                dict(d.get("task_params", {})), d.get("output_path", "forge.ckpt"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed job spec: {exc}") from None

    @property
    def job_id(self) -> str:
        # workers and output path do not influence results, so they stay out
        key = [self.task, self.lo, self.hi, self.chunk_size, self.task_params]
        return hashlib.blake2b(canonical_bytes(key), digest_size=8).hexdigest()


@dataclass(frozen=True)
class JobCheckpoint:
    job_id: str
    chunk: tuple[int, int]
    status: str
    summary: dict
    digest: str
    wall_time_ms: int

    def to_line(self) -> str:
        return json.dumps(
            {
                "job_id": self.job_id,
                "chunk": list(self.chunk),
                "status": self.status,
                "summary": self.summary,
                "digest": self.digest,
                "wall_time_ms": self.wall_time_ms,
            },
            separators=(",", ":"),
        )

    @property
    def digest_ok(self) -> bool:
        return digest(self.chunk, self.status, self.summary) == self.digest


@dataclass
class JobReport:
    spec: JobSpec
    status: str
    checkpoints: list[JobCheckpoint]
    aggregate: dict
    witness: Any = None
    rechecked: list[tuple[int, int]] = field(default_factory=list)
    recomputed: list[tuple[int, int]] = field(default_factory=list)

    @property
    def job_id(self) -> str:
        return self.spec.job_id

    @property
    def digests(self) -> list[str]:
        return [c.digest for c in self.checkpoints]

    @property
    def columns(self) -> list[str]:
        return TASKS[self.spec.task].columns

    def rows(self) -> list[list]:
        return TASKS[self.spec.task].rows(self.checkpoints)


# ---------------------------------------------------------------------------
# tasks: each maps a chunk to (status, summary); summaries are JSON-safe


@dataclass(frozen=True)
class Task:
    run: Callable[[JobSpec, PrimeTable | None, int, int], tuple[str, dict]]
    aggregate: Callable[[list[JobCheckpoint]], dict]
    columns: list[str]
    rows: Callable[[list[JobCheckpoint]], list[list]]
    table_bound: Callable[[JobSpec], int] | None = None


def _chunk_rows(keys):
    def rows(cps):
        return [[c.chunk[0], c.chunk[1], c.status] + [c.summary.get(k) for k in keys] + [c.digest] for c in cps]

    return rows


def _listed_rows(cps):
    return [row for c in cps for row in c.summary.get("rows", [])]


def _collatz_run(spec, table, lo, hi):
    res = collatz.verify_interval(lo, hi, spec.param("step_budget"))
    summary = {
        "seeds": hi - lo + 1,
        "worst_stopping_time": res.worst_stopping_time,
        "worst_excursion": res.worst_excursion,
        "witness": res.witness,
    }
    status = {collatz.VERIFIED: VERIFIED, collatz.OVERFLOW: OVERFLOW}.get(res.status, COUNTEREXAMPLE)
    return status, summary


def _collatz_agg(cps):
    return {
        "seeds": sum(c.summary["seeds"] for c in cps),
        "worst_stopping_time": max((c.summary["worst_stopping_time"] for c in cps), default=0),
        "worst_excursion": max((c.summary["worst_excursion"] for c in cps), default=0),
    }


def _goldbach_run(spec, table, lo, hi):
    a, b = lo + (lo & 1), hi - (hi & 1)
    if a > b:
        return VERIFIED, {"evens": 0, "delta_used": 0, "max_p_min": None, "uncovered": []}
    cfg = goldbach.MethodConfig(spec.param("method"), spec.param("delta"), a, b)
    rep = goldbach.verify_interval(cfg, table, auto_delta=spec.param("auto_delta"))
    summary = {
        "evens": rep.evens_checked,
        "delta_used": rep.delta_used,
        "max_p_min": rep.max_p_min,
        "uncovered": list(map(int, rep.uncovered)),
    }
    return (VERIFIED if rep.covered else FAILED), summary


def _goldbach_agg(cps):
    p = [c.summary["max_p_min"] for c in cps if c.summary["max_p_min"] is not None]
    return {
        "evens": sum(c.summary["evens"] for c in cps),
        "max_delta_used": max((c.summary["delta_used"] for c in cps), default=0),
        "max_p_min": max(p) if p else None,
        "uncovered": sum(len(c.summary["uncovered"]) for c in cps),
    }


def _goldbach_bound(spec):
    return min(MAX_BOUND, max(spec.hi, spec.chunk_size + goldbach.DELTA_CAP + 2))


def _gilbreath_run(spec, table, lo, hi):
    v = gilbreath.verify_prime_bound(table, hi + 1)
    summary = {"base_count": v.base_count, "K": v.K, "depth_guaranteed": v.depth_guaranteed, "witness": v.offending_k}
    status = {gilbreath.CERTIFIED: VERIFIED, gilbreath.COUNTEREXAMPLE: COUNTEREXAMPLE}.get(v.status, FAILED)
    return status, summary


def _gilbreath_agg(cps):
    last = cps[-1].summary if cps else {}
    return {"base_count": last.get("base_count"), "depth_guaranteed": last.get("depth_guaranteed")}


PNT_COLUMNS = ["n", "pi", "n_over_logn", "li", "li_error", "legendre", "legendre_error"]


def _pnt_run(spec, table, lo, hi):
    points = spec.param("checkpoints")
    ns = [n for n in points if lo <= n <= hi] if points is not None else [hi]
    rows = []
    for r in asymptotics.pnt_table(table, ns):
        rows.append([r.n, r.pi, r.n_over_logn, r.li, r.li_error, r.legendre, r.legendre_error])
    return VERIFIED, {"rows": rows}


def _pnt_agg(cps):
    rows = _listed_rows(cps)
    ratios = [r[1] / r[2] for r in rows]
    return {"checkpoints": len(rows), "ratio_decreasing": all(x > y for x, y in zip(ratios, ratios[1:]))}


def _gaps_run(spec, table, lo, hi):
    # a pair belongs to the chunk holding its left prime and must end <= job hi
    ps = table.primes(lo, hi)
    reach = hi
    while reach < spec.hi:
        nxt = table.primes(reach + 1, min(spec.hi, reach + 1024))
        if nxt.size:
            ps = np.append(ps, nxt[0])
            break
        reach = min(spec.hi, reach + 1024)
    left, gaps = ps[:-1], np.diff(ps)
    values, counts = np.unique(gaps, return_counts=True)
    hist = [[int(g), int(c)] for g, c in zip(values, counts)]
    cmax, carg = 0.0, None
    mask = left >= spec.param("cramer_from")
    if mask.any():
        lg = np.log(left[mask].astype(np.float64))
        ratios = gaps[mask] / (lg * lg)
        i = int(np.argmax(ratios))
        cmax, carg = float(ratios[i]), int(left[mask][i])
    return VERIFIED, {"histogram": hist, "cramer_max": cmax, "cramer_argmax": carg}


def _merged_histogram(cps) -> dict[int, int]:
    hist: dict[int, int] = {}
    for c in cps:
        for g, n in c.summary.get("histogram", []):
            hist[g] = hist.get(g, 0) + n
    return hist


def _gaps_agg(cps):
    hist = _merged_histogram(cps)
    cmax, carg = 0.0, None
    for c in cps:
        if c.summary["cramer_max"] > cmax:
            cmax, carg = c.summary["cramer_max"], c.summary["cramer_argmax"]
    champion = min(hist, key=lambda g: (-hist[g], g)) if hist else None
    return {
        "pairs": sum(hist.values()),
        "twin_count": hist.get(2, 0),
        "champion_gap": champion,
        "cramer_max": cmax,
        "cramer_argmax": carg,
    }


def _gaps_rows(cps):
    hist = _merged_histogram(cps)
    return [[g, hist[g]] for g in sorted(hist)]


PARTITION_COLUMNS = ["n", "p_n", "principal", "crude", "principal_ratio", "crude_ratio"]


def _partitions_run(spec, table, lo, hi):
    step = spec.param("step")
    first = spec.lo + -(-(lo - spec.lo) // step) * step
    rows = []
    for n in range(first, hi + 1, step):
        v = partitions.partition_value(n)
        rows.append([v.n, v.exact, v.principal_term, v.crude, v.principal_ratio, v.crude_ratio])
    return VERIFIED, {"rows": rows}


def _partitions_agg(cps):
    return {"values": sum(len(c.summary["rows"]) for c in cps)}


def _sail_run(spec, table, lo, hi):
    evens, p_min = goldbach.minimal_partitions(lo, hi, table)
    missing = p_min == 0
    if missing.any():
        w = int(evens[missing][0])
        return COUNTEREXAMPLE, {"rows": [], "witness": w}
    records, _ = goldbach.sp_records(evens, p_min)
    return VERIFIED, {
        "rows": [[int(e), int(p)] for e, p in zip(evens, p_min)],
        "first": [[r.p, r.S_p] for r in records],
    }


def _sail_agg(cps):
    parts = [[goldbach.SpRecord(p, s) for p, s in c.summary.get("first", [])] for c in cps]
    records = goldbach.merge_sp(*parts)
    usage: dict[int, int] = {}
    for c in cps:
        for _, p in c.summary["rows"]:
            usage[p] = usage.get(p, 0) + 1
    return {
        "evens": sum(usage.values()),
        "max_p_min": max(usage) if usage else None,
        "S": [[r.p, r.S_p] for r in records],
        "usage": sorted(usage.items()),
    }


def _hi(spec):
    return spec.hi


TASKS: dict[str, Task] = {
    "collatz_verify": Task(
        _collatz_run, _collatz_agg,
        ["chunk_lo", "chunk_hi", "status", "seeds", "worst_stopping_time", "worst_excursion", "digest"],
        _chunk_rows(["seeds", "worst_stopping_time", "worst_excursion"]),
    ),
    "goldbach_verify": Task(
        _goldbach_run, _goldbach_agg,
        ["chunk_lo", "chunk_hi", "status", "evens", "delta_used", "max_p_min", "digest"],
        _chunk_rows(["evens", "delta_used", "max_p_min"]),
        _goldbach_bound,
    ),
    "gilbreath_verify": Task(
        _gilbreath_run, _gilbreath_agg,
        ["chunk_lo", "chunk_hi", "status", "base_count", "K", "depth_guaranteed", "digest"],
        _chunk_rows(["base_count", "K", "depth_guaranteed"]),
        _hi,
    ),
    "pnt_table": Task(_pnt_run, _pnt_agg, PNT_COLUMNS, _listed_rows, _hi),
    "gap_stats": Task(_gaps_run, _gaps_agg, ["gap", "count"], _gaps_rows, _hi),
    "partitions_compare": Task(_partitions_run, _partitions_agg, PARTITION_COLUMNS, _listed_rows),
    "goldbach_sail": Task(_sail_run, _sail_agg, ["even_n", "p_min"], _listed_rows, _hi),
}


# ---------------------------------------------------------------------------
# execution


def _run_chunk(spec: JobSpec, table, chunk: tuple[int, int]) -> JobCheckpoint:
    """Run one chunk, retrying once on an unexpected error."""
    t0 = time.perf_counter()
    task = TASKS[spec.task]
    for attempt in (1, 2):
        try:
            status, summary = task.run(spec, table, *chunk)
            break
        except CounterexampleFound as exc:
            status, summary = COUNTEREXAMPLE, {"witness": exc.witness, "detail": exc.detail}
            break
        except Exception as exc:  # noqa: BLE001 - any worker fault is retried, then recorded
            if attempt == 2:
                status, summary = FAILED, {"error": f"{type(exc).__name__}: {exc}"}
    ms = int((time.perf_counter() - t0) * 1000)
    return JobCheckpoint(spec.job_id, chunk, status, summary, digest(chunk, status, summary), ms)


def _prepare_table(spec: JobSpec) -> PrimeTable | None:
    bound_fn = TASKS[spec.task].table_bound
    if bound_fn is None:
        return None
    return build_table(max(2, bound_fn(spec)), workers=spec.workers)


def _header(spec: JobSpec) -> str:
    return json.dumps({"format": FORMAT, "job_id": spec.job_id, "spec": spec.to_dict()}, separators=(",", ":"))


def _aggregate(spec: JobSpec, published: list[JobCheckpoint]) -> dict:
    # failed and counterexample chunks carry error or witness summaries, not statistics
    return TASKS[spec.task].aggregate([c for c in published if c.status in (VERIFIED, OVERFLOW)])


def _execute(spec, path: Path, done: dict, stop_after: int | None) -> JobReport:
    plan = spec.chunks()
    todo = [i for i in range(len(plan)) if i not in done]
    table = _prepare_table(spec) if todo else None
    halt_at = [math.inf]
    lock = threading.Lock()

    def work(i):
        if i > halt_at[0]:
            return None
        cp = _run_chunk(spec, table, plan[i])
        if cp.status in (COUNTEREXAMPLE, FAILED):
            with lock:
                halt_at[0] = min(halt_at[0], i)
        return cp

    published: list[JobCheckpoint] = []
    status, witness, written = COMPLETED, None, 0
    with ThreadPoolExecutor(max_workers=spec.workers) as pool, open(path, "a", encoding="utf-8") as fh:
        futures = {i: pool.submit(work, i) for i in todo}
        try:
            for i in range(len(plan)):
                if stop_after is not None and written >= stop_after and i not in done:
                    status = INTERRUPTED
                    break
                if i in done:
                    cp = done[i]
                else:
                    cp = futures[i].result()
                    fh.write(cp.to_line() + "\n")
                    fh.flush()
                    written += 1
                published.append(cp)
                if cp.status == COUNTEREXAMPLE:
                    status, witness = HALTED, cp.summary.get("witness")
                    break
                if cp.status == FAILED:
                    status = JOB_FAILED
                    break
                if cp.status == OVERFLOW:
                    status = JOB_OVERFLOW
        finally:
            with lock:
                halt_at[0] = -1
            for f in futures.values():
                f.cancel()
    return JobReport(spec, status, published, _aggregate(spec, published), witness)


def run_job(spec: JobSpec, stop_after: int | None = None) -> JobReport:
    """Run a job from scratch, overwriting ``spec.output_path``.

    ``stop_after`` publishes at most that many chunks and returns an
    ``interrupted`` report, which is how tests simulate a killed run.
    """
    spec.validate()
    path = Path(spec.output_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_header(spec) + "\n", encoding="utf-8")
    return _execute(spec, path, {}, stop_after)


# ---------------------------------------------------------------------------
# loading and resume


def load_checkpoint(path) -> tuple[JobSpec, list[JobCheckpoint]]:
    """Parse a checkpoint file.

    A torn final line (no trailing newline, not valid JSON) is the mark of a
    crash mid-write and is cut off the file.  A bad line anywhere else raises
    :class:`CheckpointParseError` with its line number.
    """
    path = Path(path)
    raw = path.read_bytes()
    lines = raw.split(b"\n")
    torn = lines[-1] != b""
    if not torn:
        lines = lines[:-1]
    if not lines or not lines[0]:
        raise CheckpointParseError(str(path), 1, "missing header")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise CheckpointParseError(str(path), 1, f"bad header: {exc.msg}") from None
    if not isinstance(header, dict) or header.get("format") != FORMAT:
        raise CheckpointParseError(str(path), 1, f"expected format {FORMAT!r}")
    spec = JobSpec.from_dict(header.get("spec", {})).validate()
    if header.get("job_id") != spec.job_id:
        raise CheckpointParseError(str(path), 1, "job_id does not match the embedded spec")

    entries: list[JobCheckpoint] = []
    for lineno, line in enumerate(lines[1:], start=2):
        last = lineno == len(lines)
        try:
            d = json.loads(line)
            cp = JobCheckpoint(
                d["job_id"], (int(d["chunk"][0]), int(d["chunk"][1])), d["status"],
                d["summary"], d["digest"], int(d["wall_time_ms"]),
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, IndexError) as exc:
            if last and torn:
                cut = len(raw) - len(line)
                with open(path, "r+b") as fh:
                    fh.truncate(cut)
                break
            raise CheckpointParseError(str(path), lineno, f"{type(exc).__name__}: {exc}") from None
        if cp.job_id != spec.job_id:
            raise CheckpointParseError(str(path), lineno, f"foreign job_id {cp.job_id}")
        entries.append(cp)
    else:
        if torn:
            # last line parsed but lacks its newline; restore it before appending
            with open(path, "ab") as fh:
                fh.write(b"\n")
    return spec, entries


def _index_entries(spec: JobSpec, entries: list[JobCheckpoint], path) -> tuple[dict, list]:
    grid = {c: i for i, c in enumerate(spec.chunks())}
    done: dict[int, JobCheckpoint] = {}
    stale = []
    for cp in entries:
        if cp.chunk not in grid:
            raise CheckpointParseError(str(path), 0, f"chunk {cp.chunk} is not on the job grid")
        i = grid[cp.chunk]
        if not cp.digest_ok or cp.status == FAILED:
            stale.append(cp.chunk)
            continue
        if i in done and done[i].digest != cp.digest:
            raise IntegrityError(cp.chunk, done[i].digest, cp.digest)
        done[i] = cp
    return done, stale


def check_tiling(spec: JobSpec, checkpoints: list[JobCheckpoint]) -> bool:
    """True when the chunks are disjoint and their union is the job range."""
    spans = sorted(c.chunk for c in checkpoints)
    if not spans or spans[0][0] != spec.lo or spans[-1][1] != spec.hi:
        return False
    return all(a[1] + 1 == b[0] for a, b in zip(spans, spans[1:]))


def resume_job(
    path,
    recheck_fraction: float = 0.01,
    seed: int = 0,
    spec: JobSpec | None = None,
    stop_after: int | None = None,
) -> JobReport:
    """Finish a job from its checkpoint file.

    Chunks whose stored digest matches their content are trusted.  A random
    ``recheck_fraction`` of them (at least one) is recomputed anyway, and a
    differing digest raises :class:`IntegrityError`.
    """
    if not 0 <= recheck_fraction <= 1:
        raise DomainError(f"recheck_fraction must lie in [0, 1], got {recheck_fraction}")
    stored, entries = load_checkpoint(path)
    if spec is not None and spec.job_id != stored.job_id:
        raise DomainError("spec does not match the checkpoint header")
    spec = stored
    done, stale = _index_entries(spec, entries, path)

    trusted = sorted(i for i, cp in done.items() if cp.status == VERIFIED)
    picked = []
    if trusted and recheck_fraction > 0:
        k = max(1, round(recheck_fraction * len(trusted)))
        picked = sorted(random.Random(seed).sample(trusted, min(k, len(trusted))))
    if picked:
        table = _prepare_table(spec)
        for i in picked:
            again = _run_chunk(spec, table, done[i].chunk)
            if again.digest != done[i].digest:
                raise IntegrityError(done[i].chunk, done[i].digest, again.digest)

    report = _execute(spec, Path(path), done, stop_after)
    report.rechecked = [done[i].chunk for i in picked]
    report.recomputed = stale
    if report.status == COMPLETED and not check_tiling(spec, report.checkpoints):
        raise IntegrityError((spec.lo, spec.hi), "exact tiling", "gaps or overlaps")
    return report


def load_report(path) -> JobReport:
    """Rebuild a report from a checkpoint file without running anything."""
    spec, entries = load_checkpoint(path)
    done, _ = _index_entries(spec, entries, path)
    published, status, witness = [], COMPLETED, None
    for i in range(len(spec.chunks())):
        if i not in done:
            status = INTERRUPTED
            break
        cp = done[i]
        published.append(cp)
        if cp.status == COUNTEREXAMPLE:
            status, witness = HALTED, cp.summary.get("witness")
            break
        if cp.status == OVERFLOW:
            status = JOB_OVERFLOW
    return JobReport(spec, status, published, _aggregate(spec, published), witness)


# ---------------------------------------------------------------------------
# reports


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def emit_report(report: JobReport, fmt: str, path=None) -> str:
    """Write the report as ``csv`` or ``json``; returns the text as well."""
    cols, rows = report.columns, report.rows()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        w.writerows([_cell(v) for v in r] for r in rows)
        text = buf.getvalue()
    elif fmt == "json":
        doc = {
            "job_id": report.job_id,
            "task": report.spec.task,
            "status": report.status,
            "witness": report.witness,
            "aggregate": report.aggregate,
            "columns": cols,
            "rows": [dict(zip(cols, r)) for r in rows],
        }
        text = json.dumps(doc, indent=1) + "\n"
    else:
        raise DomainError(f"unknown report format {fmt!r}; use csv or json")
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
