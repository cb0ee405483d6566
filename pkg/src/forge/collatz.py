"""Collatz trajectories, stopping-time interval verification and scaling laws.

Exact single-seed work uses Python integers capped at 128 bits.  Interval
kernels run in int64 and hand any seed whose iterate would leave int64 back to
the exact path, so no result ever depends on wrapped arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .accel import njit, use_numba
from .errors import (
    BudgetExhaustedError,
    CollatzOverflowError,
    DomainError,
    SampleSizeError,
    SpanError,
)

WIDTH = 128
_WIDTH_LIMIT = 1 << WIDTH
DEFAULT_BUDGET = 10**6
# largest odd m with 3m + 1 < 2**63
_INT64_ODD_MAX = (2**63 - 2) // 3
# above this the int64 kernels are skipped entirely
_KERNEL_SEED_MAX = 2**62

VERIFIED = "verified"
CANDIDATE = "counterexample_candidate"
OVERFLOW = "overflow"

_OK, _BUDGET, _WIDE = 0, 1, 2


@dataclass(frozen=True)
class CollatzRecord:
    seed: int
    total_steps: int
    stopping_time: int
    excursion: int
    odd_ratio_log_mean: float


@dataclass(frozen=True)
class CollatzVerificationResult:
    interval: tuple[int, int]
    status: str
    worst_stopping_time: int
    worst_excursion: int
    witness: int | None = None

    @property
    def verified(self) -> bool:
        return self.status == VERIFIED


def collatz_step(n: int) -> int:
    n = int(n)
    if n < 1:
        raise DomainError(f"Collatz map is defined for n >= 1, got {n}")
    if n & 1:
        m = 3 * n + 1
        if m >= _WIDTH_LIMIT:
            raise CollatzOverflowError(n)
        return m
    return n >> 1


def iterates(seed: int, step_budget: int = DEFAULT_BUDGET) -> Iterator[int]:
    """Yield the trajectory of ``seed`` up to and including 1."""
    n = int(seed)
    if n < 1:
        raise DomainError(f"seed must be >= 1, got {seed}")
    yield n
    steps = 0
    while n != 1:
        if steps >= step_budget:
            raise BudgetExhaustedError(int(seed), step_budget)
        n = collatz_step(n)
        steps += 1
        yield n


def odd_pairs(seed: int) -> list[tuple[int, int]]:
    """Consecutive odd iterates (n_k, n_{k+1}) along the trajectory of ``seed``."""
    odds = [v for v in iterates(seed) if v & 1]
    return list(zip(odds, odds[1:]))


def trajectory(seed: int, step_budget: int = DEFAULT_BUDGET) -> CollatzRecord:
    seed = int(seed)
    if seed < 1:
        raise DomainError(f"seed must be >= 1, got {seed}")
    if step_budget < 1:
        raise DomainError(f"step_budget must be >= 1, got {step_budget}")
    n, steps, stop, peak = seed, 0, 0, seed
    last_odd = seed if seed & 1 else 0
    log_sum, pairs = 0.0, 0
    while n != 1:
        if steps >= step_budget:
            raise BudgetExhaustedError(seed, step_budget)
        try:
            n = collatz_step(n)
        except CollatzOverflowError as exc:
            raise CollatzOverflowError(exc.value, seed) from None
        steps += 1
        if n > peak:
            peak = n
        if not stop and n < seed:
            stop = steps
        if n & 1:
            if last_odd:
                log_sum += math.log(n / last_odd)
                pairs += 1
            last_odd = n
    mean = log_sum / pairs if pairs else math.nan
    return CollatzRecord(seed, steps, stop, peak, mean)


# ---------------------------------------------------------------------------
# exact per-seed fallbacks


def _stopping_exact(seed: int, budget: int) -> tuple[int, int, int]:
    """(status, stopping_time, excursion) with Python integers."""
    n, t, peak = seed, 0, seed
    while n >= seed:
        if t >= budget:
            return _BUDGET, t, peak
        if n & 1:
            n = 3 * n + 1
            if n >= _WIDTH_LIMIT:
                return _WIDE, t, peak
        else:
            n >>= 1
        t += 1
        if n > peak:
            peak = n
    return _OK, t, peak


def _short_circuit(seed: int) -> tuple[int, int] | None:
    if seed % 2 == 0:
        return 1, seed
    if seed % 4 == 1 and seed > 1:
        return 3, 3 * seed + 1
    return None


# ---------------------------------------------------------------------------
# stopping-time scan kernels


@njit
def _stopping_scan_nb(lo, hi, budget, odd_max):
    worst_t = 0
    worst_x = 0
    for n in range(lo, hi + 1):
        if n % 2 == 0:
            t = 1
            x = n
        elif n % 4 == 1 and n > 1:
            t = 3
            x = 3 * n + 1
        else:
            m = n
            t = 0
            x = n
            while m >= n:
                if t >= budget:
                    return 1, n, worst_t, worst_x
                if m & 1:
                    if m > odd_max:
                        return 2, n, worst_t, worst_x
                    m = 3 * m + 1
                else:
                    m >>= 1
                t += 1
                if m > x:
                    x = m
        if t > budget:
            return 1, n, worst_t, worst_x
        if t > worst_t:
            worst_t = t
        if x > worst_x:
            worst_x = x
    return 0, 0, worst_t, worst_x


def _stopping_scan_np(lo, hi, budget, odd_max, block=1 << 18):
    """Vectorised counterpart of ``_stopping_scan_nb``: same return contract."""
    worst_t = 0
    worst_x = 0
    for b_lo in range(lo, hi + 1, block):
        b_hi = min(b_lo + block - 1, hi)
        seeds = np.arange(b_lo, b_hi + 1, dtype=np.int64)
        t = np.where(seeds % 2 == 0, 1, 3).astype(np.int64)
        x = np.where(seeds % 2 == 0, seeds, 3 * seeds + 1)
        hard = np.flatnonzero((seeds % 4 == 3) | (seeds == 1))
        t[hard] = 0
        x[hard] = seeds[hard]
        m = seeds[hard].copy()
        idx = hard
        code = np.zeros(seeds.size, dtype=np.int64)
        code[(t > budget)] = _BUDGET
        while idx.size:
            over_budget = t[idx] >= budget
            odd = (m & 1) == 1
            wide = odd & (m > odd_max) & ~over_budget
            code[idx[over_budget]] = _BUDGET
            code[idx[wide]] = _WIDE
            keep = ~(over_budget | wide)
            idx, m, odd = idx[keep], m[keep], odd[keep]
            m = np.where(odd, 3 * m + 1, m >> 1)
            t[idx] += 1
            x[idx] = np.maximum(x[idx], m)
            going = m >= seeds[idx]
            idx, m = idx[going], m[going]
        bad = np.flatnonzero(code)
        if bad.size:
            first = int(bad[0])
            if first:
                worst_t = max(worst_t, int(t[:first].max()))
                worst_x = max(worst_x, int(x[:first].max()))
            return int(code[first]), int(seeds[first]), worst_t, worst_x
        worst_t = max(worst_t, int(t.max()))
        worst_x = max(worst_x, int(x.max()))
    return 0, 0, worst_t, worst_x


def _scan_exact(lo: int, hi: int, budget: int):
    worst_t = worst_x = 0
    for n in range(lo, hi + 1):
        sc = _short_circuit(n)
        if sc is not None:
            t, x = sc
            code = _BUDGET if t > budget else _OK
        else:
            code, t, x = _stopping_exact(n, budget)
        if code != _OK:
            return code, n, worst_t, worst_x
        worst_t, worst_x = max(worst_t, t), max(worst_x, x)
    return _OK, 0, worst_t, worst_x


def verify_interval(lo: int, hi: int, step_budget: int = DEFAULT_BUDGET) -> CollatzVerificationResult:
    """Check every seed in ``[lo, hi]`` drops below itself.

    Assumes every integer below ``lo`` is already verified; seeds are taken in
    ascending order so each drop lands on a verified integer.  Worst statistics
    cover the seeds preceding any witness.
    """
    lo, hi = int(lo), int(hi)
    if lo < 2 or hi < lo:
        raise DomainError(f"need 2 <= lo <= hi, got [{lo}, {hi}]")
    if step_budget < 1:
        raise DomainError(f"step_budget must be >= 1, got {step_budget}")
    worst_t = worst_x = 0
    start = lo
    status, witness = VERIFIED, None
    while start <= hi:
        if hi > _KERNEL_SEED_MAX:
            code, n, wt, wx = _scan_exact(start, hi, step_budget)
        elif use_numba():
            code, n, wt, wx = _stopping_scan_nb(start, hi, step_budget, _INT64_ODD_MAX)
        else:
            code, n, wt, wx = _stopping_scan_np(start, hi, step_budget, _INT64_ODD_MAX)
        worst_t, worst_x = max(worst_t, int(wt)), max(worst_x, int(wx))
        if code == _OK:
            break
        n = int(n)
        if code == _WIDE:
            code, t, x = _stopping_exact(n, step_budget)
            if code == _OK:
                worst_t, worst_x = max(worst_t, t), max(worst_x, x)
                start = n + 1
                continue
        status = CANDIDATE if code == _BUDGET else OVERFLOW
        witness = n
        break
    return CollatzVerificationResult((lo, hi), status, worst_t, worst_x, witness)


def combine(a: CollatzVerificationResult, b: CollatzVerificationResult) -> CollatzVerificationResult:
    """Merge results over adjacent intervals ``a`` then ``b`` (associative)."""
    if a.interval[1] + 1 != b.interval[0]:
        raise DomainError(f"intervals {a.interval} and {b.interval} are not adjacent")
    interval = (a.interval[0], b.interval[1])
    if not a.verified:
        return CollatzVerificationResult(interval, a.status, a.worst_stopping_time, a.worst_excursion, a.witness)
    return CollatzVerificationResult(
        interval,
        b.status,
        max(a.worst_stopping_time, b.worst_stopping_time),
        max(a.worst_excursion, b.worst_excursion),
        b.witness,
    )


# ---------------------------------------------------------------------------
# full-trajectory batch kernels

STATS_DTYPE = np.dtype(
    [
        ("seed", np.int64),
        ("total_steps", np.int64),
        ("stopping_time", np.int64),
        ("excursion", np.int64),
        ("odd_log_sum", np.float64),
        ("odd_pairs", np.int64),
        ("flag", np.int8),
    ]
)


@njit
def _batch_nb(seeds, budget, odd_max, steps, stops, peaks, logs, pairs, flags):
    for i in range(seeds.shape[0]):
        s = seeds[i]
        m = s
        t = 0
        stop = 0
        x = s
        last = s if s & 1 else 0
        acc = 0.0
        k = 0
        flag = 0
        while m != 1:
            if t >= budget:
                flag = 1
                break
            if m & 1:
                if m > odd_max:
                    flag = 2
                    break
                m = 3 * m + 1
            else:
                m >>= 1
            t += 1
            if m > x:
                x = m
            if stop == 0 and m < s:
                stop = t
            if m & 1:
                if last:
                    acc += math.log(m / last)
                    k += 1
                last = m
        steps[i] = t
        stops[i] = stop
        peaks[i] = x
        logs[i] = acc
        pairs[i] = k
        flags[i] = flag


def _batch_np(seeds, budget, odd_max, steps, stops, peaks, logs, pairs, flags):
    m = seeds.copy()
    peaks[:] = seeds
    last = np.where(seeds & 1, seeds, 0)
    idx = np.flatnonzero(m != 1)
    mm, ll = m[idx], last[idx]
    while idx.size:
        over = steps[idx] >= budget
        odd = (mm & 1) == 1
        wide = odd & (mm > odd_max) & ~over
        flags[idx[over]] = 1
        flags[idx[wide]] = 2
        keep = ~(over | wide)
        idx, mm, ll, odd = idx[keep], mm[keep], ll[keep], odd[keep]
        mm = np.where(odd, 3 * mm + 1, mm >> 1)
        steps[idx] += 1
        peaks[idx] = np.maximum(peaks[idx], mm)
        first_drop = (stops[idx] == 0) & (mm < seeds[idx])
        stops[idx[first_drop]] = steps[idx[first_drop]]
        now_odd = (mm & 1) == 1
        paired = now_odd & (ll != 0)
        logs[idx[paired]] += np.log(mm[paired] / ll[paired])
        pairs[idx[paired]] += 1
        ll = np.where(now_odd, mm, ll)
        alive = mm != 1
        idx, mm, ll = idx[alive], mm[alive], ll[alive]


def batch_stats(lo: int, hi: int, step_budget: int = DEFAULT_BUDGET, odd_only: bool = False) -> np.ndarray:
    """Full-trajectory statistics for every seed in ``[lo, hi]`` as a record array.

    ``flag`` is 0 for a completed trajectory; seeds that exhaust the budget
    raise :class:`BudgetExhaustedError`.
    """
    lo, hi = int(lo), int(hi)
    if lo < 1 or hi < lo:
        raise DomainError(f"need 1 <= lo <= hi, got [{lo}, {hi}]")
    if hi > _KERNEL_SEED_MAX:
        raise DomainError(f"batch statistics are limited to seeds <= 2^62, got {hi}")
    if odd_only:
        seeds = np.arange(lo | 1, hi + 1, 2, dtype=np.int64)
    else:
        seeds = np.arange(lo, hi + 1, dtype=np.int64)
    out = np.zeros(seeds.size, dtype=STATS_DTYPE)
    out["seed"] = seeds
    cols = [np.zeros(seeds.size, dtype=STATS_DTYPE[name]) for name in STATS_DTYPE.names[1:]]
    kernel = _batch_nb if use_numba() else _batch_np
    kernel(seeds, step_budget, _INT64_ODD_MAX, *cols)
    for name, col in zip(STATS_DTYPE.names[1:], cols):
        out[name] = col
    if (out["flag"] == 1).any():
        raise BudgetExhaustedError(int(out["seed"][out["flag"] == 1][0]), step_budget)
    for i in np.flatnonzero(out["flag"] == 2):
        rec = trajectory(int(out["seed"][i]), step_budget)
        if rec.excursion >= 2**63:
            raise CollatzOverflowError(rec.excursion, rec.seed)
        pairs = sum(1 for _ in odd_pairs(rec.seed))
        out[i] = (rec.seed, rec.total_steps, rec.stopping_time, rec.excursion,
                  rec.odd_ratio_log_mean * pairs if pairs else 0.0, pairs, 0)
    return out


def records_from_stats(stats: np.ndarray) -> list[CollatzRecord]:
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(stats["odd_pairs"] > 0, stats["odd_log_sum"] / np.maximum(stats["odd_pairs"], 1), np.nan)
    return [
        CollatzRecord(int(s), int(t), int(st), int(x), float(mu))
        for s, t, st, x, mu in zip(stats["seed"], stats["total_steps"], stats["stopping_time"], stats["excursion"], means)
    ]


def descend_interval(lo: int, hi: int, step_budget: int = DEFAULT_BUDGET) -> CollatzVerificationResult:
    """Verify ``[lo, hi]`` by full descent to 1 (no induction on smaller seeds)."""
    try:
        stats = batch_stats(lo, hi, step_budget)
    except BudgetExhaustedError as exc:
        return CollatzVerificationResult((lo, hi), CANDIDATE, 0, 0, exc.seed)
    except CollatzOverflowError as exc:
        return CollatzVerificationResult((lo, hi), OVERFLOW, 0, 0, exc.seed)
    return CollatzVerificationResult(
        (int(lo), int(hi)), VERIFIED, int(stats["total_steps"].max()), int(stats["excursion"].max())
    )


def odd_ratio_estimate(sample_lo: int, sample_hi: int, min_seeds: int = 1000) -> float:
    """Pooled geometric-mean ratio between consecutive odd iterates.

    Every consecutive odd pair along the trajectories of the odd seeds in the
    range contributes one log-ratio; the result is ``exp`` of their mean.
    """
    lo, hi = int(sample_lo), int(sample_hi)
    n_odd = 0 if hi < lo else (hi - (lo | 1)) // 2 + 1
    if n_odd < min_seeds:
        raise SampleSizeError(f"need at least {min_seeds} odd seeds, range [{lo}, {hi}] has {max(n_odd, 0)}")
    stats = batch_stats(lo, hi, odd_only=True)
    return math.exp(math.fsum(stats["odd_log_sum"]) / int(stats["odd_pairs"].sum()))


# ---------------------------------------------------------------------------
# scaling laws

EXCURSION_VS_N2 = "excursion_vs_n2"
STOPPING_VS_LOGN = "stopping_vs_logn"


@dataclass(frozen=True)
class ScalingFit:
    law: str
    slope: float
    intercept: float
    residual_std: float
    residual_max: float
    blocks: int


def _as_arrays(records) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(records, np.ndarray) and records.dtype.names:
        return (records["seed"].astype(np.float64), records["excursion"].astype(np.float64),
                records["stopping_time"].astype(np.float64))
    recs = list(records)
    return (np.array([r.seed for r in recs], dtype=np.float64),
            np.array([r.excursion for r in recs], dtype=np.float64),
            np.array([r.stopping_time for r in recs], dtype=np.float64))


def scaling_fit(records: Iterable[CollatzRecord] | np.ndarray, law: str) -> ScalingFit:
    """Least-squares fit over dyadic seed blocks.

    Each block [2^k, 2^(k+1)) contributes its maximum; ``excursion_vs_n2`` fits
    log(max excursion) against log(seed at the maximum), ``stopping_vs_logn``
    fits the maximum stopping time against log(seed at the maximum).
    """
    if law not in (EXCURSION_VS_N2, STOPPING_VS_LOGN):
        raise DomainError(f"unknown law {law!r}")
    seeds, excursions, stops = _as_arrays(records)
    if seeds.size < 100:
        raise SpanError(f"need at least 100 records, got {seeds.size}")
    if seeds.min() < 1 or seeds.max() / seeds.min() < 1000:
        raise SpanError("records must span at least three decades of seeds")
    values = excursions if law == EXCURSION_VS_N2 else stops
    block = np.floor(np.log2(seeds)).astype(np.int64)
    xs, ys = [], []
    for b in np.unique(block):
        members = np.flatnonzero(block == b)
        best = members[np.argmax(values[members])]
        xs.append(math.log(seeds[best]))
        ys.append(math.log(values[best]) if law == EXCURSION_VS_N2 else values[best])
    x, y = np.array(xs), np.array(ys)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return ScalingFit(law, float(slope), float(intercept), float(resid.std()), float(np.abs(resid).max()), len(xs))
