"""Goldbach partitions: minimal pairs, counts, interval methods, S(p), Hardy-Littlewood."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .accel import njit, use_numba
from .errors import CounterexampleFound, DomainError, OutOfRangeError
from .primes import PrimeTable, build_table

METHOD_ONE = 1
METHOD_TWO = 2
COVERED = "covered"
INSUFFICIENT_DELTA = "insufficient_delta"
DELTA_CAP = 10**4


@dataclass(frozen=True)
class GoldbachPartition:
    even_n: int
    p_min: int
    q_min: int
    count_g: int | None = None


@dataclass(frozen=True)
class MethodConfig:
    """P1/P2 construction for covering the evens of ``[a, b]``.

    Method one: P1 = primes in [2, b-a+delta], P2 = primes in [a-delta, a].
    Method two: P1 = primes in [2, delta],     P2 = primes in [a-delta, b].
    Lower ends are clamped at 2.
    """

    method: int
    delta: int
    a: int
    b: int

    def __post_init__(self):
        if self.method not in (METHOD_ONE, METHOD_TWO):
            raise DomainError(f"method must be 1 or 2, got {self.method}")
        if self.delta < 1:
            raise DomainError(f"delta must be >= 1, got {self.delta}")
        if self.a % 2 or self.b % 2:
            raise DomainError(f"interval ends must be even, got [{self.a}, {self.b}]")
        if self.a < 4 or self.b < self.a:
            raise DomainError(f"need 4 <= a <= b, got [{self.a}, {self.b}]")

    def p1_range(self) -> tuple[int, int]:
        if self.method == METHOD_ONE:
            return 2, self.b - self.a + self.delta
        return 2, self.delta

    def p2_range(self) -> tuple[int, int]:
        lo = max(2, self.a - self.delta)
        return (lo, self.a) if self.method == METHOD_ONE else (lo, self.b)

    def table_bound_needed(self) -> int:
        return max(self.b, self.p1_range()[1])


@dataclass
class GoldbachReport:
    config: MethodConfig
    status: str
    evens_checked: int
    uncovered: list[int]
    delta_history: list[int] = field(default_factory=list)
    p_min: np.ndarray | None = None

    @property
    def covered(self) -> bool:
        return self.status == COVERED

    @property
    def delta_used(self) -> int:
        return self.config.delta

    @property
    def max_p_min(self) -> int | None:
        if self.p_min is None or not self.p_min.size:
            return None
        return int(self.p_min.max())


@dataclass(frozen=True)
class SpRecord:
    p: int
    S_p: int


@dataclass
class SpScan:
    even_bound: int
    records: list[SpRecord]
    usage: dict[int, int]
    evens: np.ndarray
    p_min: np.ndarray


# ---------------------------------------------------------------------------
# kernels; membership is read straight from the table's packed composite bits


@njit
def _min_scan_nb(evens, ps, bits, out):
    for i in range(evens.shape[0]):
        e = evens[i]
        out[i] = 0
        for j in range(ps.shape[0]):
            p = ps[j]
            if 2 * p > e:
                break
            q = e - p
            if q & 1:
                s = q >> 1
                if not (bits[s >> 3] >> (s & 7)) & 1:
                    out[i] = p
                    break
            elif q == 2:
                out[i] = p
                break


def _is_prime_bits(values, bits):
    s = values >> 1
    composite = (bits[s >> 3] >> (s & 7).astype(np.uint8)) & 1
    return ((composite == 0) & (values & 1 == 1)) | (values == 2)


def _min_scan_np(evens, ps, bits, out):
    out[:] = 0
    idx = np.arange(evens.size)
    for p in ps.tolist():
        if not idx.size:
            break
        e = evens[idx]
        usable = 2 * p <= e
        if not usable.any():
            break
        hit = usable & _is_prime_bits(e - p, bits)
        out[idx[hit]] = p
        idx = idx[~hit]


@njit
def _count_nb(evens, ps, bits, out):
    for i in range(evens.shape[0]):
        e = evens[i]
        c = 0
        for j in range(ps.shape[0]):
            p = ps[j]
            if 2 * p > e:
                break
            q = e - p
            if q & 1:
                s = q >> 1
                if not (bits[s >> 3] >> (s & 7)) & 1:
                    c += 1
            elif q == 2:
                c += 1
        out[i] = c


def _count_np(evens, ps, bits, out):
    for i, e in enumerate(evens.tolist()):
        half = ps[: np.searchsorted(ps, e // 2, side="right")]
        out[i] = int(np.count_nonzero(_is_prime_bits(e - half, bits)))


@njit
def _cover_one_nb(evens, p2s, bits, out):
    for i in range(evens.shape[0]):
        e = evens[i]
        out[i] = False
        for j in range(p2s.shape[0]):
            q = e - p2s[j]
            if q < 2:
                continue
            if q & 1:
                s = q >> 1
                if not (bits[s >> 3] >> (s & 7)) & 1:
                    out[i] = True
                    break
            elif q == 2:
                out[i] = True
                break


def _cover_one_np(evens, p2s, bits, out):
    out[:] = False
    for p2 in p2s.tolist():
        q = evens - p2
        ok = q >= 2
        out[ok] |= _is_prime_bits(q[ok], bits)


def _evens(a: int, b: int) -> np.ndarray:
    return np.arange(a, b + 1, 2, dtype=np.int64)


def _check_cover(primes: PrimeTable, hi: int) -> None:
    if hi > primes.bound:
        raise OutOfRangeError(f"prime table bound {primes.bound} does not cover {hi}")


def minimal_partitions(lo: int, hi: int, primes: PrimeTable, max_p: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """p_min for every even in ``[lo, hi]``; 0 where no prime <= max_p works."""
    lo = max(4, int(lo) + (int(lo) & 1))
    hi = int(hi)
    _check_cover(primes, hi)
    evens = _evens(lo, hi)
    limit = hi // 2 if max_p is None else min(int(max_p), hi // 2)
    ps = primes.primes(2, max(limit, 2))
    out = np.zeros(evens.size, dtype=np.int64)
    kernel = _min_scan_nb if use_numba() else _min_scan_np
    kernel(evens, ps, primes.bits, out)
    return evens, out


def partition_counts(evens: np.ndarray, primes: PrimeTable) -> np.ndarray:
    """g(n) for each even n in ``evens``."""
    evens = np.asarray(evens, dtype=np.int64)
    if evens.size == 0:
        return np.zeros(0, dtype=np.int64)
    _check_cover(primes, int(evens.max()))
    ps = primes.primes(2, max(2, int(evens.max()) // 2))
    out = np.zeros(evens.size, dtype=np.int64)
    kernel = _count_nb if use_numba() else _count_np
    kernel(evens, ps, primes.bits, out)
    return out


def _check_even(even_n: int, minimum: int = 4) -> int:
    even_n = int(even_n)
    if even_n % 2 or even_n < minimum:
        raise DomainError(f"expected an even integer >= {minimum}, got {even_n}")
    return even_n


def minimal_partition(even_n: int, primes: PrimeTable, with_count: bool = False) -> GoldbachPartition:
    even_n = _check_even(even_n)
    _check_cover(primes, even_n)
    _, p_min = minimal_partitions(even_n, even_n, primes)
    p = int(p_min[0])
    if p == 0:
        raise CounterexampleFound("goldbach", even_n, "no prime pair sums to it")
    count = count_partitions(even_n, primes) if with_count else None
    return GoldbachPartition(even_n, p, even_n - p, count)


def count_partitions(even_n: int, primes: PrimeTable) -> int:
    """g(n): number of unordered prime pairs p <= q with p + q = n."""
    even_n = _check_even(even_n)
    return int(partition_counts(np.array([even_n]), primes)[0])


def ordered_count(even_n: int, primes: PrimeTable) -> int:
    """r(n) = 2 g(n) - [n/2 prime]: ordered representations."""
    g = count_partitions(even_n, primes)
    return 2 * g - (1 if primes.is_prime(even_n // 2) else 0)


# ---------------------------------------------------------------------------
# interval verification


def _run_method(config: MethodConfig, primes: PrimeTable) -> GoldbachReport:
    evens = _evens(config.a, config.b)
    if config.method == METHOD_ONE:
        p2s = primes.primes(*config.p2_range())[::-1].copy()
        covered = np.zeros(evens.size, dtype=np.bool_)
        kernel = _cover_one_nb if use_numba() else _cover_one_np
        kernel(evens, p2s, primes.bits, covered)
        p_min = None
    else:
        ps = primes.primes(*config.p1_range()) if config.delta >= 2 else np.zeros(0, dtype=np.int64)
        p_min = np.zeros(evens.size, dtype=np.int64)
        kernel = _min_scan_nb if use_numba() else _min_scan_np
        kernel(evens, ps, primes.bits, p_min)
        covered = p_min > 0
    uncovered = evens[~covered].tolist()
    status = COVERED if not uncovered else INSUFFICIENT_DELTA
    return GoldbachReport(config, status, int(evens.size), uncovered, [config.delta], p_min)


def verify_interval(
    config: MethodConfig, primes: PrimeTable, auto_delta: bool = False, delta_cap: int = DELTA_CAP
) -> GoldbachReport:
    """Confirm every even in ``[a, b]`` lies in P1 + P2.

    With ``auto_delta`` an insufficient delta is doubled up to ``delta_cap``.
    Evens still uncovered at the cap are checked exhaustively; one with no
    partition at all raises :class:`CounterexampleFound`.
    """
    history = []
    while True:
        _check_cover(primes, config.table_bound_needed())
        report = _run_method(config, primes)
        history.append(config.delta)
        if report.covered or not auto_delta or config.delta >= delta_cap:
            break
        config = MethodConfig(config.method, min(2 * config.delta, delta_cap), config.a, config.b)
    report.delta_history = history
    if not report.covered and auto_delta:
        for even in report.uncovered:
            minimal_partition(even, primes)  # raises on a genuine counterexample
    return report


# ---------------------------------------------------------------------------
# S(p) and the Granville bounds


def s_of_p_scan(primes: PrimeTable, even_bound: int) -> SpScan:
    """First occurrence S(p) and usage count of every p_min up to ``even_bound``."""
    even_bound = int(even_bound)
    if even_bound < 6:
        raise DomainError(f"even_bound must be >= 6, got {even_bound}")
    evens, p_min = minimal_partitions(4, even_bound, primes)
    missing = np.flatnonzero(p_min == 0)
    if missing.size:
        raise CounterexampleFound("goldbach", int(evens[missing[0]]), "no prime pair sums to it")
    records, usage = sp_records(evens, p_min)
    return SpScan(even_bound, records, usage, evens, p_min)


def sp_records(evens: np.ndarray, p_min: np.ndarray) -> tuple[list[SpRecord], dict[int, int]]:
    """First occurrences and usage counts from an ascending (even, p_min) stream."""
    ps, first, counts = np.unique(p_min, return_index=True, return_counts=True)
    records = [SpRecord(int(p), int(evens[i])) for p, i in zip(ps, first)]
    return records, {int(p): int(c) for p, c in zip(ps, counts)}


def merge_sp(*parts: list[SpRecord]) -> list[SpRecord]:
    """Combine per-chunk records by taking the smallest S(p) for each p."""
    best: dict[int, int] = {}
    for part in parts:
        for r in part:
            if r.p not in best or r.S_p < best[r.p]:
                best[r.p] = r.S_p
    return [SpRecord(p, best[p]) for p in sorted(best)]


@dataclass(frozen=True)
class GranvilleRow:
    p: int
    S_p: int
    bound_old: float
    bound_new: float


def granville_old(S: float) -> float:
    """log^2 S * log log S."""
    ls = math.log(S)
    return ls * ls * math.log(ls)


def granville_new(S: float) -> float:
    """(log S * log log S)^2 / 3."""
    ls = math.log(S)
    return (ls * math.log(ls)) ** 2 / 3


def granville_comparison(records) -> tuple[list[GranvilleRow], list[str]]:
    """Pair each p with both growth bounds evaluated at S(p); no verdict."""
    records = list(records)
    if not records:
        raise DomainError("records must be nonempty")
    rows, notes = [], []
    for r in records:
        if r.S_p < 16:
            notes.append(f"p={r.p}: S(p)={r.S_p} < 16, skipped")
            continue
        rows.append(GranvilleRow(r.p, r.S_p, granville_old(r.S_p), granville_new(r.S_p)))
    return rows, notes


# ---------------------------------------------------------------------------
# Hardy-Littlewood


@dataclass(frozen=True)
class TwinPrimeConstant:
    value: float
    precision_primes: int
    factors: int
    warning: str | None = None


MIN_PRECISION_PRIMES = 10**6


@lru_cache(maxsize=8)
def twin_prime_constant(precision_primes: int = 10**7) -> TwinPrimeConstant:
    """Partial product of (1 - 1/(p-1)^2) over primes 3 <= p <= precision_primes."""
    P = int(precision_primes)
    if P < 3:
        raise DomainError(f"precision_primes must be >= 3, got {P}")
    ps = build_table(P).primes(3, P).astype(np.float64)
    value = math.prod((1.0 - 1.0 / (ps - 1.0) ** 2).tolist())
    warning = None
    if P < MIN_PRECISION_PRIMES:
        warning = f"product truncated at {P} < {MIN_PRECISION_PRIMES}; expect error above 1e-7"
    return TwinPrimeConstant(value, P, int(ps.size), warning)


def odd_prime_divisors(n: int) -> list[int]:
    n = int(n)
    while n % 2 == 0 and n:
        n //= 2
    out, d = [], 3
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 2
    if n > 1:
        out.append(n)
    return out


def sylvester_factor(n: int) -> float:
    """Product of (p-1)/(p-2) over the odd primes dividing n."""
    return math.prod((p - 1) / (p - 2) for p in odd_prime_divisors(n))


def hardy_littlewood_estimate(even_n: int, primes: PrimeTable | None = None, constant: float | None = None) -> float:
    """2 C2 n / log(n)^2 times the Sylvester factor; compares with r(n)."""
    n = int(even_n)
    if n % 2:
        raise DomainError(f"Hardy-Littlewood estimate needs an even n, got {n}")
    if n < 6:
        raise DomainError(f"n must be >= 6, got {n}")
    c2 = twin_prime_constant().value if constant is None else constant
    return 2.0 * c2 * n / math.log(n) ** 2 * sylvester_factor(n)


@dataclass
class HardyLittlewoodComparison:
    n: np.ndarray
    r: np.ndarray
    estimate: np.ndarray

    @property
    def ratio(self) -> np.ndarray:
        return self.r / self.estimate


def hl_comparison(lo: int, hi: int, primes: PrimeTable, step: int = 2) -> HardyLittlewoodComparison:
    """r(n) against the estimate for evens n in ``[lo, hi]`` taken every ``step``."""
    lo = max(6, int(lo) + (int(lo) & 1))
    if step % 2:
        raise DomainError(f"step must be even, got {step}")
    evens = np.arange(lo, int(hi) + 1, step, dtype=np.int64)
    g = partition_counts(evens, primes)
    half_prime = primes.is_prime_many(evens // 2)
    r = 2 * g - half_prime.astype(np.int64)
    c2 = twin_prime_constant().value
    est = np.array([hardy_littlewood_estimate(int(n), constant=c2) for n in evens])
    return HardyLittlewoodComparison(evens, r, est)
