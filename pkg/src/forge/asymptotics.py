"""Prime-counting laws, heuristic sums, Chebyshev theta and gap statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import DomainError, OutOfRangeError
from .primes import PrimeTable, logarithmic_integral, prime_count

LEGENDRE_CONSTANT = 1.08366
CRAMER_FROM = 11


@dataclass(frozen=True)
class PntComparisonRow:
    n: int
    pi: int
    n_over_logn: float
    li: float
    li_error: float
    legendre: float
    legendre_error: float

    @property
    def ratio(self) -> float:
        """pi(n) / (n / log n)."""
        return self.pi / self.n_over_logn


def _check_bound(primes: PrimeTable, n: int) -> None:
    if n > primes.bound:
        raise OutOfRangeError(f"{n} exceeds table bound {primes.bound}")


def pnt_row(primes: PrimeTable, n: int) -> PntComparisonRow:
    """One comparison row; errors are estimate minus pi(n).

    The Li column is the principal-value integral from 0, the form
    historical tables use.
    """
    n = int(n)
    if n < 3:
        raise DomainError(f"checkpoint must be >= 3, got {n}")
    _check_bound(primes, n)
    pi = prime_count(primes, n)
    ln = math.log(n)
    li = logarithmic_integral(n, offset=False)
    leg = n / (ln - LEGENDRE_CONSTANT)
    return PntComparisonRow(n, pi, n / ln, li, li - pi, leg, leg - pi)


def pnt_table(primes: PrimeTable, checkpoints) -> list[PntComparisonRow]:
    return [pnt_row(primes, n) for n in checkpoints]


def legendre_A(primes: PrimeTable, n: int) -> float:
    """A(n) = n / pi(n) - log n.

    Legendre's formula reads n / (log n - 1.08366), so A(n) comes out
    negative; compare ``abs(A)`` against the constant.
    """
    n = int(n)
    if n < 10:
        raise DomainError(f"n must be >= 10, got {n}")
    _check_bound(primes, n)
    return n / prime_count(primes, n) - math.log(n)


def mertens_sum(primes: PrimeTable, n: int) -> float:
    """Sum of 1/p over primes p <= n."""
    n = int(n)
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    _check_bound(primes, n)
    return math.fsum((1.0 / primes.primes(2, n)).tolist())


def bertrand_series(n: int, chunk: int = 1 << 22) -> float:
    """Sum of 1/(m log m) for 2 <= m <= n."""
    n = int(n)
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    parts = []
    for lo in range(2, n + 1, chunk):
        m = np.arange(lo, min(n, lo + chunk - 1) + 1, dtype=np.float64)
        parts.append(math.fsum((1.0 / (m * np.log(m))).tolist()))
    return math.fsum(parts)


def chebyshev_theta(primes: PrimeTable, x: int) -> float:
    """theta(x): sum of log p over primes p <= x."""
    x = int(x)
    _check_bound(primes, x)
    if x < 2:
        return 0.0
    return math.fsum(np.log(primes.primes(2, x).astype(np.float64)).tolist())


@dataclass(frozen=True)
class GapStatistics:
    bound: int
    histogram: dict[int, int]
    twin_count: int
    cramer_max: float
    cramer_argmax: int | None
    champion_gap: int

    @property
    def total(self) -> int:
        return sum(self.histogram.values())


def gap_statistics(primes: PrimeTable, bound: int, cramer_from: int = CRAMER_FROM) -> GapStatistics:
    """Gaps between consecutive primes <= bound.

    The Cramer ratio (p' - p) / log(p)^2 is maximised only over p >= cramer_from,
    since the first few primes give ratios above 1 for trivial reasons.
    """
    bound = int(bound)
    if bound < 3:
        raise DomainError(f"bound must be >= 3, got {bound}")
    _check_bound(primes, bound)
    ps = primes.primes(2, bound)
    gaps = np.diff(ps)
    values, counts = np.unique(gaps, return_counts=True)
    histogram = {int(g): int(c) for g, c in zip(values, counts)}
    # np.unique sorts ascending, so argmax picks the smaller gap on ties
    champion = int(values[np.argmax(counts)])
    start = int(np.searchsorted(ps, cramer_from))
    if start < gaps.size:
        logs = np.log(ps[start:-1].astype(np.float64))
        ratios = gaps[start:] / (logs * logs)
        i = int(np.argmax(ratios))
        cmax, carg = float(ratios[i]), int(ps[start + i])
    else:
        cmax, carg = 0.0, None
    return GapStatistics(bound, histogram, histogram.get(2, 0), cmax, carg, champion)


@dataclass(frozen=True)
class ChampionBand:
    k: int
    primorial: int
    log10_primorial: float
    log10_h: float


def gap_champion_bands(k_max: int, prec: int = 96) -> list[ChampionBand]:
    """Primorials E(k) and thresholds h(k), both as log10 magnitudes.

    log h(k) = E(k-1) (p_k - 1) / log((p_k - 1)/(p_k - 2)); h(1) = 1 since the
    denominator is infinite at p_1 = 2.
    """
    k_max = int(k_max)
    if k_max < 1:
        raise DomainError(f"k_max must be >= 1, got {k_max}")
    ps: list[int] = []
    cand = 2
    while len(ps) < k_max:
        if all(cand % p for p in ps if p * p <= cand):
            ps.append(cand)
        cand += 1
    rows, E = [], 1
    with mpmath.workprec(prec):
        for k, p in enumerate(ps, start=1):
            prev = E
            E *= p
            if p == 2:
                log10_h = 0.0
            else:
                exponent = mpmath.mpf(prev) * (p - 1) / mpmath.log(mpmath.mpf(p - 1) / (p - 2))
                log10_h = float(exponent / mpmath.log(10))
            rows.append(ChampionBand(k, E, float(mpmath.log10(E)), log10_h))
    return rows


@dataclass(frozen=True)
class OppermanRow:
    n: int
    pi_low: int
    pi_square: int
    pi_high: int

    @property
    def ok(self) -> bool:
        return self.pi_high > self.pi_square > self.pi_low


def opperman_check(primes: PrimeTable, n_max: int) -> list[OppermanRow]:
    """pi(n^2 - n), pi(n^2), pi(n^2 + n) for 2 <= n <= n_max; filter on ``not ok``."""
    n_max = int(n_max)
    if n_max < 2:
        raise DomainError(f"n_max must be >= 2, got {n_max}")
    _check_bound(primes, n_max * n_max + n_max)
    ps = primes.primes(2, n_max * n_max + n_max)
    n = np.arange(2, n_max + 1, dtype=np.int64)
    sq = n * n

    def pi(v):
        return np.searchsorted(ps, v, side="right")

    lo, mid, hi = pi(sq - n), pi(sq), pi(sq + n)
    return [OppermanRow(int(a), int(b), int(c), int(d)) for a, b, c, d in zip(n, lo, mid, hi)]


def quadratic_prime_count(primes: PrimeTable, n_max: int) -> int:
    """How many 1 <= n <= n_max have n^2 + 1 prime."""
    n_max = int(n_max)
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    _check_bound(primes, n_max * n_max + 1)
    n = np.arange(1, n_max + 1, dtype=np.int64)
    return int(np.count_nonzero(primes.is_prime_many(n * n + 1)))


def quadratic_prime_counts(primes: PrimeTable, n_max: int) -> np.ndarray:
    """Running count: entry i is the count for n_max = i + 1."""
    _check_bound(primes, int(n_max) ** 2 + 1)
    n = np.arange(1, int(n_max) + 1, dtype=np.int64)
    return np.cumsum(primes.is_prime_many(n * n + 1))


def gap_histogram_check(stats: GapStatistics, primes: PrimeTable) -> bool:
    """Histogram total equals pi(bound) - 1."""
    return stats.total == prime_count(primes, stats.bound) - 1

