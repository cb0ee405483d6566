"""Exact partition numbers and the Hardy-Ramanujan principal term."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import mpmath

from .errors import DomainError, OutOfRangeError

MAX_N = 10**5
_DPS = 40

_cache: list[int] = [1]
_lock = threading.Lock()


def _extend(n: int) -> None:
    p = _cache
    for m in range(len(p), n + 1):
        total, k = 0, 1
        while True:
            g1 = k * (3 * k - 1) // 2
            if g1 > m:
                break
            g2 = g1 + k  # k(3k+1)/2
            term = p[m - g1] + (p[m - g2] if g2 <= m else 0)
            total += term if k & 1 else -term
            k += 1
        p.append(total)


def partition_exact(n: int) -> int:
    """p(n) by Euler's pentagonal-number recurrence.

    Values are memoised in a module-level table; one writer extends it under
    a lock while readers only index already-built entries.
    """
    n = int(n)
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if n > MAX_N:
        raise OutOfRangeError(f"n={n} exceeds the cap {MAX_N}")
    if n >= len(_cache):
        with _lock:
            if n >= len(_cache):
                _extend(n)
    return _cache[n]


def ordered_compositions(n: int) -> int:
    """Number of ordered sums of positive integers equal to n: 2^(n-1)."""
    n = int(n)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return 1 << (n - 1)


def _principal_mp(n) -> mpmath.mpf:
    C = 2 * mpmath.pi / mpmath.sqrt(6)
    lam = mpmath.sqrt(mpmath.mpf(n) - mpmath.mpf(1) / 24)
    return mpmath.exp(C * lam) * (C * lam - 1) / (2 * lam**3) / (2 * mpmath.pi * mpmath.sqrt(2))


def _undifferentiated_mp(x) -> mpmath.mpf:
    C = 2 * mpmath.pi / mpmath.sqrt(6)
    lam = mpmath.sqrt(mpmath.mpf(x) - mpmath.mpf(1) / 24)
    return mpmath.exp(C * lam) / lam / (2 * mpmath.pi * mpmath.sqrt(2))


def _check_positive(n: int) -> int:
    n = int(n)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return n


def hardy_ramanujan_principal(n: int) -> float:
    """First term of the Hardy-Ramanujan series with the derivative done by hand.

    With C = 2 pi / sqrt 6 and lam = sqrt(n - 1/24) the value is
    e^(C lam) (C lam - 1) / (2 lam^3) / (2 pi sqrt 2).  Evaluated at 40
    digits and rounded once, so the float carries every bit it can.
    """
    n = _check_positive(n)
    with mpmath.workdps(_DPS):
        return float(_principal_mp(n))


def principal_finite_difference(n: int, step: float = 1e-3) -> float:
    """Central difference of e^(C lam) / lam / (2 pi sqrt 2); cross-checks the derivative."""
    n = _check_positive(n)
    with mpmath.workdps(_DPS):
        h = mpmath.mpf(step)
        return float((_undifferentiated_mp(n + h) - _undifferentiated_mp(n - h)) / (2 * h))


def crude_asymptotic(n: int) -> float:
    """e^(pi sqrt(2n/3)) / (4 sqrt(3) n)."""
    n = _check_positive(n)
    with mpmath.workdps(_DPS):
        return float(mpmath.exp(mpmath.pi * mpmath.sqrt(mpmath.mpf(2 * n) / 3)) / (4 * mpmath.sqrt(3) * n))


@dataclass(frozen=True)
class PartitionValue:
    n: int
    exact: int
    principal_term: float
    crude: float
    principal_ratio: float
    crude_ratio: float


def partition_value(n: int) -> PartitionValue:
    """p(n) beside both approximations; ratios are p(n) / approximation.

    Ratios are formed at 40 digits, so they stay finite where the
    approximations themselves overflow a float (n above about 76000).
    """
    n = _check_positive(n)
    exact = partition_exact(n)
    with mpmath.workdps(_DPS):
        pr = _principal_mp(n)
        cr = mpmath.exp(mpmath.pi * mpmath.sqrt(mpmath.mpf(2 * n) / 3)) / (4 * mpmath.sqrt(3) * n)
        ex = mpmath.mpf(exact)
        return PartitionValue(n, exact, _to_float(pr), _to_float(cr), float(ex / pr), float(ex / cr))


def _to_float(x) -> float:
    try:
        return float(x)
    except OverflowError:
        return math.inf


def compare(ns) -> list[PartitionValue]:
    return [partition_value(n) for n in ns]
