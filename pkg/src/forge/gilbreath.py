"""Iterated absolute differences of consecutive primes.

Rows after the first are stored in uint8 once every entry fits; until then
they stay int32.  Subtraction is written as max - min so unsigned rows never
wrap.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .accel import njit, use_numba
from .errors import DomainError, OutOfRangeError
from .primes import PrimeTable, prime_count

CERTIFIED = "certified"
COUNTEREXAMPLE = "counterexample"
INCONCLUSIVE = "inconclusive"

_RUNNING, _TAIL, _BAD_HEAD, _COLLAPSED = 0, 1, 2, 3


@dataclass
class DifferenceTriangle:
    base_count: int
    rows: list[np.ndarray]
    first_column: tuple[int, ...]

    @property
    def depth(self) -> int:
        return len(self.rows) - 1


@dataclass(frozen=True)
class GilbreathVerdict:
    prime_bound: int
    base_count: int
    K: int
    N: int
    depth_guaranteed: int
    tail_ok: bool
    status: str
    offending_k: int | None = None


def _first_primes(primes: PrimeTable, count: int) -> np.ndarray:
    if primes.pi_bound < count:
        raise OutOfRangeError(f"table holds {primes.pi_bound} primes, {count} requested")
    # p_count < 2 * count * log(count) + small slack; grow until enough
    hi = min(primes.bound, max(16, int(count * (np.log(count + 2) + np.log(np.log(count + 3)) + 3))))
    while True:
        ps = primes.primes(2, hi)
        if ps.size >= count or hi == primes.bound:
            return ps[:count]
        hi = min(primes.bound, 2 * hi)


def _next_row(row: np.ndarray) -> np.ndarray:
    a, b = row[:-1], row[1:]
    return np.maximum(a, b) - np.minimum(a, b)


def _narrow(row: np.ndarray) -> np.ndarray:
    if row.dtype != np.uint8 and row.size and int(row.max()) <= 255:
        return row.astype(np.uint8)
    return row


def difference_triangle(primes: PrimeTable, N: int, depth: int) -> DifferenceTriangle:
    """Materialise rows 0..depth of the triangle over the first N primes."""
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    if not 0 <= depth <= N - 1:
        raise DomainError(f"depth must lie in [0, {N - 1}], got {depth}")
    rows = [_first_primes(primes, N)]
    for k in range(1, depth + 1):
        nxt = _next_row(rows[-1] if k > 1 else rows[-1].astype(np.int32))
        rows.append(_narrow(nxt))
    return DifferenceTriangle(N, rows, tuple(int(r[0]) for r in rows[1:]))


@njit
def _advance_nb(row, width, k, max_rows):
    """Advance the triangle in place until a verdict or ``max_rows`` rows."""
    done = 0
    while done < max_rows:
        if width < 2:
            return _COLLAPSED, k, width
        for i in range(width - 1):
            a = row[i]
            b = row[i + 1]
            row[i] = a - b if a > b else b - a
        width -= 1
        k += 1
        done += 1
        if row[0] != 1:
            return _BAD_HEAD, k, width
        if width >= 2:
            tail = True
            for i in range(1, width):
                v = row[i]
                if v != 0 and v != 2:
                    tail = False
                    break
            if tail:
                return _TAIL, k, width
    return _RUNNING, k, width


def _advance_np(row, width, k, max_rows):
    done = 0
    while done < max_rows:
        if width < 2:
            return _COLLAPSED, k, width
        cur = row[:width]
        row[: width - 1] = np.maximum(cur[:-1], cur[1:]) - np.minimum(cur[:-1], cur[1:])
        width -= 1
        k += 1
        done += 1
        if row[0] != 1:
            return _BAD_HEAD, k, width
        if width >= 2:
            tail = row[1:width]
            if np.all((tail == 0) | (tail == 2)):
                return _TAIL, k, width
    return _RUNNING, k, width


def verify_depth(primes: PrimeTable, N: int) -> GilbreathVerdict:
    """Certify d_k(1) = 1 for the triangle over the first N primes.

    Rows are produced one at a time.  At the first row K whose entries after
    the head are all 0 or 2 (with every head so far equal to 1), every later
    head is forced to 1, so depth ``width_K + K - 1`` is certified without
    building the remaining rows.
    """
    N = int(N)
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    base = _first_primes(primes, N)
    bound = int(base[-1])
    row = np.diff(base).astype(np.int32)
    width, k = row.size, 1
    if row[0] != 1:
        return GilbreathVerdict(bound, N, 1, width, 0, False, COUNTEREXAMPLE, 1)
    if width >= 2 and np.all((row[1:] == 0) | (row[1:] == 2)):
        code = _TAIL
    elif width < 2:
        code = _COLLAPSED
    else:
        code = _RUNNING
    advance = _advance_nb if use_numba() else _advance_np
    while code == _RUNNING:
        if row.dtype != np.uint8 and int(row[:width].max()) <= 255:
            row = row[:width].astype(np.uint8)
        step = 1 if row.dtype != np.uint8 else width
        code, k, width = advance(row, width, k, step)
        code, k, width = int(code), int(k), int(width)
    if code == _TAIL:
        return GilbreathVerdict(bound, N, k, width, width + k - 1, True, CERTIFIED)
    if code == _BAD_HEAD:
        return GilbreathVerdict(bound, N, k, width, k - 1, False, COUNTEREXAMPLE, k)
    return GilbreathVerdict(bound, N, k, width, 0, False, INCONCLUSIVE)


def verify_prime_bound(primes: PrimeTable, prime_bound: int) -> GilbreathVerdict:
    """Verify the triangle over all primes strictly below ``prime_bound``."""
    if prime_bound - 1 > primes.bound:
        raise OutOfRangeError(f"table bound {primes.bound} does not cover primes < {prime_bound}")
    verdict = verify_depth(primes, prime_count(primes, prime_bound - 1))
    return replace(verdict, prime_bound=int(prime_bound))
