"""Slow, obviously-correct reference implementations used only by the tests."""

from __future__ import annotations

import math


def is_prime_td(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def primes_td(hi: int) -> list[int]:
    return [k for k in range(2, hi + 1) if is_prime_td(k)]


def partitions_brute(n: int) -> int:
    """Count partitions of n by enumerating non-increasing part sequences."""

    def count(rem: int, largest: int) -> int:
        if rem == 0:
            return 1
        return sum(count(rem - part, part) for part in range(min(rem, largest), 0, -1))

    return count(n, n)


def full_descent(seed: int, budget: int = 10**6) -> tuple[int, int]:
    """(total steps to 1, excursion) by plain iteration."""
    n, steps, peak = seed, 0, seed
    while n != 1:
        n = 3 * n + 1 if n & 1 else n // 2
        steps += 1
        peak = max(peak, n)
        if steps > budget:
            raise RuntimeError(f"seed {seed} exceeded {budget}")
    return steps, peak


def stopping_time(seed: int) -> int:
    n, t = seed, 0
    while n >= seed:
        n = 3 * n + 1 if n & 1 else n // 2
        t += 1
    return t


def gilbreath_first_column(primes: list[int]) -> list[int]:
    """d_k(1) for k = 1 .. N-1 by materialising every row."""
    row, col = list(primes), []
    while len(row) > 1:
        row = [abs(a - b) for a, b in zip(row, row[1:])]
        col.append(row[0])
    return col


def gilbreath_depth(primes: list[int]) -> int:
    """Largest k with d_1(1) = ... = d_k(1) = 1 over the full triangle."""
    depth = 0
    for v in gilbreath_first_column(primes):
        if v != 1:
            break
        depth += 1
    return depth


def minimal_partition_brute(n: int) -> tuple[int, int] | None:
    for p in range(2, n // 2 + 1):
        if is_prime_td(p) and is_prime_td(n - p):
            return p, n - p
    return None


def goldbach_count_brute(n: int) -> int:
    return sum(1 for p in range(2, n // 2 + 1) if is_prime_td(p) and is_prime_td(n - p))


def li_mpmath(x: float, offset: bool = True) -> float:
    import mpmath

    return float(mpmath.li(x, offset=offset))


def log_log(x: float) -> float:
    return math.log(math.log(x))
