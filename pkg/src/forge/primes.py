"""Segmented, bit-packed, odd-only sieve of Eratosthenes and prime queries.

Odd integer ``2*j + 1`` lives in slot ``j``.  Slots are grouped into segments
of ``span`` slots (a power of two); each segment is a little-endian packed
array of *composite* flags, so a zero bit marks a prime.  All segments are
views into one flat buffer, which keeps vectorised membership lookups cheap.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .accel import njit, use_numba
from .errors import DomainError, OutOfRangeError

MAX_BOUND = 10**10
DEFAULT_SPAN = 1 << 20
_BLOCK_BYTES = 64
_BLOCK_SLOTS = _BLOCK_BYTES * 8

_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)
_EULER_GAMMA = 0.57721566490153286061


def small_primes(limit: int) -> np.ndarray:
    """Plain (unsegmented) sieve, used for base primes up to sqrt(bound)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    is_p[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if is_p[p]:
            is_p[p * p :: 2 * p] = False
    return np.flatnonzero(is_p).astype(np.int64)


@njit
def _mark_segment_nb(base, start, flags):
    n = flags.shape[0]
    hi = start + 2 * n
    for i in range(base.shape[0]):
        p = base[i]
        pp = p * p
        if pp >= hi:
            break
        if pp >= start:
            m = pp
        else:
            m = ((start + p - 1) // p) * p
            if m % 2 == 0:
                m += p
        j = (m - start) // 2
        while j < n:
            flags[j] = 1
            j += p


def _mark_segment_np(base, start, flags):
    n = flags.shape[0]
    hi = start + 2 * n
    for p in base.tolist():
        pp = p * p
        if pp >= hi:
            break
        if pp >= start:
            m = pp
        else:
            m = -(-start // p) * p
            if m % 2 == 0:
                m += p
        flags[(m - start) // 2 :: p] = 1


def _composite_flags(base: np.ndarray, start: int, nslots: int, limit: int) -> np.ndarray:
    """Composite flags (uint8, 1 = not prime) for odd integers start, start+2, ...

    Slots whose integer exceeds ``limit`` are flagged composite.
    """
    flags = np.zeros(nslots, dtype=np.uint8)
    odd_base = base[base > 2]
    if use_numba():
        _mark_segment_nb(odd_base, start, flags)
    else:
        _mark_segment_np(odd_base, start, flags)
    if start == 1:
        flags[0] = 1  # 1 is not prime
    last_valid = (limit - start) // 2 if limit >= start else -1
    if last_valid + 1 < nslots:
        flags[max(last_valid + 1, 0) :] = 1
    return flags


@dataclass(frozen=True)
class PrimeSegment:
    start: int
    span: int
    bits: np.ndarray

    def flags(self) -> np.ndarray:
        """Decoded composite flags, one bool per odd slot."""
        return np.unpackbits(self.bits, bitorder="little").astype(bool)

    def primes(self) -> np.ndarray:
        odd = np.flatnonzero(~self.flags()).astype(np.int64) * 2 + self.start
        return odd


class PrimeTable:
    """Immutable store of primes up to an inclusive ``bound``.

    Build with :func:`build_table`.  Safe to share between threads.
    """

    def __init__(self, bound: int, span: int, bits: np.ndarray):
        self.bound = int(bound)
        self.span = int(span)
        self.bits = bits
        self.bits.flags.writeable = False
        seg_bytes = span // 8
        nseg = len(bits) // seg_bytes
        self.segments = [
            PrimeSegment(1 + 2 * span * i, span, bits[i * seg_bytes : (i + 1) * seg_bytes])
            for i in range(nseg)
        ]
        per_byte = (8 - _POPCOUNT[bits]).astype(np.int64)
        per_block = per_byte.reshape(-1, _BLOCK_BYTES).sum(axis=1)
        self._block_cum = np.concatenate(([0], np.cumsum(per_block)))
        per_seg = per_block.reshape(nseg, -1).sum(axis=1)
        # the prime 2 is not an odd slot; count it from the first segment on
        self.count_index = np.cumsum(per_seg) + 1
        self.count_index.flags.writeable = False

    def __repr__(self) -> str:
        return f"PrimeTable(bound={self.bound}, segments={len(self.segments)}, pi={self.pi_bound})"

    @property
    def pi_bound(self) -> int:
        return int(self.count_index[-1])

    # membership -------------------------------------------------------

    def is_prime(self, k: int) -> bool:
        k = int(k)
        if k > self.bound:
            raise OutOfRangeError(f"{k} exceeds table bound {self.bound}")
        if k < 2:
            return False
        if k % 2 == 0:
            return k == 2
        j = k >> 1
        return not (self.bits[j >> 3] >> (j & 7)) & 1

    __contains__ = is_prime

    def is_prime_many(self, values) -> np.ndarray:
        """Vectorised membership test for an integer array."""
        v = np.asarray(values, dtype=np.int64)
        if v.size and int(v.max()) > self.bound:
            raise OutOfRangeError(f"{int(v.max())} exceeds table bound {self.bound}")
        j = np.clip(v, 0, None) >> 1
        composite = (self.bits[j >> 3] >> (j & 7).astype(np.uint8)) & 1
        out = (composite == 0) & (v % 2 == 1) & (v > 1)
        return out | (v == 2)

    def prime_flags(self, lo: int, hi: int) -> np.ndarray:
        """Boolean primality of every integer in ``[lo, hi]``."""
        lo, hi = max(int(lo), 0), int(hi)
        if hi > self.bound:
            raise OutOfRangeError(f"{hi} exceeds table bound {self.bound}")
        if hi < lo:
            return np.zeros(0, dtype=bool)
        return self.is_prime_many(np.arange(lo, hi + 1, dtype=np.int64))

    # counting ----------------------------------------------------------

    def _odd_count_through_slot(self, slot: int) -> int:
        """Number of odd primes among slots 0..slot inclusive."""
        nslots = slot + 1
        block, rem = divmod(nslots, _BLOCK_SLOTS)
        total = int(self._block_cum[block])
        b0 = block * _BLOCK_BYTES
        full_bytes, bits_left = divmod(rem, 8)
        if full_bytes:
            chunk = self.bits[b0 : b0 + full_bytes]
            total += 8 * full_bytes - int(_POPCOUNT[chunk].sum(dtype=np.int64))
        if bits_left:
            byte = int(self.bits[b0 + full_bytes]) & ((1 << bits_left) - 1)
            total += bits_left - bin(byte).count("1")
        return total

    def primes(self, lo: int = 2, hi: int | None = None) -> np.ndarray:
        """All primes in ``[lo, hi]`` as int64, ascending."""
        hi = self.bound if hi is None else int(hi)
        if hi > self.bound:
            raise OutOfRangeError(f"{hi} exceeds table bound {self.bound}")
        lo = max(int(lo), 2)
        if hi < lo:
            return np.zeros(0, dtype=np.int64)
        s_lo, s_hi = lo // 2, (hi - 1) // 2
        b_lo, b_hi = s_lo >> 3, (s_hi >> 3) + 1
        flags = np.unpackbits(self.bits[b_lo:b_hi], bitorder="little")
        slots = np.flatnonzero(flags == 0).astype(np.int64) + 8 * b_lo
        odd = 2 * slots + 1
        odd = odd[(odd >= lo) & (odd <= hi)]
        if lo <= 2:
            return np.concatenate((np.array([2], dtype=np.int64), odd))
        return odd


def build_table(bound: int, span: int = DEFAULT_SPAN, workers: int = 1) -> PrimeTable:
    """Sieve all primes up to ``bound`` inclusive.

    Segments are independent, so ``workers > 1`` sieves them on a thread pool;
    the result is bit-identical for any worker count.
    """
    bound = int(bound)
    if bound < 2 or bound > MAX_BOUND:
        raise DomainError(f"bound must lie in [2, {MAX_BOUND}], got {bound}")
    if span < _BLOCK_SLOTS or span & (span - 1):
        raise DomainError(f"span must be a power of two >= {_BLOCK_SLOTS}, got {span}")
    nslots = bound // 2 + 1
    nseg = -(-nslots // span)
    # avoid a 2^20-slot segment for tiny bounds
    if nseg == 1:
        span = max(_BLOCK_SLOTS, 1 << (nslots - 1).bit_length())
    seg_bytes = span // 8
    bits = np.empty(nseg * seg_bytes, dtype=np.uint8)
    base = small_primes(math.isqrt(bound))

    def fill(i: int) -> None:
        flags = _composite_flags(base, 1 + 2 * span * i, span, bound)
        bits[i * seg_bytes : (i + 1) * seg_bytes] = np.packbits(flags, bitorder="little")

    if workers > 1 and nseg > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, range(nseg)))
    else:
        for i in range(nseg):
            fill(i)
    return PrimeTable(bound, span, bits)


def sieve_window(lo: int, hi: int) -> np.ndarray:
    """Standalone sieve of ``[lo, hi]``: boolean primality per integer.

    Independent of any table; used to cross-check segment contents.
    """
    lo, hi = max(int(lo), 0), int(hi)
    if hi < lo:
        return np.zeros(0, dtype=bool)
    out = np.zeros(hi - lo + 1, dtype=bool)
    start = lo if lo % 2 else lo + 1
    if start <= hi:
        nslots = (hi - start) // 2 + 1
        flags = _composite_flags(small_primes(math.isqrt(hi)), start, nslots, hi)
        out[start - lo :: 2] = flags == 0
    if lo <= 2 <= hi:
        out[2 - lo] = True
    return out


def prime_count(table: PrimeTable, n: int) -> int:
    """pi(n): the number of primes <= n."""
    n = int(n)
    if n > table.bound:
        raise OutOfRangeError(f"n={n} exceeds table bound {table.bound}")
    if n < 2:
        return 0
    if n < 3:
        return 1
    return 1 + table._odd_count_through_slot((n - 1) // 2)


def nth_prime(table: PrimeTable, m: int) -> int:
    """The m-th prime (p_1 = 2)."""
    m = int(m)
    pi_b = table.pi_bound
    if m < 1 or m > pi_b:
        raise OutOfRangeError(f"m must lie in [1, {pi_b}] (pi(bound) = {pi_b}), got {m}")
    if m == 1:
        return 2
    k = m - 1  # index among odd primes, 1-based
    block = int(np.searchsorted(table._block_cum, k, side="left")) - 1
    before = int(table._block_cum[block])
    b0 = block * _BLOCK_BYTES
    flags = np.unpackbits(table.bits[b0 : b0 + _BLOCK_BYTES], bitorder="little")
    pos = np.flatnonzero(flags == 0)[k - before - 1]
    return 2 * (8 * b0 + int(pos)) + 1


def _li2() -> float:
    """li(2) from the series li(x) = gamma + ln ln x + sum (ln x)^k / (k k!)."""
    lx = math.log(2.0)
    terms, term = [], 1.0
    for k in range(1, 60):
        term *= lx / k
        terms.append(term / k)
    return _EULER_GAMMA + math.log(lx) + math.fsum(terms)


LI2 = _li2()


def _adaptive_simpson(f, a: float, b: float, tol: float) -> float:
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) * (fa + 4 * fm + fb) / 6
    stack = [(a, b, fa, fm, fb, whole)]
    parts = []
    while stack:
        a, b, fa, fm, fb, whole = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) * (fa + 4 * flm + fm) / 6
        right = (b - m) * (fm + 4 * frm + fb) / 6
        delta = left + right - whole
        if abs(delta) <= 15 * tol or b - a < 1e-9:
            parts.append(left + right + delta / 15)
        else:
            stack.append((a, m, fa, flm, fm, left))
            stack.append((m, b, fm, frm, fb, right))
    return math.fsum(parts)


def logarithmic_integral(n: float, offset: bool = True) -> float:
    """Integral of dt/log t from 2 to n by adaptive Simpson quadrature.

    ``offset=False`` adds li(2), giving the principal-value integral from 0
    that historical tables (Gauss's among them) tabulate.
    """
    n = float(n)
    if not n >= 2:
        raise DomainError(f"logarithmic integral needs n >= 2, got {n}")
    edges = [2.0]
    while edges[-1] * 2 < n:
        edges.append(edges[-1] * 2)
    edges.append(n)
    total = math.fsum(
        _adaptive_simpson(lambda t: 1.0 / math.log(t), a, b, 1e-6) for a, b in zip(edges, edges[1:]) if b > a
    )
    return total if offset else total + LI2
