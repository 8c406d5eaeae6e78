"""Prime enumeration over ranges and the dyadic sub-window partition.

Sieving is odd-only and segmented: memory stays at O(sqrt(hi) + segment)
no matter how long the range is.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit, prange

from .errors import EmptyRangeError, ParameterError

SEGMENT_SIZE = 1 << 20  # integers per segment
MAX_HI = (1 << 63) - 1


def simple_sieve(n: int) -> np.ndarray:
    """All primes <= n from a single flat sieve (the reference for the segmented one)."""
    if n < 2:
        return np.empty(0, dtype=np.int64)
    is_prime = np.ones(n + 1, dtype=bool)
    is_prime[:2] = False
    for q in range(2, math.isqrt(n) + 1):
        if is_prime[q]:
            is_prime[q * q :: q] = False
    return np.flatnonzero(is_prime).astype(np.int64)


@njit(cache=True)
def _odd_segment(lo, n, base):
    # flags[i] <=> lo + 2*i is prime; lo is odd
    flags = np.ones(n, np.bool_)
    hi = lo + 2 * n
    for k in range(base.size):
        q = base[k]
        if q == 2:
            continue
        qq = q * q
        if qq >= hi:
            break
        start = (lo + q - 1) // q * q
        if start < qq:
            start = qq
        if start % 2 == 0:
            start += q
        for m in range((start - lo) // 2, n, q):
            flags[m] = False
    if lo == 1 and n > 0:
        flags[0] = False
    return flags


@njit(parallel=True, cache=True)
def _count_odd(first, n_total, seg, base):
    nseg = (n_total + seg - 1) // seg
    counts = np.zeros(nseg, np.int64)
    for s in prange(nseg):
        lo = first + 2 * s * seg
        n = min(seg, n_total - s * seg)
        counts[s] = _odd_segment(lo, n, base).sum()
    return counts.sum()


def _odd_span(lo: int, hi: int) -> tuple[int, int]:
    """First odd integer > lo and how many odd integers lie in (lo, hi]."""
    first = lo + 1 if lo % 2 == 0 else lo + 2
    if first > hi:
        return first, 0
    return first, (hi - first) // 2 + 1


def _check_range(lo: int, hi: int) -> None:
    if hi < lo:
        raise EmptyRangeError(f"empty range: hi={hi} < lo={lo}")
    if hi > MAX_HI:
        raise ParameterError(f"hi={hi} exceeds 2^63-1")


def iter_segments(lo: int, hi: int, segment: int = SEGMENT_SIZE):
    """Yield ascending int64 arrays of the primes in (lo, hi], one per segment."""
    _check_range(lo, hi)
    lo = max(lo, 0)
    if lo < 2 <= hi:
        yield np.array([2], dtype=np.int64)
    first, n_total = _odd_span(lo, hi)
    if n_total == 0:
        return
    base = simple_sieve(math.isqrt(hi))
    half = max(segment // 2, 1)
    for start in range(0, n_total, half):
        seg_lo = first + 2 * start
        flags = _odd_segment(seg_lo, min(half, n_total - start), base)
        yield seg_lo + 2 * np.flatnonzero(flags).astype(np.int64)


def sieve_range(lo: int, hi: int, segment: int = SEGMENT_SIZE) -> np.ndarray:
    """Primes p with lo < p <= hi, ascending."""
    parts = list(iter_segments(lo, hi, segment))
    if not parts:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(parts)


def count_range(lo: int, hi: int, segment: int = SEGMENT_SIZE) -> int:
    """#{p prime : lo < p <= hi} without materializing the primes."""
    _check_range(lo, hi)
    lo = max(lo, 0)
    total = 1 if lo < 2 <= hi else 0
    first, n_total = _odd_span(lo, hi)
    if n_total:
        base = simple_sieve(math.isqrt(hi))
        total += int(_count_odd(first, n_total, max(segment // 2, 1), base))
    return total


def prime_count(x: int) -> int:
    """pi(x), the number of primes up to x."""
    if x < 1:
        raise ParameterError("prime_count needs x >= 1")
    return count_range(0, x)


@dataclass(frozen=True)
class PrimeWindow:
    """The partition of (x, 2x] at x_j = floor(x(1+j/B)) + 1/2, j = 0..B.

    Boundaries are kept exactly as the integers floor(x(1+j/B)); the
    half-integer x_j is that integer plus 1/2, so an integer n lies in
    (x_j, x_{j+1}] iff floors[j] < n <= floors[j+1].
    """

    x: int
    omega: float
    B: int
    floors: tuple[int, ...]

    @property
    def boundaries(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(2 * k + 1, 2) for k in self.floors)

    def subwindows(self) -> list[tuple[int, int]]:
        """Integer (lo, hi] pairs equivalent to the half-integer sub-intervals."""
        return list(zip(self.floors[:-1], self.floors[1:]))

    def index_of(self, n: int) -> int:
        """Sub-window index j with x_j < n <= x_{j+1}."""
        if not self.floors[0] < n <= self.floors[-1]:
            raise ParameterError(f"{n} outside ({self.floors[0]}, {self.floors[-1]}]")
        lo, hi = 0, self.B
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.floors[mid] < n:
                lo = mid
            else:
                hi = mid
        return lo


def window_plan(x: int, omega: float) -> PrimeWindow:
    if omega < 1:
        raise ParameterError(f"omega must be >= 1, got {omega}")
    if x < 2:
        raise ParameterError(f"x must be >= 2, got {x}")
    B = math.floor(omega)
    floors = tuple(x * (B + j) // B for j in range(B + 1))
    return PrimeWindow(x=x, omega=omega, B=B, floors=floors)


def window_primes(plan: PrimeWindow) -> list[np.ndarray]:
    """Primes of each sub-window of the plan, in order."""
    return [sieve_range(a, b) for a, b in plan.subwindows()]
