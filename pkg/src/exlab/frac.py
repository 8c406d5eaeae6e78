"""Fractional parts {alpha p^theta} with error control and exact decisions.

Two routes decide every comparison:

* exact: alpha rational and theta in {0, 1/2, 1}. alpha p^theta is then
  rational or r*sqrt(p), and floors and comparisons reduce to integer
  square roots. Python floats are dyadic rationals, so a float alpha
  takes this route too.
* enclosures: an interval [lo, hi] containing alpha p^theta, first from
  double arithmetic with a rounding-error bound, then from mpmath interval
  arithmetic at 128 and 256 bits. A decision that is still open at 256 bits
  is reported as uncertain, never guessed.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np
from mpmath import mp, mpf
from mpmath.ctx_iv import MPIntervalContext

from .errors import ParameterError, UncertainDecision

PRECISIONS = (53, 128, 256)
TARGET_ERR = 2.0**-40
HALF = Fraction(1, 2)


class Membership(enum.Enum):
    IN = "In"
    OUT = "Out"
    UNCERTAIN = "Uncertain"


@dataclass(frozen=True)
class FracValue:
    """{alpha p^theta} as a double; err bounds |value - true|.

    int_part is the exact integer part when it was decided rigorously.
    """

    value: float
    err: float
    exact: bool
    int_part: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.value < 1.0:
            raise ParameterError(f"fractional part {self.value} outside [0, 1)")
        if self.exact and self.err != 0:
            raise ParameterError("an exact value carries no error")


@dataclass(frozen=True)
class WindowSpec:
    delta1: Fraction
    delta2: Fraction

    def __init__(self, delta1, delta2):
        d1, d2 = to_fraction(delta1), to_fraction(delta2)
        if not 0 <= d1 < d2 <= 1:
            raise ParameterError(f"empty window: need 0 <= delta1 < delta2 <= 1, got [{d1}, {d2})")
        object.__setattr__(self, "delta1", d1)
        object.__setattr__(self, "delta2", d2)

    @property
    def delta(self) -> Fraction:
        return self.delta2 - self.delta1

    def contains(self, f) -> bool:
        return self.delta1 <= f < self.delta2


def to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, Rational)):
        return Fraction(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ParameterError(f"non-finite parameter {v}")
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    raise ParameterError(f"cannot read {v!r} as a real number")


def _check(alpha, theta) -> tuple[Fraction, Fraction]:
    a, t = to_fraction(alpha), to_fraction(theta)
    if a <= 0:
        raise ParameterError(f"alpha must be > 0, got {alpha}")
    if not 0 <= t <= 1:
        raise ParameterError(f"theta must lie in [0, 1], got {theta}")
    return a, t


class _ExactPower:
    """alpha p^theta for theta in {0, 1/2, 1}: either rational, or r*sqrt(p)."""

    def __init__(self, alpha: Fraction, theta: Fraction, p: int):
        self.p = p
        if theta == HALF:
            self.rational = None
            self.r = alpha
        else:
            self.rational = alpha * (p if theta == 1 else 1)

    def floor_minus(self, d: Fraction) -> int:
        """floor(y - d)."""
        if self.rational is not None:
            return math.floor(self.rational - d)
        u, v = self.r.numerator, self.r.denominator
        e, f = d.numerator, d.denominator
        # y - d = (sqrt(u^2 f^2 p) - e v) / (v f)
        return (math.isqrt(u * u * f * f * self.p) - e * v) // (v * f)

    def cmp(self, q: Fraction) -> int:
        """sign(y - q)."""
        if self.rational is not None:
            diff = self.rational - q
            return (diff > 0) - (diff < 0)
        if q < 0:
            return 1
        lhs, rhs = self.r * self.r * self.p, q * q
        return (lhs > rhs) - (lhs < rhs)

    def frac(self) -> tuple[float, float, bool, int]:
        n = self.floor_minus(Fraction(0))
        if self.rational is not None:
            f = self.rational - n
            v = float(f)
            exact = Fraction(v) == f
            return v, (0.0 if exact else math.ulp(v) / 2), exact, n
        with mp.workprec(200):
            v = float(mpf(self.r.numerator) * mp.sqrt(self.p) / self.r.denominator - n)
        v = min(v, 1.0 - 2**-53)
        return v, math.ulp(v), False, n


def _exact(alpha: Fraction, theta: Fraction, p: int) -> _ExactPower | None:
    if theta in (0, HALF, 1):
        return _ExactPower(alpha, theta, p)
    return None


def _mpf_fraction(raw) -> Fraction:
    """Exact value of a raw mpf tuple (sign, mantissa, exponent, bitcount)."""
    sign, man, exp, _ = raw
    if not man:
        if exp:  # inf / nan encodings
            raise UncertainDecision(0, "non-finite enclosure")
        return Fraction(0)
    v = Fraction(int(man)) * Fraction(2) ** exp
    return -v if sign else v


@functools.lru_cache(maxsize=None)
def _interval_context(prec: int) -> MPIntervalContext:
    # one private context per precision, so no global precision state is touched
    ctx = MPIntervalContext()
    ctx.prec = prec
    return ctx


def _power_enclosure(alpha: Fraction, theta: Fraction, base: int, prec: int, sign: int = 1):
    """[lo, hi] (as Fractions) containing alpha * base^(sign*theta)."""
    if prec <= 53:
        y = float(alpha) * float(base) ** (sign * float(theta))
        # double pow is within 1 ulp; theta's own rounding moves y by y*ln(base)*2^-53
        err = abs(y) * 2.0**-52 * (4 + math.log(base)) + 2.0**-1070
        fy, fe = Fraction(y), Fraction(err)
        return fy - fe, fy + fe
    iv = _interval_context(prec)
    a = iv.mpf(alpha.numerator) / alpha.denominator
    t = iv.mpf(theta.numerator) / theta.denominator
    y = a * iv.exp(sign * t * iv.log(iv.mpf(base)))
    lo, hi = y._mpi_
    return _mpf_fraction(lo), _mpf_fraction(hi)


def _membership_from(lo: Fraction, hi: Fraction, w: WindowSpec) -> Membership:
    n = math.floor(lo)
    if math.floor(hi) != n:
        return Membership.UNCERTAIN
    f_lo, f_hi = lo - n, hi - n
    if w.delta1 <= f_lo and f_hi < w.delta2:
        return Membership.IN
    if f_hi < w.delta1 or f_lo >= w.delta2:
        return Membership.OUT
    return Membership.UNCERTAIN


def frac_power(alpha, theta, p: int) -> FracValue:
    """{alpha p^theta} with err <= 2^-40 and, when decidable, the exact integer part."""
    a, t = _check(alpha, theta)
    ex = _exact(a, t, p)
    if ex is not None:
        v, err, exact, n = ex.frac()
        return FracValue(v, err, exact, n)
    for prec in PRECISIONS:
        lo, hi = _power_enclosure(a, t, p, prec)
        n = math.floor(lo)
        if math.floor(hi) == n and (hi - lo) / 2 <= TARGET_ERR:
            mid = (lo + hi) / 2 - n
            v = min(float(mid), 1.0 - 2**-53)
            err = float((hi - lo) / 2) + math.ulp(v)
            return FracValue(v, err, False, n)
    # integer part undecided even at 256 bits: y sits on an integer to within 2^-200
    lo, hi = _power_enclosure(a, t, p, PRECISIONS[-1])
    v = float((lo + hi) / 2) % 1.0
    return FracValue(min(v, 1.0 - 2**-53), float(hi - lo) + 2**-52, False, None)


def _pieces(v: FracValue):
    """Sub-intervals of [0, 1) that can hold the true fractional part."""
    lo, hi = v.value - v.err, v.value + v.err
    if v.exact or v.err == 0:
        return [(v.value, v.value)]
    if v.err >= 0.5:
        return [(0.0, 1.0)]
    out = [(max(lo, 0.0), min(hi, 1.0))]
    if lo < 0:
        out.append((1.0 + lo, 1.0))
    if hi >= 1:
        out.append((0.0, hi - 1.0))
    return out


def in_half_open(v: FracValue, w: WindowSpec) -> Membership:
    """Is the fractional part in [delta1, delta2), robustly under +-err?"""
    d1, d2 = float(w.delta1), float(w.delta2)
    verdicts = set()
    for lo, hi in _pieces(v):
        if d1 <= lo and hi < d2:
            verdicts.add(Membership.IN)
        elif hi < d1 or lo >= d2:
            verdicts.add(Membership.OUT)
        else:
            verdicts.add(Membership.UNCERTAIN)
    return verdicts.pop() if len(verdicts) == 1 else Membership.UNCERTAIN


def membership(alpha, theta, w: WindowSpec, p: int, precisions=PRECISIONS) -> bool:
    """delta1 <= {alpha p^theta} < delta2, decided by direct comparison."""
    a, t = _check(alpha, theta)
    ex = _exact(a, t, p)
    if ex is not None:
        n = ex.floor_minus(Fraction(0))
        return ex.cmp(n + w.delta1) >= 0 and ex.cmp(n + w.delta2) < 0
    for prec in precisions:
        m = _membership_from(*_power_enclosure(a, t, p, prec), w)
        if m is not Membership.UNCERTAIN:
            return m is Membership.IN
    raise UncertainDecision(p)


def membership_at(alpha, theta, w: WindowSpec, p: int, prec: int) -> Membership:
    """Membership from a single enclosure level, without escalation."""
    a, t = _check(alpha, theta)
    return _membership_from(*_power_enclosure(a, t, p, prec), w)


def indicator_bracket(alpha, theta, w: WindowSpec, p: int) -> int:
    """[alpha p^theta - delta1] - [alpha p^theta - delta2], which is 1 exactly on the window."""
    a, t = _check(alpha, theta)
    ex = _exact(a, t, p)
    if ex is not None:
        value = ex.floor_minus(w.delta1) - ex.floor_minus(w.delta2)
    else:
        for prec in PRECISIONS:
            lo, hi = _power_enclosure(a, t, p, prec)
            f1, f2 = math.floor(lo - w.delta1), math.floor(lo - w.delta2)
            if f1 == math.floor(hi - w.delta1) and f2 == math.floor(hi - w.delta2):
                value = f1 - f2
                break
        else:
            raise UncertainDecision(p, "bracket identity")
    assert value == int(membership(a, t, w, p)), f"bracket identity broken at p={p}"
    return value


def floor_two_sqrt(p: int) -> int:
    return math.isqrt(4 * p)


def bridge_residue(p: int, ell: int, verify: bool = False) -> int:
    """[2 sqrt(p)] mod ell in integer arithmetic.

    With verify=True, also checks that {2 sqrt(p)/ell} lands in
    [a/ell, (a+1)/ell) for the returned a.
    """
    if ell < 3 or ell % 2 == 0:
        raise ParameterError(f"ell must be an odd prime, got {ell}")
    a = math.isqrt(4 * p) % ell
    if verify:
        w = WindowSpec(Fraction(a, ell), Fraction(a + 1, ell))
        if not membership(Fraction(2, ell), HALF, w, p):
            raise AssertionError(f"fractional-window check failed for p={p}, ell={ell}")
    return a


def landau_indicator(alpha, theta, lam, p: int) -> bool:
    """{alpha p^theta} < p^(-lam)."""
    a, t = _check(alpha, theta)
    lam = to_fraction(lam)
    if lam < 0:
        raise ParameterError(f"lambda must be >= 0, got {lam}")
    if lam == 0:
        return True
    ex = _exact(a, t, p)
    if ex is not None and t == HALF and lam == HALF:
        # {r sqrt p} < 1/sqrt p  <=>  r p - 1 < n sqrt p
        n = ex.floor_minus(Fraction(0))
        lhs = a * p - 1
        if lhs < 0:
            return True
        return lhs * lhs < n * n * p
    if ex is not None and ex.rational is not None and lam.denominator == 1:
        f = ex.rational - math.floor(ex.rational)
        return f < Fraction(1, p ** lam.numerator)
    for prec in PRECISIONS:
        lo, hi = _power_enclosure(a, t, p, prec)
        n = math.floor(lo)
        if math.floor(hi) != n:
            continue
        f_lo, f_hi = lo - n, hi - n
        q_lo, q_hi = _power_enclosure(Fraction(1), lam, p, prec, sign=-1)
        if f_hi < q_lo:
            return True
        if f_lo >= q_hi:
            return False
    raise UncertainDecision(p, "Landau condition")


def frac_power_many(alpha, theta, primes) -> np.ndarray:
    """Vectorized {alpha p^theta} as doubles (absolute error below 1e-9 for p < 2^40)."""
    a, t = _check(alpha, theta)
    ps = np.asarray(primes, dtype=np.int64)
    if t == HALF and a.numerator < 2**10 and a.denominator < 2**10:
        u, v = a.numerator, a.denominator
        M = (u * u) * ps
        s = np.floor(np.sqrt(M.astype(np.float64))).astype(np.int64)
        s -= (s * s > M).astype(np.int64)
        s += ((s + 1) * (s + 1) <= M).astype(np.int64)
        n = s // v
        y = np.sqrt(M.astype(np.float64)) / v
        return np.clip(y - n, 0.0, np.nextafter(1.0, 0.0))
    y = float(a) * ps.astype(np.float64) ** float(t)
    return np.clip(y - np.floor(y), 0.0, np.nextafter(1.0, 0.0))


def star_discrepancy(samples):
    """D*_N = max_i max(i/N - x_(i), x_(i) - (i-1)/N) over the sorted sample.

    A sample made entirely of Fractions gives an exact Fraction result.
    """
    samples = list(samples) if not isinstance(samples, np.ndarray) else samples
    if len(samples) == 0:
        raise ParameterError("star discrepancy of an empty sample")
    if not isinstance(samples, np.ndarray) and all(isinstance(s, Fraction) for s in samples):
        xs = sorted(samples)
        if xs[0] < 0 or xs[-1] >= 1:
            raise ParameterError("samples must lie in [0, 1)")
        n = len(xs)
        return max(max(Fraction(i, n) - x, x - Fraction(i - 1, n)) for i, x in enumerate(xs, 1))
    x = np.sort(np.asarray(samples, dtype=np.float64))
    if x[0] < 0 or x[-1] >= 1:
        raise ParameterError("samples must lie in [0, 1)")
    n = x.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - x), np.max(x - (i - 1) / n)))


def ks_statistic(samples, cdf) -> float:
    """Kolmogorov-Smirnov distance between the sample and a continuous CDF."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    if x.size == 0:
        raise ParameterError("KS statistic of an empty sample")
    n = x.size
    F = np.asarray(cdf(x), dtype=np.float64)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def ks_uniform(samples) -> float:
    return ks_statistic(samples, lambda x: x)
