"""Elliptic curves over Q, reduction mod p, and Frobenius traces a_p."""
from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, field

import numpy as np

from . import _ec_kernels as K
from .errors import AmbiguousOrder, BadReduction, ParameterError
from .primes import sieve_range

NAIVE_LIMIT = 10_000
BSGS_MIN_P = 229


class Method(enum.Enum):
    NAIVE = "Naive"
    BSGS = "Bsgs"
    CACHE = "Cache"


class ExtremalStatus(enum.Enum):
    PLUS = "Plus"
    MINUS = "Minus"
    NO = "No"


def _prime_divisors(n: int) -> tuple[int, ...]:
    n = abs(n)
    out = []
    d = 2
    while d * d <= n and d < 1_000_000:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        if d * d > n:
            out.append(n)
        else:
            from sympy import factorint

            out.extend(factorint(n))
    return tuple(sorted(out))


@dataclass(frozen=True)
class CurveQ:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over Q.

    bad_primes is the prime support of the model discriminant; for a
    non-minimal model it can be larger than the conductor's support.
    """

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    label: str = ""
    declared_cm: bool = False
    bad_primes: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        if self.discriminant == 0:
            raise ParameterError(f"singular model {self.coeffs} (discriminant 0)")
        object.__setattr__(self, "bad_primes", _prime_divisors(self.discriminant))
        if not self.label:
            object.__setattr__(self, "label", "[" + ",".join(map(str, self.coeffs)) + "]")

    @property
    def coeffs(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b_invariants(self) -> tuple[int, int, int, int]:
        a1, a2, a3, a4, a6 = self.coeffs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def c_invariants(self) -> tuple[int, int]:
        b2, b4, b6, _ = self.b_invariants
        return b2 * b2 - 24 * b4, -(b2**3) + 36 * b2 * b4 - 216 * b6

    @property
    def discriminant(self) -> int:
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def is_good(self, p: int) -> bool:
        return self.discriminant % p != 0


CORPUS = {
    c.label: c
    for c in (
        CurveQ(0, -1, 1, 0, 0, "11a3"),
        CurveQ(0, 0, 1, -1, 0, "37a1"),
        CurveQ(0, 0, 0, -1, 0, "x3-x", declared_cm=True),
        CurveQ(0, 0, 0, 1, 0, "x3+x", declared_cm=True),
        CurveQ(0, 0, 0, 0, -2, "x3-2", declared_cm=True),
    )
}


def curve_from_spec(spec: str, declared_cm: bool = False) -> CurveQ:
    """A corpus label, or five comma-separated coefficients (brackets optional)."""
    spec = spec.strip()
    if spec in CORPUS:
        return CORPUS[spec]
    body = spec.strip("[]() ")
    try:
        coeffs = [int(t) for t in body.split(",")]
    except ValueError:
        raise ParameterError(f"unknown curve {spec!r}") from None
    if len(coeffs) != 5:
        raise ParameterError(f"curve needs 5 coefficients [a1,a2,a3,a4,a6], got {len(coeffs)}")
    return CurveQ(*coeffs, declared_cm=declared_cm)


@dataclass(frozen=True)
class ReducedCurve:
    p: int
    coeffs: tuple[int, int, int, int, int]


def reduce(E: CurveQ, p: int) -> ReducedCurve | None:
    """Coefficients mod p, or None when p is a bad prime."""
    if p < 2:
        raise ParameterError(f"p must be >= 2, got {p}")
    if not E.is_good(p):
        return None
    return ReducedCurve(p, tuple(c % p for c in E.coeffs))


class HasseAudit:
    """Running tally of every Hasse check the package performs."""

    def __init__(self):
        self.checked = 0
        self.violations = 0
        self._lock = threading.Lock()

    def record(self, checked: int, violations: int) -> None:
        with self._lock:
            self.checked += checked
            self.violations += violations


HASSE_AUDIT = HasseAudit()


def hasse_ok(p: int, ap: int) -> bool:
    return ap * ap <= 4 * p


@dataclass(frozen=True)
class TraceRecord:
    p: int
    ap: int
    method: Method

    def __post_init__(self):
        ok = hasse_ok(self.p, self.ap)
        HASSE_AUDIT.record(1, 0 if ok else 1)
        if not ok:
            raise ArithmeticError(f"Hasse bound violated: a_{self.p} = {self.ap}")


def _require_good(E: CurveQ, p: int) -> ReducedCurve:
    red = reduce(E, p)
    if red is None:
        raise BadReduction(E.label, p)
    if p > K.MAX_P:
        raise ParameterError(f"p={p} beyond the point-counting range (< 2^31)")
    return red


def count_points_naive(E: CurveQ, p: int) -> int:
    """#E(F_p) by running over every x with a table of square roots."""
    red = _require_good(E, p)
    return int(K.count_points_long(*red.coeffs, p))


def ap_naive(E: CurveQ, p: int) -> TraceRecord:
    return TraceRecord(p, p + 1 - count_points_naive(E, p), Method.NAIVE)


def _short_model(E: CurveQ, p: int) -> tuple[int, int]:
    c4, c6 = E.c_invariants
    return (-27 * c4) % p, (-54 * c6) % p


def ap_bsgs(E: CurveQ, p: int, npoints: int = K.BSGS_POINTS) -> TraceRecord:
    """a_p from baby-step/giant-step on random points of the short model.

    Every a in the Hasse window with a*P = (p+1)*P is kept as a candidate;
    the candidate sets of successive points are intersected until one is
    left. Small primes, where low-order points are common, go to naive
    counting directly.
    """
    _require_good(E, p)
    if p <= BSGS_MIN_P:
        return ap_naive(E, p)
    A, B = _short_model(E, p)
    a = int(K.trace_bsgs(A, B, p, p, npoints))
    if a == K.AMBIGUOUS:
        raise AmbiguousOrder(p, [])
    return TraceRecord(p, a, Method.BSGS)


class TraceCache:
    """In-memory (label, p) -> a_p store, optionally backed by a binary file.

    Reads may run concurrently; writes are serialized.
    """

    def __init__(self, path=None):
        self._data: dict[tuple[str, int], int] = {}
        self._lock = threading.Lock()
        self.path = path
        self.rejected = 0
        self._loaded: set[str] = set()

    def _load(self, label: str) -> None:
        if self.path is None or label in self._loaded:
            return
        from .cache import cache_read

        entries, rejected = cache_read(self.path, label)
        with self._lock:
            self.rejected += rejected
            for p, ap in entries:
                self._data[(label, p)] = ap
            self._loaded.add(label)

    def get(self, label: str, p: int) -> int | None:
        self._load(label)
        ap = self._data.get((label, p))
        if ap is not None and not hasse_ok(p, ap):
            # corrupted input, not a computed trace: drop it, count it here
            with self._lock:
                del self._data[(label, p)]
                self.rejected += 1
            return None
        return ap

    def put_many(self, label: str, ps, aps) -> None:
        self._load(label)
        new = []
        with self._lock:
            for p, ap in zip(ps, aps):
                key = (label, int(p))
                if key not in self._data:
                    self._data[key] = int(ap)
                    new.append((int(p), int(ap)))
        if new and self.path is not None:
            from .cache import cache_write

            cache_write(self.path, label, new)

    def __len__(self):
        return len(self._data)


DEFAULT_CACHE = TraceCache()


def ap(E: CurveQ, p: int, cache: TraceCache | None = None) -> TraceRecord:
    """Cached a_p: naive for p <= 10^4, BSGS above, naive again if BSGS is ambiguous."""
    cache = DEFAULT_CACHE if cache is None else cache
    _require_good(E, p)
    hit = cache.get(E.label, p)
    if hit is not None:
        return TraceRecord(p, hit, Method.CACHE)
    rec = None
    if p > NAIVE_LIMIT:
        try:
            rec = ap_bsgs(E, p)
        except AmbiguousOrder:
            pass
    if rec is None:
        rec = ap_naive(E, p)
    cache.put_many(E.label, [p], [rec.ap])
    return rec


def floor_two_sqrt(p: int) -> int:
    """[2 sqrt(p)] = isqrt(4p), exact."""
    if p < 2:
        raise ParameterError(f"p must be >= 2, got {p}")
    return math.isqrt(4 * p)


def extremal_status(p: int, a: int) -> ExtremalStatus:
    edge = floor_two_sqrt(p)
    if a == edge:
        return ExtremalStatus.PLUS
    if a == -edge:
        return ExtremalStatus.MINUS
    return ExtremalStatus.NO


def is_extremal(E: CurveQ, p: int, cache: TraceCache | None = None) -> ExtremalStatus:
    return extremal_status(p, ap(E, p, cache).ap)


def residue_ap_mod(E: CurveQ, p: int, ell: int, cache: TraceCache | None = None) -> int:
    return ap(E, p, cache).ap % ell


def good_primes(E: CurveQ, primes: np.ndarray) -> np.ndarray:
    bad = np.asarray(E.bad_primes, dtype=np.int64)
    return primes[~np.isin(primes, bad)]


def trace_array(E: CurveQ, primes, cache: TraceCache | None = None,
                naive_limit: int = NAIVE_LIMIT):
    """Bulk a_p for an array of good primes (parallel compiled kernel).

    Returns (ap, method) int arrays; method is 0 naive, 1 BSGS, 2 cache.
    """
    primes = np.ascontiguousarray(primes, dtype=np.int64)
    if primes.size == 0:
        return np.empty(0, np.int64), np.empty(0, np.int8)
    if primes.max() > K.MAX_P:
        raise ParameterError("primes beyond 2^31 are outside the point-counting range")
    bad = np.intersect1d(primes, np.asarray(E.bad_primes, dtype=np.int64))
    if bad.size:
        raise BadReduction(E.label, int(bad[0]))
    cache = DEFAULT_CACHE if cache is None else cache
    ap_out = np.empty(primes.size, np.int64)
    method = np.empty(primes.size, np.int8)
    todo = []
    for i, p in enumerate(primes.tolist()):
        hit = cache.get(E.label, p)
        if hit is None:
            todo.append(i)
        else:
            ap_out[i] = hit
            method[i] = 2
    if todo:
        idx = np.asarray(todo, dtype=np.int64)
        ps = primes[idx]
        pl = ps.tolist()
        coeffs = np.array([[c % p for c in E.coeffs] for p in pl], dtype=np.int64)
        c4, c6 = E.c_invariants
        short = np.array([[(-27 * c4) % p, (-54 * c6) % p] for p in pl], dtype=np.int64)
        a, m = K.traces_bulk(ps, coeffs, short, max(naive_limit, BSGS_MIN_P), K.BSGS_POINTS)
        ap_out[idx] = a
        method[idx] = m
        cache.put_many(E.label, pl, a.tolist())
    bad = int(np.count_nonzero(ap_out * ap_out > 4 * primes))
    HASSE_AUDIT.record(primes.size, bad)
    if bad:
        raise ArithmeticError(f"{bad} Hasse violations in bulk traces for {E.label}")
    return ap_out, method


def traces_upto(E: CurveQ, lo: int, hi: int, cache: TraceCache | None = None):
    """(primes, a_p) over good primes in (lo, hi]."""
    ps = good_primes(E, sieve_range(lo, hi))
    a, _ = trace_array(E, ps, cache)
    return ps, a


def looks_cm(E: CurveQ, bound: int = 10_000) -> bool:
    """Heuristic: more than 40% of good p <= bound have a_p = 0."""
    _, a = traces_upto(E, 1, bound)
    return bool(a.size) and np.count_nonzero(a == 0) / a.size > 0.4
