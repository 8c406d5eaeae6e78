"""Self-check against brute-force oracles; backs the `verify` subcommand."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import analytic, curves, experiments, frac, gl2, primes


@dataclass
class Check:
    name: str
    ok: bool
    detail: str
    seconds: float = 0.0


def _brute_count(E: curves.CurveQ, p: int) -> int:
    a1, a2, a3, a4, a6 = (c % p for c in E.coeffs)
    n = 1
    for x in range(p):
        rhs = (x**3 + a2 * x * x + a4 * x + a6) % p
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y - rhs) % p == 0:
                n += 1
    return n


def _sieve() -> str | None:
    ref = primes.simple_sieve(200_000)
    got = primes.sieve_range(1, 200_000)
    if not np.array_equal(ref, got):
        return "sieve_range(1, 2e5) differs from the simple sieve"
    lo, hi = 10**8, 10**8 + 10**4
    odd = [n for n in range(lo + 1, hi + 1) if all(n % d for d in range(2, math.isqrt(n) + 1))]
    if primes.sieve_range(lo, hi).tolist() != odd:
        return "segment near 1e8 differs from trial division"
    return None


def _brute_traces() -> str | None:
    for E in curves.CORPUS.values():
        for p in primes.sieve_range(1, 150).tolist():
            if not E.is_good(p):
                continue
            want = p + 1 - _brute_count(E, p)
            if curves.ap_naive(E, p).ap != want:
                return f"{E.label}: naive a_{p} != brute force {want}"
    return None


def _naive_vs_bsgs() -> str | None:
    for E in curves.CORPUS.values():
        ps = curves.good_primes(E, primes.sieve_range(curves.BSGS_MIN_P, 4000))
        for p in ps.tolist():
            a, b = curves.ap_naive(E, p).ap, curves.ap_bsgs(E, p).ap
            if a != b:
                return f"{E.label}: a_{p} naive {a} != bsgs {b}"
    return None


def _classes() -> str | None:
    for ell in (3, 5, 7):
        for a in range(ell):
            closed = gl2.trace_fiber(ell, a).fiber_size
            if closed != gl2.enumerate_trace_fiber(ell, a):
                return f"fiber ({ell}, {a}) closed form disagrees with enumeration"
    for ell in primes.sieve_range(2, 97).tolist():
        if sum(f.mass for f in gl2.class_inventory(ell)) != gl2.group_order(ell):
            return f"class inventory for ell={ell} does not cover the group"
    return None


def _landau() -> str | None:
    x = 10_000
    want = sum(1 for n in range(1, math.isqrt(x) + 1)
               if n * n + 1 <= x and primes.simple_sieve(n * n + 1)[-1:].tolist() == [n * n + 1])
    got = experiments.landau_count(1, Fraction(1, 2), Fraction(1, 2), x).observed
    return None if got == want else f"landau count {got} != n^2+1 enumeration {want}"


def _bridge() -> str | None:
    for p in primes.sieve_range(1, 20_000).tolist()[::7]:
        for ell in (3, 5, 7):
            frac.bridge_residue(p, ell, verify=True)
    return None


def _mean_value() -> str | None:
    ap = analytic.single_term_params(7, alpha=2.0, delta1=0.5)
    mv = analytic.mean_value_check(50.0, ap)
    want = 50.0 * 2.0 / 7.5
    err = abs(mv.integral - want) / want
    return None if err < 1e-6 else f"single-term integral off by relative {err:.2e}"


def _hasse() -> str | None:
    v = curves.HASSE_AUDIT.violations
    return None if v == 0 else f"{v} Hasse violations recorded"


CHECKS = (
    ("sieve", _sieve),
    ("traces_vs_brute_force", _brute_traces),
    ("naive_vs_bsgs", _naive_vs_bsgs),
    ("gl2_classes", _classes),
    ("landau_n2_plus_1", _landau),
    ("bridge_residue", _bridge),
    ("mean_value_single_term", _mean_value),
    ("hasse", _hasse),
)


def run_all() -> list[Check]:
    out = []
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            msg = fn()
        except Exception as exc:  # a crash is a failed check, reported not raised
            msg = f"{type(exc).__name__}: {exc}"
        out.append(Check(name, msg is None, msg or "ok", time.perf_counter() - t0))
    return out
