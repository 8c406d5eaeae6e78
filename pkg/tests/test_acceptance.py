"""Acceptance gate: one test per criterion, each at its stated tolerance.

Every test records a `criterion N: PASS|FAIL ...` line, echoed in the
terminal summary, then asserts.
"""
import math
import random
import time
from fractions import Fraction

import numba
import numpy as np
import pytest

from exlab import analytic, curves, experiments as X, frac, gl2, primes
from exlab.curves import CORPUS
from exlab.errors import AmbiguousOrder, UncertainDecision
from exlab.frac import Membership, WindowSpec
from conftest import ACCEPTANCE
import oracles

HALF = Fraction(1, 2)
E11 = CORPUS["11a3"]


def verdict(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def traces_1e6():
    """All a_p for good p <= 10^6 on 11a3, computed from a cold trace cache."""
    cache = curves.TraceCache()
    t0 = time.perf_counter()
    ps, aps = curves.traces_upto(E11, 1, 10**6, cache)
    return ps, aps, time.perf_counter() - t0, cache


def test_criterion_01_gl2_exactness():
    t0 = time.perf_counter()
    bad = []
    for ell in primes.sieve_range(2, 97).tolist():
        G = gl2.group_order(ell)
        if sum(f.mass for f in gl2.class_inventory(ell)) != G:
            bad.append(("inventory", ell))
        if sum(gl2.trace_fiber(ell, a).fiber_size for a in range(ell)) != G:
            bad.append(("fibers", ell))
    for ell in (3, 5, 7):
        brute = oracles.gl2_trace_counts(ell)
        for a in range(ell):
            if not gl2.trace_fiber(ell, a).fiber_size == gl2.enumerate_trace_fiber(ell, a) == brute[a]:
                bad.append(("enumeration", ell, a))
    spot = (gl2.trace_fiber(5, 1).fiber_size, gl2.trace_fiber(5, 0).fiber_size, gl2.trace_fiber(3, 0).fiber_size)
    dt = time.perf_counter() - t0
    ok = not bad and spot == (95, 100, 18) and dt < 60
    verdict(1, ok, f"mismatches={bad} spot(5,1),(5,0),(3,0)={spot} time={dt:.2f}s (limit 60s)")


def test_criterion_02_trace_oracle_equivalence():
    t0 = time.perf_counter()
    mismatches, compared, fallbacks = [], 0, 0
    for E in CORPUS.values():
        ps = curves.good_primes(E, primes.sieve_range(1, 2 * 10**4 - 1))
        for p in ps.tolist():
            naive = curves.ap_naive(E, p).ap
            if p <= curves.BSGS_MIN_P:
                # below the threshold BSGS is defined to fall back; still confirm by brute force
                other = oracles.trace(E.coeffs, p) if p < 60 else curves.ap_bsgs(E, p).ap
            else:
                try:
                    other = curves.ap_bsgs(E, p).ap
                except AmbiguousOrder:
                    fallbacks += 1
                    continue
            compared += 1
            if naive != other:
                mismatches.append((E.label, p, naive, other))
    spots = [curves.ap_naive(E11, p).ap for p in (2, 3, 5, 13)]
    dt = time.perf_counter() - t0
    ok = not mismatches and spots == [-2, -1, 1, 4] and dt < 120
    verdict(2, ok, f"compared={compared} mismatches={len(mismatches)} bsgs_fallbacks={fallbacks} "
                   f"a_2,a_3,a_5,a_13={spots} time={dt:.1f}s (limit 120s)")


def residue_z(aps, ell):
    counts = X.residue_counts(aps, ell)
    n = int(counts.sum())
    masses = [float(m) for m in gl2.reference_masses(ell)]
    return n, counts.tolist(), [(c - n * q) / math.sqrt(n * q * (1 - q)) for c, q in zip(counts.tolist(), masses)]


# 11a3 carries a rational 5-torsion point, so 5 | #E(F_p) for every good p and
# a_p = p + 1 mod 5: residue 1 is never hit. The GL2 reference cannot fit.
@pytest.mark.xfail(strict=True, reason="11a3 has rational 5-torsion; its mod-5 image is not GL2(F_5)")
def test_criterion_04_chebotarev_residues(traces_1e6):
    ps, aps, _, cache = traces_1e6
    n, counts, zs = residue_z(aps, 5)
    h = X.residue_histogram(E11, 5, 10**6, cache)
    assert h.counts == counts
    torsion = bool(np.all((ps + 1 - aps) % 5 == 0))
    _, _, zs37 = residue_z(curves.traces_upto(CORPUS["37a1"], 1, 10**6)[1], 5)
    ok = max(abs(z) for z in zs) <= 5
    verdict(4, ok, f"N={n} counts={counts} z={[round(z, 2) for z in zs]} (|z| <= 5); "
                   f"5 | #E(F_p) for all good p: {torsion}; same test on 37a1: z={[round(z, 2) for z in zs37]}")


@pytest.mark.parametrize("label", ["11a3", "37a1"])
def test_criterion_05_joint_desk_check(label):
    E, x = CORPUS[label], 5 * 10**5
    rows, ok = [], True
    for ell in (3, 5, 7):
        r = X.joint_count(E, ell, x)
        n = r.extras["good_primes"]
        lim = 5 * math.sqrt(n * (1 / ell) * (1 - 1 / ell))
        good = abs(r.observed - n / ell) <= lim
        ok &= good
        rows.append(f"l={ell}: obs={r.observed} main={r.main_term:.1f} z={r.z:+.2f} "
                    f"envelope={r.envelope:.3g} ell_range={r.extras['side_conditions']['ell_range']}")
    verdict(5, ok, f"{label} window ({x}, {2 * x}]: " + "; ".join(rows))


# a_p = 0 mod 3 has GL2(F_3) density 18/48 = 3/8, not 1/3, so the joint-zero
# density is 1/8 rather than 1/9; the 1/9 main term is off by ~7 sigma here.
@pytest.mark.xfail(strict=True, reason="true joint-zero density at l = 3 is 1/8, not 1/9")
@pytest.mark.parametrize("label", ["11a3", "37a1"])
def test_criterion_06_joint_zero_desk_check(label):
    E, x = CORPUS[label], 5 * 10**5
    r = X.joint_zero_count(E, 3, x)
    n = r.extras["good_primes"]
    lim = 5 * math.sqrt(n * (1 / 9) * (8 / 9))
    q = Fraction(gl2.trace_fiber(3, 0).fiber_size, gl2.group_order(3)) / 3
    z_gl2 = (r.observed - n * float(q)) / math.sqrt(n * float(q) * (1 - float(q)))
    ok = abs(r.observed - n / 9) <= lim
    verdict(6, ok, f"{label}: obs={r.observed} main={r.main_term:.1f} |diff|={abs(r.observed - n / 9):.1f} "
                   f"limit={lim:.1f} envelope={r.envelope:.3g}; against density {q}: z={z_gl2:+.2f}")


def test_criterion_07_balog_discrepancy():
    t0 = time.perf_counter()
    r = X.balog_report(2, HALF, 10**7)
    dt = time.perf_counter() - t0
    ok = r.discrepancy <= 1e-2 and dt < 120 and r.N == primes.prime_count(10**7)
    verdict(7, ok, f"N={r.N} D*={r.discrepancy:.3e} (<= 1e-2) ks={r.ks:.3e} time={dt:.1f}s (limit 120s)")


def test_criterion_08_landau_exactness():
    got = {x: X.landau_count(1, HALF, HALF, x).observed for x in (10**3, 10**6)}
    want = {x: len(oracles.n2_plus_1_primes(x)) for x in (10**3, 10**6)}
    ok = got == want and got[10**3] == 10
    verdict(8, ok, f"landau_count={got} n^2+1 enumeration={want}")


def test_criterion_09_sato_tate(traces_1e6):
    h = X.sato_tate_histogram(E11, 10**6, 40, traces_1e6[3])
    ok = h.ks <= 0.02
    verdict(9, ok, f"N={h.extras['N']} KS={h.ks:.4f} (<= 0.02) chi2={h.chi2:.1f} on 40 bins")


def test_criterion_10_extremal_consistency(traces_1e6):
    ps, aps, _, cache = traces_1e6
    plus = X.extremal_count(E11, 2, 10**6, "Plus", cache).observed
    minus = X.extremal_count(E11, 2, 10**6, "Minus", cache).observed
    # independent recount: per-prime traces through a fresh cache, Python integer edges
    fresh = curves.TraceCache()
    o_plus = o_minus = 0
    for p in ps.tolist():
        a = curves.ap(E11, p, fresh).ap
        e = math.isqrt(4 * p)
        if a == e or a == -e:
            assert curves.ap_naive(E11, p).ap == a  # every witness re-counted point by point
        o_plus += a == e
        o_minus += a == -e
    contained = {}
    for ell in (3, 5, 7):
        r = X.joint_count(E11, ell, 5 * 10**5, cache=cache)
        win_plus = X.extremal_count(E11, 5 * 10**5 + 1, 10**6, "Plus", cache).observed
        full_joint = int(np.count_nonzero(X.joint_flags(ps, aps, ell)))
        contained[ell] = win_plus <= r.observed and plus <= full_joint
    ok = (plus, minus) == (o_plus, o_minus) and minus >= 1 and all(contained.values())
    verdict(10, ok, f"Plus={plus} Minus={minus} recount=({o_plus}, {o_minus}) "
                    f"Minus witness p=2: {curves.is_extremal(E11, 2).value} containment={contained}")


def test_criterion_11_mean_value_grid():
    worst, n = 0.0, 0
    for alpha in (0.5, 1.0, 2.0):
        for theta in (1 / 3, 1 / 2):
            for x in (10**3, 10**4):
                for d1 in (0.0, 0.5):
                    ap = analytic.analytic_params(alpha, theta, x, delta1=d1)
                    for T in (ap.T0, 2 * ap.T0):
                        worst = max(worst, analytic.mean_value_check(T, ap).ratio)
                        n += 1
    single = analytic.mean_value_check(100.0, analytic.single_term_params(7, 1.0, 0.0))
    rel = abs(single.integral - 100.0 / 7) / (100.0 / 7)
    ok = n == 48 and worst <= 32 and rel <= 1e-6
    verdict(11, ok, f"grid points={n} max ratio={worst:.3f} (<= 32) single-term rel err={rel:.1e} (<= 1e-6)")


def test_criterion_12_bracket_fuzz():
    rng = random.Random(20240601)
    pool = primes.sieve_range(1, 10**7)
    thetas = [Fraction(k, 60) for k in range(61)]
    n, uncertain, disagree, escalated = 10**5, 0, 0, 0
    for _ in range(n):
        alpha = Fraction(rng.randint(1, 10**4), rng.randint(1, 10**3))
        theta = rng.choice(thetas)
        d = sorted(rng.sample(range(0, 1001), 2))
        w = WindowSpec(Fraction(d[0], 1000), Fraction(d[1], 1000))
        p = int(pool[rng.randrange(pool.size)])
        if frac.membership_at(alpha, theta, w, p, 53) is Membership.UNCERTAIN:
            uncertain += 1
        m = frac.in_half_open(frac.frac_power(alpha, theta, p), w)
        try:
            b = frac.indicator_bracket(alpha, theta, w, p)
        except UncertainDecision:
            escalated += 1
            continue
        if m is not Membership.UNCERTAIN and b != int(m is Membership.IN):
            disagree += 1
    rate = uncertain / n
    ok = disagree == 0 and rate < 1e-3
    verdict(12, ok, f"tuples={n} disagreements={disagree} uncertain@53bit rate={rate:.1e} (< 1e-3) "
                    f"undecided@256bit={escalated}")


def test_criterion_13_performance(traces_1e6):
    _, aps, t_traces, _ = traces_1e6
    t0 = time.perf_counter()
    n = primes.count_range(0, 10**9)
    t_sieve = time.perf_counter() - t0
    ok = t_traces <= 60 and t_sieve <= 60 and n == 50_847_534
    verdict(13, ok, f"traces p<=1e6 cold cache: {t_traces:.1f}s ({aps.size} primes); "
                    f"sieve to 1e9: {t_sieve:.1f}s (pi={n}); limits 60s each; "
                    f"threads={numba.get_num_threads()}")


def test_criterion_03_hasse_everywhere():
    # runs after the other criteria in this module; the session fixture re-checks at the very end
    audit = curves.HASSE_AUDIT
    ok = audit.violations == 0 and audit.checked > 0
    verdict(3, ok, f"traces checked={audit.checked} violations={audit.violations}")
