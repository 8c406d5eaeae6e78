"""Compiled point-counting kernels over F_p, p < 2^31 (products fit in int64).

Points are (x, y, inf) triples on a short model y^2 = x^3 + A x + B.
"""
import numpy as np
from numba import njit, prange

AMBIGUOUS = np.int64(1) << 40
MAX_P = (1 << 31) - 1
BSGS_POINTS = 8


@njit(cache=True)
def powmod(b, e, p):
    r = 1
    b %= p
    while e > 0:
        if e & 1:
            r = r * b % p
        b = b * b % p
        e >>= 1
    return r


@njit(cache=True)
def invmod(a, p):
    r0, r1 = p, a % p
    s0, s1 = 0, 1
    while r1 != 0:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    return s0 % p


@njit(cache=True)
def sqrtmod(a, p):
    # Tonelli-Shanks; a must be a nonzero square mod odd p
    if p % 4 == 3:
        return powmod(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while powmod(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, powmod(z, q, p), powmod(a, q, p), powmod(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = powmod(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


@njit(cache=True)
def count_points_long(a1, a2, a3, a4, a6, p):
    """#E(F_p) for the long model with coefficients already reduced mod p."""
    if p == 2:
        n = 1
        for x in range(2):
            for y in range(2):
                lhs = y * y + a1 * x * y + a3 * y
                rhs = x * x * x + a2 * x * x + a4 * x + a6
                if (lhs - rhs) % 2 == 0:
                    n += 1
        return n
    # 4*(y^2 + a1 x y + a3 y - f(x)) = (2y + a1 x + a3)^2 - D(x)
    roots = np.zeros(p, np.int64)
    for y in range(p):
        roots[y * y % p] += 1
    n = 1
    for x in range(p):
        f = (((x + a2) * x + a4) % p * x + a6) % p
        u = (a1 * x + a3) % p
        n += roots[(u * u + 4 * f) % p]
    return n


@njit(cache=True)
def _add(x1, y1, i1, x2, y2, i2, A, p):
    if i1:
        return x2, y2, i2
    if i2:
        return x1, y1, i1
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return 0, 0, True
        lam = (3 * x1 % p * x1 + A) % p * invmod(2 * y1, p) % p
    else:
        lam = (y2 - y1) % p * invmod((x2 - x1) % p, p) % p
    x3 = (lam * lam - x1 - x2) % p
    y3 = (lam * ((x1 - x3) % p) - y1) % p
    return x3, y3, False


@njit(cache=True)
def _mul(k, x, y, inf, A, p):
    if k < 0:
        k = -k
        y = (p - y) % p
    rx, ry, ri = 0, 0, True
    while k > 0:
        if k & 1:
            rx, ry, ri = _add(rx, ry, ri, x, y, inf, A, p)
        x, y, inf = _add(x, y, inf, x, y, inf, A, p)
        k >>= 1
    return rx, ry, ri


@njit(cache=True)
def _isqrt(n):
    r = np.int64(np.sqrt(np.float64(n)))
    while r * r > n:
        r -= 1
    while (r + 1) * (r + 1) <= n:
        r += 1
    return r


@njit(cache=True)
def _random_point(A, B, p, state):
    while True:
        state = state * np.uint64(6364136223846793005) + np.uint64(1442695040888963407)
        x = np.int64((state >> np.uint64(33)) % np.uint64(p))
        rhs = ((x * x % p + A) * x + B) % p
        if rhs == 0:
            return x, 0, state
        if powmod(rhs, (p - 1) // 2, p) == 1:
            return x, sqrtmod(rhs, p), state


@njit(cache=True)
def _trace_candidates(x, y, A, p, w, out):
    """Write every a in [-w, w] with a*P = (p+1)*P into out; return how many."""
    m = _isqrt(2 * w + 1) + 1
    bx = np.empty(m, np.int64)
    by = np.empty(m, np.int64)
    bi = np.empty(m, np.bool_)
    cx, cy, ci = 0, 0, True
    for j in range(m):
        bx[j], by[j], bi[j] = cx, cy, ci
        cx, cy, ci = _add(cx, cy, ci, x, y, False, A, p)
    order = np.argsort(bx)
    sx = bx[order]
    # R_0 = (p+1)P - (-w)P, then step by -mP
    qx, qy, qi = _mul(p + 1 + w, x, y, False, A, p)
    gx, gy, gi = _mul(m, x, y, False, A, p)
    gy = (p - gy) % p
    n = 0
    base = -w
    while base <= w:
        # R = jP  <=>  a = base + j
        if qi:
            for j in range(m):
                if bi[j] and base + j <= w:
                    out[n] = base + j
                    n += 1
        else:
            k = np.searchsorted(sx, qx)
            while k < m and sx[k] == qx:
                j = order[k]
                if not bi[j] and by[j] == qy and base + j <= w:
                    out[n] = base + j
                    n += 1
                k += 1
        qx, qy, qi = _add(qx, qy, qi, gx, gy, gi, A, p)
        base += m
    return n


@njit(cache=True)
def _nonresidue(p):
    d = 2
    while powmod(d, (p - 1) // 2, p) != p - 1:
        d += 1
    return d


@njit(cache=True)
def trace_bsgs(A, B, p, seed, npoints):
    """Frobenius trace on y^2 = x^3 + A x + B, or AMBIGUOUS.

    Points alternate between the curve and its quadratic twist
    y^2 = x^3 + A d^2 x + B d^3, whose trace is -a_p; for p > 229 one of
    the two always has a point that pins the trace down.
    """
    w = _isqrt(4 * p)
    d = _nonresidue(p)
    At = A * d % p * d % p
    Bt = B * d % p * d % p * d % p
    state = np.uint64(seed)
    live = np.empty(0, np.int64)
    buf = np.empty(2 * w + 2, np.int64)
    for t in range(npoints):
        if t % 2 == 0:
            x, y, state = _random_point(A, B, p, state)
            n = _trace_candidates(x, y, A, p, w, buf)
            cand = np.sort(buf[:n].copy())
        else:
            x, y, state = _random_point(At, Bt, p, state)
            n = _trace_candidates(x, y, At, p, w, buf)
            cand = np.sort(-buf[:n])
        if t == 0:
            live = cand
        else:
            keep = np.zeros(live.size, np.bool_)
            for i in range(live.size):
                k = np.searchsorted(cand, live[i])
                keep[i] = k < cand.size and cand[k] == live[i]
            live = live[keep]
        if live.size == 1:
            return live[0]
    return AMBIGUOUS


@njit(parallel=True, cache=True)
def traces_bulk(primes, coeffs, short, naive_limit, npoints):
    """a_p for every prime; coeffs[i] = (a1..a6) mod p, short[i] = (A, B) mod p.

    Returns (ap, method) with method 0 = naive, 1 = BSGS.
    """
    n = primes.size
    ap = np.empty(n, np.int64)
    method = np.zeros(n, np.int8)
    for i in prange(n):
        p = primes[i]
        a = AMBIGUOUS
        if p > naive_limit:
            a = trace_bsgs(short[i, 0], short[i, 1], p, p, npoints)
            method[i] = 1
        if a == AMBIGUOUS:
            c = coeffs[i]
            a = p + 1 - count_points_long(c[0], c[1], c[2], c[3], c[4], p)
            method[i] = 0
        ap[i] = a
    return ap, method
