"""Numerical versions of the analytic objects behind the joint-distribution
estimates: the Dirichlet polynomial L(s), the kernel H(s), the prime sum
F(s), the mean value of |L(1/2+it)|^2, and the error-term envelopes.

Every "<<" is evaluated with implied constant 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, QuadratureError
from .primes import window_plan


@dataclass(frozen=True)
class AnalyticParams:
    alpha: float
    theta: float
    x: int
    delta1: float
    delta: float
    omega: float
    n_L: int
    Uminus: float
    Uplus: float
    T0: float
    T1: float
    m_lo: int  # exclusive
    m_hi: int  # inclusive

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(self.m_lo + 1, self.m_hi + 1, dtype=np.float64)

    @property
    def constraint_holds(self) -> bool:
        """alpha^(1/4) (omega n_L/delta)^(1/2) (log x)^2 <= x^((1-theta)/4)."""
        lhs = self.alpha**0.25 * math.sqrt(self.omega * self.n_L / self.delta) * math.log(self.x) ** 2
        return lhs <= self.x ** ((1 - self.theta) / 4)


def analytic_params(alpha, theta, x: int, delta1=0.0, delta2=1.0, omega=1.0,
                    j: int = 0, n_L: int = 1) -> AnalyticParams:
    """Parameters for sub-window j of the plan for (x, 2x]."""
    alpha, theta, delta1, delta2 = float(alpha), float(theta), float(delta1), float(delta2)
    if alpha <= 0 or not 0 <= theta <= 1:
        raise ParameterError("need alpha > 0 and 0 <= theta <= 1")
    if not 0 <= delta1 < delta2 <= 1:
        raise ParameterError(f"empty window [{delta1}, {delta2})")
    T0 = alpha * x**theta
    if T0 < 1:
        raise ParameterError(f"alpha x^theta = {T0} < 1")
    plan = window_plan(x, omega)
    if not 0 <= j < plan.B:
        raise ParameterError(f"sub-window index {j} outside 0..{plan.B - 1}")
    xj, xj1 = (float(b) for b in plan.boundaries[j : j + 2])
    delta = delta2 - delta1
    T1 = alpha**0.75 * x ** ((1 + 3 * theta) / 4) / (math.sqrt(n_L * delta * omega) * math.log(x))
    return AnalyticParams(
        alpha=alpha, theta=theta, x=x, delta1=delta1, delta=delta, omega=float(omega), n_L=n_L,
        Uminus=alpha * xj**theta / delta, Uplus=alpha * xj1**theta / delta,
        T0=T0, T1=T1,
        m_lo=max(math.floor(T0 / 3 - delta1), 0), m_hi=math.floor(3 * T0 - delta1),
    )


def single_term_params(m: int, alpha=1.0, delta1=0.0) -> AnalyticParams:
    """Degenerate parameters whose m-range is exactly {m}."""
    return AnalyticParams(alpha=float(alpha), theta=0.0, x=2, delta1=float(delta1), delta=1.0,
                          omega=1.0, n_L=1, Uminus=1.0, Uplus=1.0, T0=1.0, T1=1.0,
                          m_lo=m - 1, m_hi=m)


def eval_L(s, ap: AnalyticParams):
    """alpha^s * sum over the m-range of (m + delta1)^(-s); s may be an array."""
    if ap.m_hi <= ap.m_lo:
        raise ParameterError("empty m-range")
    logs = np.log(ap.m_values + ap.delta1)
    s_arr = np.asarray(s, dtype=np.complex128)
    out = np.exp(s_arr * math.log(ap.alpha)) * np.exp(-np.multiply.outer(s_arr, logs)).sum(axis=-1)
    return complex(out) if out.ndim == 0 else out


def eval_H(s, U: float) -> complex:
    """(1 - (1 - 1/U)^s) / s on the principal branch."""
    s = complex(s)
    if s == 0:
        raise ParameterError("H(s) is evaluated only for s != 0")
    if U < 1:
        raise ParameterError(f"U must be >= 1, got {U}")
    if U == 1:
        if s.real <= 0:
            raise ParameterError("0^s needs Re(s) > 0")
        return 1 / s
    z = s * math.log1p(-1.0 / U)
    if s.imag == 0:
        return complex(-math.expm1(z.real) / s.real)
    em1 = z + z * z / 2 + z**3 / 6 if abs(z) < 1e-5 else np.exp(z) - 1
    return complex(-em1 / s)


def eval_F(s, primes, in_class=None) -> complex:
    """sum of p^(-s) over the flagged primes of a window."""
    ps = np.asarray(primes, dtype=np.float64)
    if in_class is not None:
        ps = ps[np.asarray(in_class, dtype=bool)]
    if ps.size == 0:
        return 0j
    return complex(np.exp(-complex(s) * np.log(ps)).sum())


@dataclass(frozen=True)
class MeanValue:
    integral: float
    bound: float
    ratio: float
    panels: int


_GL = {n: np.polynomial.legendre.leggauss(n) for n in (16, 32)}


def _gl_panels(f, a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    x, w = _GL[n]
    half = (b - a) / 2
    nodes = (a + b)[:, None] / 2 + half[:, None] * x[None, :]
    return half * (f(nodes.ravel()).reshape(nodes.shape) @ w)


def integrate_panels(f, lo: float, hi: float, width: float, rtol: float = 1e-6,
                     max_depth: int = 30) -> tuple[float, int]:
    """Adaptive Gauss-Legendre on panels no wider than `width`.

    Each panel is compared at 16 and 32 nodes and bisected where they
    disagree. Panels are summed in a fixed order.
    """
    npan = max(1, math.ceil((hi - lo) / width))
    edges = np.linspace(lo, hi, npan + 1)
    a, b = edges[:-1], edges[1:]
    done = []
    scale = None
    for _ in range(max_depth):
        coarse, fine = _gl_panels(f, a, b, 16), _gl_panels(f, a, b, 32)
        if scale is None:
            scale = max(abs(fine.sum()), 1e-300)
        # each panel gets its share of the tolerance, by width
        bad = np.abs(fine - coarse) > rtol * scale * (b - a) / (hi - lo)
        done.append((a[~bad], fine[~bad]))
        if not bad.any():
            break
        mid = (a[bad] + b[bad]) / 2
        a, b = np.concatenate([a[bad], mid]), np.concatenate([mid, b[bad]])
    else:
        raise QuadratureError(f"no convergence on [{lo}, {hi}] after {max_depth} bisections; "
                              f"{len(a)} panels still disagree")
    starts = np.concatenate([d[0] for d in done])
    vals = np.concatenate([d[1] for d in done])
    order = np.argsort(starts, kind="stable")
    return float(vals[order].sum()), len(order)


def mean_value_check(Tprime: float, ap: AnalyticParams, rtol: float = 1e-6) -> MeanValue:
    """Quadrature of |L(1/2+it)|^2 over [T', 2T'] against alpha T' + alpha^2 x^theta log(alpha x^theta)."""
    if Tprime <= 0:
        raise ParameterError("T' must be positive")
    if ap.m_hi <= ap.m_lo:
        raise ParameterError("empty m-range")
    period = 2 * math.pi / math.log(ap.m_hi + ap.delta1) if ap.m_hi + ap.delta1 > 1 else Tprime

    def integrand(t):
        return np.abs(eval_L(0.5 + 1j * t, ap)) ** 2

    integral, panels = integrate_panels(integrand, Tprime, 2 * Tprime, period, rtol)
    T0 = ap.alpha * ap.x**ap.theta
    bound = ap.alpha * Tprime + ap.alpha**2 * ap.x**ap.theta * math.log(T0)
    return MeanValue(integral, bound, integral / bound if bound > 0 else math.inf, panels)


STATEMENTS = ("frac_window", "joint", "extremal", "joint_zero", "landau", "landau_quarter", "sqrt_window")

_NEEDS = {
    "frac_window": ("x", "C_over_G", "n_L", "delta", "omega", "alpha", "theta"),
    "joint": ("x", "ell", "omega"),
    "extremal": ("x",),
    "joint_zero": ("x", "ell", "omega"),
    "landau": ("x", "C_over_G", "n_L", "log_d_L", "omega", "alpha", "theta", "lam"),
    "landau_quarter": ("x", "C_over_G", "n_L", "log_d_L", "omega", "eps"),
    "sqrt_window": ("x", "C_over_G", "n_L", "delta", "omega"),
}


@dataclass(frozen=True)
class BoundEnvelope:
    statement_id: str
    params: dict
    value: float
    terms: tuple[float, ...] = ()
    side_conditions: dict = field(default_factory=dict)


def _terms(tid: str, P: dict) -> tuple[list[float], dict]:
    x = P["x"]
    lx = math.log(x)
    side = {}
    if tid == "frac_window":
        CG, nL, d, w, a, th = (P[k] for k in ("C_over_G", "n_L", "delta", "omega", "alpha", "theta"))
        terms = [
            CG * nL * lx * (d * w) ** 0.5 * a**0.25 / nL**0.5 * x ** ((3 + th) / 4),
            CG * nL * lx * d * w / a**0.5 * x ** (1 - th / 2) * lx,
            (d * nL * w) ** 0.5 * a**0.25 * x ** ((1 + th) / 4) * lx,
            CG * d * x / (w * lx),
        ]
        side["parameter_range"] = a**0.25 * (w * nL / d) ** 0.5 * lx**2 <= x ** ((1 - th) / 4)
    elif tid == "joint":
        l, w = P["ell"], P["omega"]
        terms = [
            x / (w * l * lx),
            w**0.5 * l**1.25 * x**0.875 * lx,
            w * l**3.5 * x**0.75 * lx**2,
        ]
        side["ell_range"] = l <= x ** (1 / 18) * w ** (-2 / 9) * lx ** (-8 / 9)
    elif tid == "extremal":
        terms = [x ** (17 / 18) * lx ** (-1 / 9)]
    elif tid == "joint_zero":
        l, w = P["ell"], P["omega"]
        terms = [
            x / (l * l * w * lx),
            w**0.5 * x**0.875 * lx / l**0.25,
            w * l**1.5 * x**0.75 * lx**2,
        ]
        side["ell_range"] = l <= x ** (1 / 14) * lx ** (-8 / 7) * w ** (-2 / 7)
    elif tid == "landau":
        CG, nL, ld, w, a, th, lam = (P[k] for k in ("C_over_G", "n_L", "log_d_L", "omega", "alpha", "theta", "lam"))
        terms = [
            CG * x ** (1 - lam) / (w * lx),
            w * a**0.5 * x ** (th / 2) * ld * lx**3,
            CG * a**0.5 * x ** ((1 + th) / 2) * lx**3 * (ld + nL * lx)
            * (w * w + w * x ** (0.5 - th - lam) / a**0.5),
        ]
    elif tid == "landau_quarter":
        CG, nL, ld, w, eps = (P[k] for k in ("C_over_G", "n_L", "log_d_L", "omega", "eps"))
        terms = [
            CG * x ** (0.75 + eps) / (w * lx),
            w * x**0.25 * ld * lx**3,
            CG * w * w * x**0.75 * lx**3 * (ld + nL * lx),
        ]
    elif tid == "sqrt_window":
        CG, nL, d, w = (P[k] for k in ("C_over_G", "n_L", "delta", "omega"))
        terms = [
            CG * (d * w * nL) ** 0.5 * x**0.875 * lx,
            CG * nL * d * w * x**0.75 * lx**2,
            CG * d * x / (w * lx),
        ]
    else:
        raise ParameterError(f"unknown statement id {tid!r}; expected one of {STATEMENTS}")
    return terms, side


def bound_envelope(statement_id: str, **params) -> BoundEnvelope:
    """Error-term envelope of one statement, implied constants set to 1.

    Parameter names: x, ell, omega, alpha, theta, delta, lam, eps, n_L,
    log_d_L, C_over_G (= |C|/|G|).
    """
    if statement_id not in _NEEDS:
        raise ParameterError(f"unknown statement id {statement_id!r}; expected one of {STATEMENTS}")
    for name in _NEEDS[statement_id]:
        if params.get(name) is None:
            raise ParameterError(f"{statement_id} envelope needs parameter {name!r}")
    P = {k: float(params[k]) for k in _NEEDS[statement_id]}
    if P["x"] <= 1:
        raise ParameterError("x must exceed 1")
    terms, side = _terms(statement_id, P)
    value = float(sum(terms))
    if not value >= 0:
        raise ParameterError(f"{statement_id} envelope evaluated to {value}")
    return BoundEnvelope(statement_id, P, value, tuple(terms), side)
