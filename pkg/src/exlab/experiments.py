"""End-to-end counting experiments, each reported against its main term,
a binomial standard deviation, and the matching error envelope."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import analytic, curves, frac, gl2
from .curves import CurveQ, ExtremalStatus, TraceCache
from .errors import ParameterError
from .primes import prime_count, sieve_range, window_plan


@dataclass
class CountReport:
    statement_id: str
    window: tuple[int, int]
    observed: int
    main_term: float
    envelope: float
    sigma_stat: float
    z: float
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.observed < 0:
            raise ParameterError("negative count")
        if self.main_term > 0 and not self.sigma_stat > 0:
            raise ParameterError("sigma_stat must be positive when main_term is")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class HistogramReport:
    bin_edges: list[float]
    observed_mass: list[float]
    reference_mass: list[float]
    ks: float
    chi2: float
    counts: list[int] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("observed_mass", "reference_mass"):
            m = getattr(self, name)
            if m and (min(m) < 0 or abs(sum(m) - 1) > 1e-12):
                raise ParameterError(f"{name} is not a probability vector")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class BalogReport:
    N: int
    discrepancy: float
    ks: float

    def to_dict(self) -> dict:
        return asdict(self)


def _z(observed: float, main: float, sigma: float) -> float:
    return (observed - main) / sigma if sigma > 0 else 0.0


def _binomial(n: int, q: float) -> float:
    return math.sqrt(n * q * (1 - q))


def isqrt_array(n: np.ndarray) -> np.ndarray:
    """Exact floor(sqrt(n)) for int64 arrays below 2^52."""
    n = np.asarray(n, dtype=np.int64)
    s = np.floor(np.sqrt(n.astype(np.float64))).astype(np.int64)
    s -= (s * s > n).astype(np.int64)
    s += ((s + 1) * (s + 1) <= n).astype(np.int64)
    return s


def _check_ell(E: CurveQ, ell: int) -> None:
    gl2.check_odd_prime(ell)
    if ell in E.bad_primes:
        raise ParameterError(f"ell={ell} divides the discriminant of {E.label}")


def _window_data(E: CurveQ, x: int, cache: TraceCache | None):
    if x < 4:
        raise ParameterError(f"x must be >= 4, got {x}")
    return curves.traces_upto(E, x, 2 * x, cache)


def _sub_counts(x: int, omega: float, ps: np.ndarray, flags: np.ndarray) -> list[int]:
    plan = window_plan(x, omega)
    return [int(np.count_nonzero(flags[(ps > a) & (ps <= b)])) for a, b in plan.subwindows()]


def joint_flags(ps: np.ndarray, aps: np.ndarray, ell: int, zero_only: bool = False) -> np.ndarray:
    """a_p = [2 sqrt p] mod ell (and both = 0 when zero_only)."""
    bridge = isqrt_array(4 * ps) % ell
    res = aps % ell
    flags = res == bridge
    if zero_only:
        flags &= res == 0
    return flags


def joint_count(E: CurveQ, ell: int, x: int, omega: float = 1.0,
                cache: TraceCache | None = None) -> CountReport:
    """#{x < p <= 2x good : a_p = [2 sqrt p] mod ell} against (window count)/ell."""
    _check_ell(E, ell)
    ps, aps = _window_data(E, x, cache)
    flags = joint_flags(ps, aps, ell)
    n = ps.size
    q = 1 / ell
    env = analytic.bound_envelope("joint", x=x, ell=ell, omega=omega)
    sigma = _binomial(n, q)
    obs = int(np.count_nonzero(flags))
    return CountReport(
        "joint", (x, 2 * x), obs, n * q, env.value, sigma, _z(obs, n * q, sigma),
        extras={
            "ell": ell, "omega": omega, "good_primes": n,
            "envelope_terms": list(env.terms), "side_conditions": env.side_conditions,
            "subwindow_counts": _sub_counts(x, omega, ps, flags),
        },
    )


def joint_zero_count(E: CurveQ, ell: int, x: int, omega: float = 1.0,
                     cache: TraceCache | None = None) -> CountReport:
    """#{x < p <= 2x good : a_p = [2 sqrt p] = 0 mod ell} against (window count)/ell^2."""
    _check_ell(E, ell)
    ps, aps = _window_data(E, x, cache)
    flags = joint_flags(ps, aps, ell, zero_only=True)
    n = ps.size
    q = 1 / ell**2
    env = analytic.bound_envelope("joint_zero", x=x, ell=ell, omega=omega)
    sigma = _binomial(n, q)
    obs = int(np.count_nonzero(flags))
    return CountReport(
        "joint_zero", (x, 2 * x), obs, n * q, env.value, sigma, _z(obs, n * q, sigma),
        extras={
            "ell": ell, "omega": omega, "good_primes": n,
            "envelope_terms": list(env.terms), "side_conditions": env.side_conditions,
            "subwindow_counts": _sub_counts(x, omega, ps, flags),
        },
    )


def _extremal_shape(t: float, cm: bool) -> float:
    if t < 2:
        t = 2
    if cm:
        return 2 / (3 * math.pi) * t**0.75 / math.log(t)
    return 8 / (3 * math.pi) * t**0.25 / math.log(t)


def extremal_flags(ps: np.ndarray, aps: np.ndarray, sign: ExtremalStatus) -> np.ndarray:
    edge = isqrt_array(4 * ps)
    if sign is ExtremalStatus.PLUS:
        return aps == edge
    if sign is ExtremalStatus.MINUS:
        return aps == -edge
    raise ParameterError("sign must be Plus or Minus")


def extremal_count(E: CurveQ, lo: int, hi: int, sign: ExtremalStatus,
                   cache: TraceCache | None = None) -> CountReport:
    """Good primes lo <= p <= hi with a_p = +-[2 sqrt p].

    The main term is half the endpoint difference of the conjectured
    counting function (one half per sign), floored at 0 where that
    function is still decreasing.
    """
    if isinstance(sign, str):
        sign = ExtremalStatus(sign)
    lo = max(lo, 2)
    if hi < lo:
        ps = np.empty(0, np.int64)
        aps = np.empty(0, np.int64)
    else:
        ps, aps = curves.traces_upto(E, lo - 1, hi, cache)
    obs = int(np.count_nonzero(extremal_flags(ps, aps, sign)))
    cm = E.declared_cm
    main = max((_extremal_shape(hi, cm) - _extremal_shape(lo, cm)) / 2, 0.0) if hi >= lo else 0.0
    n = ps.size
    # rare events: the binomial model in its Poisson limit
    sigma = math.sqrt(main)
    env = analytic.bound_envelope("extremal", x=max(hi / 2, 2))
    return CountReport(
        f"extremal[{sign.value}]", (lo, hi), obs, main, env.value, sigma, _z(obs, main, sigma),
        extras={"cm": cm, "good_primes": n, "sign_split": "half of the two-sided constant per sign"},
    )


def lang_trotter_count(E: CurveQ, t: int, x: int, cache: TraceCache | None = None) -> CountReport:
    """#{p <= x good : a_p = t}. The constant is unknown, so main_term is the
    shape x^(1/2)/log x with constant 1 and extras['normalized'] is the ratio."""
    ps, aps = curves.traces_upto(E, 1, x, cache)
    obs = int(np.count_nonzero(aps == t))
    shape = math.sqrt(x) / math.log(x) if x > 2 else 1.0
    sigma = math.sqrt(shape)
    return CountReport(
        "lang_trotter", (1, x), obs, shape, float("nan"), sigma, _z(obs, shape, sigma),
        extras={"t": t, "normalized": obs / shape, "good_primes": int(ps.size)},
    )


def residue_counts(aps: np.ndarray, ell: int) -> np.ndarray:
    return np.bincount(np.asarray(aps) % ell, minlength=ell)


def residue_histogram(E: CurveQ, ell: int, x: int, cache: TraceCache | None = None) -> HistogramReport:
    """Frequencies of a_p mod ell over good p <= x against |C_l(a)|/|G_l|."""
    gl2.check_odd_prime(ell)
    _, aps = curves.traces_upto(E, 1, x, cache)
    counts = residue_counts(aps, ell)
    n = int(counts.sum())
    ref = [float(f) for f in gl2.reference_masses(ell)]
    obs = (counts / n).tolist() if n else [0.0] * ell
    expected = np.asarray(ref) * n
    chi2 = float(((counts - expected) ** 2 / expected).sum()) if n else 0.0
    ks = float(np.max(np.abs(np.cumsum(obs) - np.cumsum(ref)))) if n else 0.0
    zs = [_z(int(c), n * q, _binomial(n, q)) for c, q in zip(counts, ref)]
    return HistogramReport(
        bin_edges=[float(a) for a in range(ell + 1)], observed_mass=obs, reference_mass=ref,
        ks=ks, chi2=chi2, counts=counts.tolist(),
        extras={"ell": ell, "N": n, "z": zs},
    )


def st_measure(a: float, b: float) -> float:
    """Semicircle mass (2/pi) * integral_a^b sqrt(1 - t^2) dt."""
    if not -1 <= a <= b <= 1:
        raise ParameterError(f"need -1 <= a <= b <= 1, got [{a}, {b}]")
    return float(st_cdf(b) - st_cdf(a))


def st_cdf(t):
    t = np.clip(np.asarray(t, dtype=np.float64), -1.0, 1.0)
    return (np.arcsin(t) + t * np.sqrt(1 - t * t)) / math.pi + 0.5


def sato_tate_histogram(E: CurveQ, x: int, bins: int = 40,
                        cache: TraceCache | None = None) -> HistogramReport:
    """Histogram of a_p / (2 sqrt p) over good p <= x against the semicircle law."""
    if bins < 1:
        raise ParameterError("bins must be >= 1")
    ps, aps = curves.traces_upto(E, 1, x, cache)
    samples = aps / (2 * np.sqrt(ps.astype(np.float64)))
    edges = np.linspace(-1.0, 1.0, bins + 1)
    counts, _ = np.histogram(samples, bins=edges)
    n = int(counts.sum())
    ref = [st_measure(a, b) for a, b in zip(edges[:-1], edges[1:])]
    ref[-1] = 1.0 - sum(ref[:-1])
    expected = np.asarray(ref) * n
    chi2 = float(((counts - expected) ** 2 / expected).sum()) if n else 0.0
    ks = frac.ks_statistic(samples, st_cdf) if n else 0.0
    return HistogramReport(
        bin_edges=edges.tolist(), observed_mass=(counts / n).tolist() if n else [],
        reference_mass=ref, ks=ks, chi2=chi2, counts=counts.tolist(),
        extras={"N": n, "cm": E.declared_cm},
    )


def balog_samples(alpha, theta, x: int) -> np.ndarray:
    return frac.frac_power_many(alpha, theta, sieve_range(1, x))


def balog_report(alpha, theta, x: int) -> BalogReport:
    """Star discrepancy and KS distance of {alpha p^theta} over p <= x."""
    s = balog_samples(alpha, theta, x)
    if s.size == 0:
        raise ParameterError(f"no primes up to {x}")
    return BalogReport(int(s.size), frac.star_discrepancy(s), frac.ks_uniform(s))


def landau_count(alpha, theta, lam, x: int) -> CountReport:
    """#{p <= x : {alpha p^theta} < p^(-lam)} against sum_{p <= x} p^(-lam)."""
    ps = sieve_range(1, x)
    obs = sum(1 for p in ps.tolist() if frac.landau_indicator(alpha, theta, lam, p))
    lamf = float(lam)
    q = ps.astype(np.float64) ** -lamf
    main = float(q.sum())
    sigma = float(np.sqrt((q * (1 - q)).sum()))
    degenerate = sigma == 0.0
    if degenerate:
        # every indicator is certain (lambda = 0); unit scale keeps z finite
        sigma = 1.0
    env = analytic.bound_envelope("landau", x=max(x / 2, 2), C_over_G=1, n_L=1, log_d_L=0,
                                  omega=1, alpha=float(alpha), theta=float(theta), lam=lamf)
    return CountReport(
        "landau", (1, x), obs, main, env.value, sigma, _z(obs, main, sigma),
        extras={"primes": int(ps.size), "envelope_terms": list(env.terms),
                "degenerate_sigma": degenerate},
    )


def prime_rows(E: CurveQ, ell: int, lo: int, hi: int, cache: TraceCache | None = None) -> list[dict]:
    """Per-prime rows for CSV output over good primes in (lo, hi]."""
    ps, aps = curves.traces_upto(E, lo, hi, cache)
    edge = isqrt_array(4 * ps)
    fr = frac.frac_power_many(2, frac.HALF, ps)
    rows = []
    for p, a, e, f in zip(ps.tolist(), aps.tolist(), edge.tolist(), fr.tolist()):
        tags = []
        if a % ell == e % ell:
            tags.append("joint")
        if a == e:
            tags.append("plus")
        if a == -e:
            tags.append("minus")
        rows.append({
            "p": p, "ap": a, "floor_two_sqrt": e, "ap_mod_ell": a % ell,
            "bridge_mod_ell": e % ell, "frac_value": f, "flags": "|".join(tags),
        })
    return rows


def window_good_count(E: CurveQ, x: int) -> int:
    return int(curves.good_primes(E, sieve_range(x, 2 * x)).size)


__all__ = [
    "BalogReport", "CountReport", "HistogramReport", "balog_report", "extremal_count",
    "joint_count", "joint_zero_count", "landau_count", "lang_trotter_count", "prime_count",
    "residue_histogram", "sato_tate_histogram", "st_measure",
]
