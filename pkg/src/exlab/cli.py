"""exlab command line: one subcommand per experiment, JSON report on stdout
(and in --out), optional per-prime CSV.

Exit status: 0 success, 1 usage or input error, 2 undecidable precision.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import enum
import json
import math
import sys
import time
from fractions import Fraction

from . import __version__, analytic, config, curves, experiments, gl2, primes
from .errors import BadReduction, ParameterError, UncertainDecision

EXIT_OK, EXIT_USAGE, EXIT_UNCERTAIN = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _jsonable(v):
    if dataclasses.is_dataclass(v) and not isinstance(v, type):
        return {f.name: _jsonable(getattr(v, f.name)) for f in dataclasses.fields(v)}
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, enum.Enum):
        return v.value
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if hasattr(v, "item"):  # numpy scalar
        return _jsonable(v.item())
    return v


def _write_csv(path, rows: list[dict]) -> None:
    if not rows:
        open(path, "w").close()
        return
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in r.items()})


def _one_or_many(reports: list):
    return reports[0] if len(reports) == 1 else {"reports": reports}


# experiment runners: cfg -> (report, csv rows or None)

def _run_sieve(cfg, cache):
    lo = cfg.lo or 0
    t0 = time.perf_counter()
    n = primes.count_range(lo, cfg.x)
    rep = {"lo": lo, "hi": cfg.x, "count": n, "seconds": time.perf_counter() - t0}
    rows = None
    if cfg.csv:
        rows = [{"p": p} for p in primes.sieve_range(lo, cfg.x).tolist()]
    return rep, rows


def _run_ap(cfg, cache):
    E = curves.curve_from_spec(cfg.curve)
    if cfg.p is not None:
        rec = curves.ap(E, cfg.p, cache)
        return {"curve": E.label, "p": rec.p, "ap": rec.ap, "method": rec.method}, None
    lo = cfg.lo or 0
    ps = curves.good_primes(E, primes.sieve_range(lo, cfg.x))
    aps, method = curves.trace_array(E, ps, cache)
    names = {0: "Naive", 1: "Bsgs", 2: "Cache"}
    rep = {"curve": E.label, "lo": lo, "hi": cfg.x, "good_primes": int(ps.size),
           "bad_primes": list(E.bad_primes),
           "methods": {names[k]: int((method == k).sum()) for k in names}}
    rows = [{"p": p, "ap": a, "method": names[m]}
            for p, a, m in zip(ps.tolist(), aps.tolist(), method.tolist())]
    return rep, rows


def _run_classes(cfg, cache):
    reps = []
    for ell in cfg.ell:
        fibers = [gl2.trace_fiber(ell, a) for a in range(ell)]
        reps.append({
            "ell": ell, "group_order": gl2.group_order(ell),
            "inventory": gl2.class_inventory(ell), "fibers": fibers,
        })
    return _one_or_many(reps), None


def _curve_and_rows(cfg, cache, lo, hi):
    E = curves.curve_from_spec(cfg.curve)
    rows = experiments.prime_rows(E, cfg.ell[0], lo, hi, cache) if cfg.csv else None
    return E, rows


def _run_joint(cfg, cache, zero=False):
    E, rows = _curve_and_rows(cfg, cache, cfg.x, 2 * cfg.x)
    fn = experiments.joint_zero_count if zero else experiments.joint_count
    return _one_or_many([fn(E, ell, cfg.x, cfg.omega, cache) for ell in cfg.ell]), rows


def _run_extremal(cfg, cache):
    lo = 2 if cfg.lo is None else cfg.lo
    E, rows = _curve_and_rows(cfg, cache, lo - 1, cfg.x)
    signs = [cfg.sign] if cfg.sign else ["Plus", "Minus"]
    return _one_or_many([experiments.extremal_count(E, lo, cfg.x, s, cache) for s in signs]), rows


def _run_langtrotter(cfg, cache):
    E, rows = _curve_and_rows(cfg, cache, 1, cfg.x)
    return experiments.lang_trotter_count(E, cfg.t, cfg.x, cache), rows


def _run_satotate(cfg, cache):
    E, rows = _curve_and_rows(cfg, cache, 1, cfg.x)
    return experiments.sato_tate_histogram(E, cfg.x, cfg.bins, cache), rows


def _run_residues(cfg, cache):
    E, rows = _curve_and_rows(cfg, cache, 1, cfg.x)
    return _one_or_many([experiments.residue_histogram(E, ell, cfg.x, cache) for ell in cfg.ell]), rows


def _run_balog(cfg, cache):
    rep = experiments.balog_report(cfg.alpha, cfg.theta, cfg.x)
    rows = None
    if cfg.csv:
        ps = primes.sieve_range(1, cfg.x)
        vals = experiments.balog_samples(cfg.alpha, cfg.theta, cfg.x)
        rows = [{"p": p, "frac_value": v} for p, v in zip(ps.tolist(), vals.tolist())]
    return rep, rows


def _run_landau(cfg, cache):
    return experiments.landau_count(cfg.alpha, cfg.theta, cfg.lam, cfg.x), None


def _run_meanvalue(cfg, cache):
    ap = analytic.analytic_params(cfg.alpha, cfg.theta, cfg.x, cfg.delta1, cfg.delta2,
                                  cfg.omega, n_L=cfg.n_L)
    T = cfg.tprime if cfg.tprime is not None else ap.T0
    mv = analytic.mean_value_check(T, ap)
    return {"Tprime": T, "params": ap, "result": mv}, None


def _run_envelope(cfg, cache):
    ell = cfg.ell[0]
    params = dict(x=cfg.x, ell=ell, omega=cfg.omega, alpha=float(cfg.alpha),
                  theta=float(cfg.theta), lam=float(cfg.lam), delta=cfg.delta, eps=cfg.eps,
                  n_L=cfg.n_L, log_d_L=cfg.log_d_L, C_over_G=cfg.C_over_G)
    return analytic.bound_envelope(cfg.statement, **params), None


def _run_verify(cfg, cache):
    from .verify import run_all

    checks = run_all()
    return {"all_ok": all(c.ok for c in checks), "checks": checks}, None


RUNNERS = {
    "sieve": _run_sieve,
    "ap": _run_ap,
    "classes": _run_classes,
    "joint": _run_joint,
    "jointzero": lambda c, k: _run_joint(c, k, zero=True),
    "extremal": _run_extremal,
    "langtrotter": _run_langtrotter,
    "satotate": _run_satotate,
    "residues": _run_residues,
    "balog": _run_balog,
    "landau": _run_landau,
    "meanvalue": _run_meanvalue,
    "envelope": _run_envelope,
    "verify": _run_verify,
}
assert set(RUNNERS) == set(config.EXPERIMENTS)


def run(cfg: config.ExperimentConfig, stdout=None) -> int:
    """Dispatch one validated config; returns the exit status."""
    import numba

    stdout = stdout or sys.stdout
    numba.set_num_threads(max(1, min(cfg.threads, numba.config.NUMBA_NUM_THREADS)))
    cache_path = cfg.cache or curves_cache_default()
    cache = curves.TraceCache(cache_path) if cache_path else curves.TraceCache()
    report, rows = RUNNERS[cfg.experiment](cfg, cache)
    payload = _jsonable(report)
    if isinstance(payload, dict) and cfg.experiment != "verify":
        payload.setdefault("experiment", cfg.experiment)
    text = json.dumps(payload, indent=2, ensure_ascii=False)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text + "\n")
    print(text, file=stdout)
    if cfg.csv and rows is not None:
        _write_csv(cfg.csv, rows)
    if cfg.experiment == "verify" and not payload["all_ok"]:
        return EXIT_USAGE
    return EXIT_OK


def curves_cache_default():
    from .cache import default_path

    return default_path()


_FLAGS = (
    ("--curve", str, "corpus label or a1,a2,a3,a4,a6"),
    ("--x", int, "range bound; windows are (x, 2x]"),
    ("--lo", int, "lower end for sieve/ap/extremal"),
    ("--p", int, "single prime for `ap`"),
    ("--ell", str, "odd prime(s), comma separated"),
    ("--omega", float, "sub-window parameter (>= 1)"),
    ("--alpha", str, "coefficient, e.g. 2 or 1/3"),
    ("--theta", str, "exponent, e.g. 1/2"),
    ("--lambda", str, "Landau exponent"),
    ("--delta1", str, "window start in [0, 1)"),
    ("--delta2", str, "window end in (0, 1]"),
    ("--t", int, "trace value for langtrotter"),
    ("--sign", str, "Plus or Minus (extremal)"),
    ("--tprime", float, "mean-value range start (default alpha x^theta)"),
    ("--statement", str, f"envelope id: {', '.join(analytic.STATEMENTS)}"),
    ("--delta", float, "window length for envelopes"),
    ("--eps", float, "epsilon for envelopes"),
    ("--n_L", int, "field degree for envelopes"),
    ("--log_d_L", float, "log discriminant for envelopes"),
    ("--C_over_G", float, "class proportion for envelopes"),
    ("--bins", int, "histogram bins"),
    ("--threads", int, "worker threads"),
    ("--cache", str, "trace cache file (default $EXLAB_CACHE)"),
    ("--out", str, "JSON report path"),
    ("--csv", str, "per-prime CSV path"),
)
_EXACT = {"alpha", "theta", "lambda", "delta1", "delta2"}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="TOML config; flags override its keys")
    for flag, typ, help_ in _FLAGS:
        common.add_argument(flag, type=typ, default=None, help=help_,
                            dest=flag[2:].replace("lambda", "lambda_"))
    parser = _Parser(prog="exlab", description="Frobenius-trace and fractional-part experiments.")
    parser.add_argument("--version", action="version", version=f"exlab {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True, parser_class=_Parser)
    for name in config.EXPERIMENTS:
        sub.add_parser(name, parents=[common])
    return parser


def _args_to_values(ns: argparse.Namespace) -> dict:
    values = config.load_config(ns.config) if ns.config else {}
    values["experiment"] = ns.experiment
    for flag, _, _ in _FLAGS:
        key = flag[2:]
        v = getattr(ns, key.replace("lambda", "lambda_"))
        if v is None:
            continue
        if key == "ell":
            try:
                v = [int(e) for e in v.split(",")]
            except ValueError:
                raise ParameterError(f"ell: expected comma-separated integers, got {v!r}") from None
        elif key in _EXACT:
            try:
                v = Fraction(v)
            except (ValueError, ZeroDivisionError):
                raise ParameterError(f"{key}: expected a number or p/q, got {v!r}") from None
        values[key] = v
    return values


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = config.build_config(_args_to_values(ns))
        return run(cfg)
    except UsageError as exc:
        print(f"exlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UncertainDecision as exc:
        print(f"exlab: undecidable at maximum precision: {exc}", file=sys.stderr)
        return EXIT_UNCERTAIN
    except (ParameterError, BadReduction, OSError) as exc:
        print(f"exlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
