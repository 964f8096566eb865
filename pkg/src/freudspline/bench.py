"""Convergence sweeps, rate fitting and report files."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .analysis import recovery_error, reference_weighted_integral
from .blend import apply_P_bar, apply_P_truncated
from .corpus import get_corpus, witness
from .quadrature import build_rule, integrate
from .quasi import apply_Q_bar, apply_Q_truncated, make_config
from .tensor import (SeparableFunction, apply_Pd_truncated, apply_Qd_truncated, integrate_d,
                     recovery_error_d)
from .weight import rate_exponent

RECOVERY_OPS = ("Q", "P", "Qbar", "Pbar")
QUADRATURE_OPS = ("quad-Q", "quad-P")
_APPLY = {"Q": apply_Q_truncated, "P": apply_P_truncated, "Qbar": apply_Q_bar, "Pbar": apply_P_bar}


class ExactReproduction(ValueError):
    """Some errors are zero: the function is reproduced and no slope exists."""


def n_to_m(n: int, ell: int = 2, j0: int = 1, d: int = 1) -> int:
    """Largest ``m`` with ``(2(m + ell + j0) - 1)**d <= n``.

    >>> n_to_m(11), n_to_m(121, d=2)
    (3, 3)
    """
    base = int(math.floor(n ** (1.0 / d) + 1e-9))
    while (base + 1) ** d <= n:
        base += 1
    while base ** d > n:
        base -= 1
    m = (base + 1) // 2 - ell - j0
    if m < 1:
        raise ValueError(f"n={n} too small: need at least {(2 * (1 + ell + j0) - 1) ** d} samples")
    return m


def n_grid(nmin: int, nmax: int) -> list:
    """``(nmin - 1) 2**k + 1`` up to ``nmax``; ``33..4097`` gives ``2**k + 1``."""
    out, k = [], 0
    while True:
        n = (nmin - 1) * 2 ** k + 1
        if n > nmax:
            break
        out.append(n)
        k += 1
    return out


def _parse_float(v):
    if isinstance(v, str) and v.strip().lower() in ("inf", "infinity", "+inf"):
        return math.inf
    return float(v)


@dataclass
class ExperimentConfig:
    """One convergence experiment; see :func:`load_config` for the file format."""

    lam: float = 2.0
    a: float = 0.5
    b: float = 0.0
    ell: int = 2
    op: str = "Q"
    p: float = 2.0
    q: float = 2.0
    r: int = 2
    d: int = 1
    nmin: int = 33
    nmax: int = 4097
    function: str = "witness"
    seed: int = 0
    out: str = "report.csv"
    rho: float | None = None
    tol: float | None = None

    _KEYS = {"lambda": "lam"}

    def __post_init__(self):
        self.lam, self.a, self.b = float(self.lam), float(self.a), float(self.b)
        self.p, self.q = _parse_float(self.p), _parse_float(self.q)
        self.ell, self.r, self.d = int(self.ell), int(self.r), int(self.d)
        self.nmin, self.nmax, self.seed = int(self.nmin), int(self.nmax), int(self.seed)
        self.rho = None if self.rho in (None, "", "None") else float(self.rho)
        self.tol = None if self.tol in (None, "", "None") else float(self.tol)

    @property
    def kind(self) -> str:
        return "quadrature" if self.op in QUADRATURE_OPS else "recovery"

    @property
    def tolerance(self) -> float:
        if self.tol is not None:
            return self.tol
        return 0.25 if self.d == 1 else 0.3

    def recovery_config(self):
        return make_config(self.ell, self.lam, self.a, self.b, self.rho)

    def predicted(self) -> float:
        q = 1.0 if self.kind == "quadrature" else self.q
        return rate_exponent(self.r, self.p, q, self.lam, kind=self.kind, d=self.d)

    def validate(self):
        if self.op not in RECOVERY_OPS + QUADRATURE_OPS:
            raise ValueError(f"unknown operator {self.op!r}")
        if self.r > 2 * self.ell:
            raise ValueError(f"r={self.r} exceeds 2*ell={2 * self.ell}")
        if self.d not in (1, 2, 3):
            raise ValueError(f"unsupported dimension d={self.d}")
        if self.d > 1 and self.op not in ("Q", "P", "quad-Q", "quad-P"):
            raise ValueError("extended operators are one-dimensional only")
        if self.predicted() <= 0:
            raise ValueError(f"predicted exponent {self.predicted():.4g} must be positive")
        if self.nmin > self.nmax:
            raise ValueError("nmin exceeds nmax")
        return self

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def load_config(path=None, **overrides) -> ExperimentConfig:
    """Read flat ``key=value`` lines (``#`` comments); ``overrides`` that are not None win."""
    values = {}
    if path is not None:
        for raw in Path(path).read_text(encoding="utf-8").splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}: malformed line {raw!r}")
            k, v = (s.strip() for s in line.split("=", 1))
            values[ExperimentConfig._KEYS.get(k, k)] = v
    for k, v in overrides.items():
        if v is not None:
            values[ExperimentConfig._KEYS.get(k, k)] = v
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown configuration keys: {sorted(unknown)}")
    return ExperimentConfig(**values)


def resolve_function(config: ExperimentConfig):
    """Corpus function (1-D) or separable product (``d > 1``) for a run."""
    w = config.recovery_config().weight
    if config.function != "witness":
        g = get_corpus(config.function, w, config.p)
    elif config.d == 1:
        g = witness(config.r, config.p, config.q, w, config.kind)
    else:
        # slow decay witness: reaches its asymptotic rate at small per-axis m
        g = witness(config.r, config.p, config.q, w, "quadrature")
    if config.d == 1:
        return g
    return SeparableFunction(*([g] * config.d))


def _smooth(f) -> bool:
    factors = getattr(f, "factors", (f,))
    return all(math.isinf(getattr(g, "smoothness", 0)) for g in factors)


@dataclass
class RateReport:
    config: dict
    rows: list = field(default_factory=list)
    slope: float | None = None
    predicted: float | None = None
    residual: float | None = None
    tolerance: float = 0.25
    smooth: bool = False
    status: str = "ok"
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        if self.slope is None or self.predicted is None:
            return False
        if self.smooth:
            return self.slope <= -self.predicted + self.tolerance
        return abs(self.slope + self.predicted) <= self.tolerance

    def summary(self) -> dict:
        return {"predicted_exponent": self.predicted, "fitted_slope": self.slope,
                "residual": self.residual, "tolerance": self.tolerance, "smooth_witness": self.smooth,
                "passed": self.passed, "status": self.status, "failures": self.failures,
                "config": self.config}


def fit_rate(pairs, with_residual: bool = False):
    """Least-squares slope of ``log error`` on ``log n`` over the largest ``ceil(N/2)`` ``n``."""
    pairs = sorted((float(n), float(e)) for n, e in pairs)
    if len(pairs) < 3:
        raise ValueError("need at least 3 (n, error) pairs")
    if any(e <= 0 for _, e in pairs):
        raise ExactReproduction("exact")
    use = pairs[len(pairs) // 2:]
    x = np.log([n for n, _ in use])
    y = np.log([e for _, e in use])
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    slope = float(coef[0])
    if with_residual:
        resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
        return slope, resid
    return slope


def _error_at(config, cfg, f, m, reference):
    if config.kind == "quadrature":
        kind = config.op.split("-")[1]
        if config.d == 1:
            val = integrate(build_rule(kind, m, cfg), f)
        else:
            val = integrate_d(kind, f, config.d, m, cfg)
        return abs(val - reference)
    if config.d == 1:
        return recovery_error(f, _APPLY[config.op](f, m, cfg), config.q, cfg.weight)
    op = apply_Qd_truncated if config.op == "Q" else apply_Pd_truncated
    return recovery_error_d(f, op(f, config.d, m, cfg), config.q, cfg.weight)


def _reference(config, cfg, f):
    w = cfg.weight
    if config.d == 1:
        return reference_weighted_integral(f, w)
    one = reference_weighted_integral(f.factors[0], w)
    return one ** config.d


def run_convergence(config: ExperimentConfig, ns=None) -> RateReport:
    """Errors over the ``n``-grid, fitted slope and comparison with the predicted exponent."""
    config.validate()
    cfg = config.recovery_config()
    f = resolve_function(config)
    report = RateReport(config.to_dict(), predicted=config.predicted(),
                        tolerance=config.tolerance, smooth=_smooth(f))
    reference = _reference(config, cfg, f) if config.kind == "quadrature" else None
    ns = ns if ns is not None else _config_ns(config)
    seen = set()
    for n in ns:
        try:
            m = n_to_m(n, cfg.ell, cfg.j0, config.d)
        except ValueError as exc:
            report.failures.append({"n": n, "error": str(exc)})
            continue
        if m in seen:
            continue
        seen.add(m)
        t0 = time.perf_counter()
        try:
            err = _error_at(config, cfg, f, m, reference)
        except Exception as exc:  # recorded per n, report stays usable
            report.failures.append({"n": n, "m": m, "error": f"{type(exc).__name__}: {exc}"})
            continue
        report.rows.append({"n": n, "m": m, "error": float(err),
                            "seconds": time.perf_counter() - t0})
    if report.failures:
        report.status = "partial"
    pairs = [(r["n"], r["error"]) for r in report.rows]
    try:
        report.slope, report.residual = fit_rate(pairs, with_residual=True)
    except ExactReproduction:
        report.status = "exact"
    except ValueError as exc:
        report.status = "partial"
        report.failures.append({"error": str(exc)})
    return report


def _config_ns(config):
    if config.d == 1:
        return n_grid(config.nmin, config.nmax)
    out, n = [], config.nmin
    while n <= config.nmax:
        out.append(n)
        n *= 2
    if out and out[-1] != config.nmax:
        out.append(config.nmax)
    return out


def emit_report(report: RateReport, path) -> dict:
    """Write ``<path>`` (CSV), ``<path>.json`` (summary) and ``<path>.dat`` (gnuplot)."""
    path = Path(path)
    paths = {"csv": path, "json": path.with_suffix(".json"), "dat": path.with_suffix(".dat")}
    try:
        with open(paths["csv"], "w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["n", "m", "error", "seconds"])
            for row in report.rows:
                out.writerow([row["n"], row["m"], f"{row['error']:.17g}", f"{row['seconds']:.6f}"])
        with open(paths["dat"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write("# n error\n")
            for row in report.rows:
                fh.write(f"{row['n']} {row['error']:.17g}\n")
        with open(paths["json"], "w", encoding="utf-8", newline="\n") as fh:
            json.dump(_jsonable(report.summary()), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return paths


def _jsonable(obj):
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def read_report_csv(path):
    with open(path, encoding="utf-8") as fh:
        return [{"n": int(r["n"]), "m": int(r["m"]), "error": float(r["error"]),
                 "seconds": float(r["seconds"])} for r in csv.DictReader(fh)]


__all__ = [
    "ExactReproduction", "ExperimentConfig", "QUADRATURE_OPS", "RECOVERY_OPS", "RateReport",
    "emit_report", "fit_rate", "load_config", "n_grid", "n_to_m", "read_report_csv",
    "resolve_function", "run_convergence",
]
