"""Acceptance gate: one test per numbered criterion.

Each test records a one-line summary (``detail``) which the conftest hook
prints as ``criterion N: PASS|FAIL`` at the end of the run; the same line is
printed from the test body for ``pytest -s``.  Run alone with
``pytest tests/test_acceptance.py -v``.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from freudspline import (FreudWeight, apply_P_truncated, apply_Q_truncated, apply_R_truncated,
                         apply_RQ_truncated, blended_stencil, get_corpus, integrate, make_config,
                         reference_weighted_integral, weighted_lq_norm, weighted_sobolev_norm)
from freudspline.bench import ExperimentConfig, emit_report, run_convergence
from freudspline.cli import main
from freudspline.quadrature import build_rule
from freudspline.spline_space import ensemble_report, fooling_m, fooling_spline
from freudspline.tensor import (SeparableFunction, apply_Pd_truncated, integrate_d,
                                weighted_lq_norm_d)
from freudspline.weight import rate_exponent

W = FreudWeight(2.0, 0.5, 0.0)


def _report(record_property, n, ok, detail):
    record_property("detail", detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


def _corpus4():
    return [get_corpus(k, W, 2.0) for k in ("gauss", "oscil", "kink_2", "heavy_1.3")]


def _monomial(k):
    f = lambda x: np.asarray(x, dtype=float) ** k  # noqa: E731
    f.vectorized = True
    return f


@pytest.mark.criterion(1)
def test_criterion_01_polynomial_reproduction(record_property):
    t0 = time.perf_counter()
    worst = 0.0
    for ell in (1, 2):
        cfg = make_config(ell=ell)
        for m in (8, 32):
            grid = cfg.grid(m)
            # interior: one support radius inside the truncation interval
            edge = grid.bound - ell * grid.h
            x = np.linspace(-edge, edge, 2001)
            for k in range(2 * ell):
                scale = max(float(np.max(np.abs(x ** k))), 1.0)
                for op in (apply_Q_truncated, apply_P_truncated):
                    dev = np.max(np.abs(op(_monomial(k), m, cfg)(x) - x ** k)) / scale
                    worst = max(worst, float(dev))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and elapsed < 5
    _report(record_property, 1, ok, f"max relative deviation {worst:.2e} (< 1e-9), {elapsed:.1f}s")
    assert worst < 1e-9
    assert elapsed < 5


@pytest.mark.criterion(2)
def test_criterion_02_interpolation_identity(record_property):
    t0 = time.perf_counter()
    cfg = make_config(ell=2)
    worst = 0.0
    for f in _corpus4():
        for m in (8, 64):
            xk = cfg.grid(m).nodes(m)
            worst = max(worst, float(np.max(np.abs(apply_P_truncated(f, m, cfg)(xk) - f(xk)))))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and elapsed < 10
    _report(record_property, 2, ok, f"max node gap {worst:.2e} (< 1e-9), {elapsed:.1f}s")
    assert worst < 1e-9
    assert elapsed < 10


@pytest.mark.criterion(3)
def test_criterion_03_blend_identity(record_property):
    rng = np.random.default_rng(3)
    worst, configs = 0.0, 0
    for ell in (1, 2):
        cfg = make_config(ell=ell)
        for f in _corpus4():
            for m in (8, 64):
                b = cfg.grid(m).bound
                x = rng.uniform(-b, b, 100)
                parts = [op(f, m, cfg)(x) for op in (apply_P_truncated, apply_R_truncated,
                                                     apply_Q_truncated, apply_RQ_truncated)]
                P, R, Q, RQ = parts
                worst = max(worst, float(np.max(np.abs(P - (R + Q - RQ)))))
                configs += 1
    ok = worst < 1e-12
    _report(record_property, 3, ok, f"max |P - (R + Q - RQ)| {worst:.2e} over {configs} configs")
    assert worst < 1e-12


@pytest.mark.criterion(4)
def test_criterion_04_blended_table(record_property):
    table = {0: Fraction(29, 72), 1: Fraction(7, 12), 2: Fraction(-1, 8), 3: Fraction(-1, 12),
             4: Fraction(1, 48)}
    got = blended_stencil(make_config(ell=2))
    gaps = {k: abs(got.get(k, 0.0) - float(v)) for k, v in table.items()}
    sym = max(abs(got.get(k, 0.0) - got.get(-k, 0.0)) for k in range(1, 5))
    worst = max(max(gaps.values()), sym)
    bad = {k: f"{got.get(k, 0.0):.15g}" for k, g in gaps.items() if g >= 1e-12}
    ok = worst < 1e-12
    _report(record_property, 4, ok,
            f"max gap {worst:.3g}" + (f"; mismatched entries {bad}" if bad else ""))
    assert worst < 1e-12, f"computed stencil {got}"


RECOVERY_CASES = [(2, 2, 2, "witness"), (2, 2, 4, "gauss"), (1, math.inf, 3, "witness"),
                  (math.inf, 1, 2, "witness")]


@pytest.mark.criterion(5)
def test_criterion_05_recovery_rate(record_property):
    t0 = time.perf_counter()
    lines, ok = [], True
    for p, q, r, fn in RECOVERY_CASES:
        for op in ("Q", "P"):
            rep = run_convergence(ExperimentConfig(p=p, q=q, r=r, op=op, function=fn,
                                                   nmin=33, nmax=4097))
            ok &= rep.passed and rep.status == "ok"
            rule = "<=" if rep.smooth else "~"
            lines.append(f"({p:g},{q:g},{r}){op} {rep.slope:.3f}{rule}{-rep.predicted:.3f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 600
    _report(record_property, 5, ok, "; ".join(lines) + f"; {elapsed:.0f}s")
    assert ok


@pytest.mark.criterion(6)
def test_criterion_06_quadrature_rate(record_property):
    t0 = time.perf_counter()
    lines, ok = [], True
    gauss_slope = None
    for p in (1.0, 2.0, math.inf):
        for r in (2, 3):
            for op in ("quad-Q", "quad-P"):
                rep = run_convergence(ExperimentConfig(op=op, p=p, r=r, nmin=33, nmax=4097))
                ok &= abs(rep.slope + rep.predicted) <= 0.25
                lines.append(f"(p={p:g},r={r}){op[-1]} {rep.slope:.3f}~{-rep.predicted:.3f}")
                if p == 1 and r == 2 and op == "quad-Q":
                    gauss_slope = rep.slope
    # Gaussian weight, p=1: exponent r/2
    ok &= abs(gauss_slope + 2 / 2) <= 0.25
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 300
    _report(record_property, 6, ok, "; ".join(lines) +
            f"; gaussian p=1 r=2 slope {gauss_slope:.3f}; {elapsed:.0f}s")
    assert ok


@pytest.mark.criterion(7)
def test_criterion_07_quadrature_structure(record_property):
    cfg = make_config(ell=2)
    one = lambda x: np.ones_like(np.asarray(x, dtype=float))  # noqa: E731
    cubic = lambda x: x ** 3 - 2 * x ** 2 + x - 1  # noqa: E731
    mass_gap = exact_gap = 0.0
    for m in (8, 32):
        b = cfg.grid(m).bound
        mass = reference_weighted_integral(one, W, (-b, b))
        ref = reference_weighted_integral(cubic, W, (-b, b))
        for kind in ("Q", "P"):
            rule = build_rule(kind, m, cfg)
            mass_gap = max(mass_gap, abs(rule.weights.sum() - mass))
            exact_gap = max(exact_gap, abs(integrate(rule, cubic) - ref) / abs(ref))
    gen_gap = 0.0
    for f in _corpus4() + [get_corpus("poly_3")]:
        s = apply_Q_truncated(f, 32, cfg)
        direct = reference_weighted_integral(s, W, s.support)
        gen_gap = max(gen_gap, abs(integrate(build_rule("Q", 32, cfg), f) - direct))
    ok = mass_gap < 1e-9 and exact_gap < 1e-8 and gen_gap < 1e-9
    _report(record_property, 7, ok, f"mass gap {mass_gap:.1e}, cubic exactness {exact_gap:.1e}, "
            f"rule vs integral of recovery {gen_gap:.1e}")
    assert mass_gap < 1e-9
    assert exact_gap < 1e-8
    assert gen_gap < 1e-9


@pytest.mark.criterion(8)
def test_criterion_08_inequalities(record_property):
    t0 = time.perf_counter()
    cfg = make_config(ell=2)
    ms = [16, 32, 64, 128, 256]
    jobs = []
    for p in (1.0, 2.0, math.inf):
        jobs += [("node", p, None, 0), ("coeff", p, None, 0)]
        jobs += [("bernstein", p, None, r) for r in (1, 2, 3)]
    jobs += [("nikolskii", p, q, 0) for p, q in ((1.0, math.inf), (2.0, math.inf), (math.inf, 1.0))]
    worst_spread = worst_drift = 0.0
    bad = []
    for kind, p, q, r in jobs:
        rep = ensemble_report(kind, ms, cfg, p, q, r, size=64, seed=0)
        worst_spread = max(worst_spread, rep["spread"])
        worst_drift = max(worst_drift, abs(rep["drift"]))
        if rep["spread"] >= 10 or abs(rep["drift"]) >= 0.1:
            bad.append(f"{kind} p={p:g} q={q} r={r}")
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 300
    _report(record_property, 8, ok, f"{len(jobs)} ensembles, max spread {worst_spread:.3f} (< 10), "
            f"max |drift| {worst_drift:.3f} (< 0.1), {elapsed:.0f}s" + (f"; bad {bad}" if bad else ""))
    assert not bad
    assert elapsed < 300


FOOLING_CASES = [(2, 2, 2), (math.inf, 1, 2), (1, math.inf, 3), (2, 1, 3), (math.inf, math.inf, 1)]


@pytest.mark.criterion(9)
def test_criterion_09_fooling_spline(record_property):
    cfg = make_config(ell=2)
    worst_zero = worst_norm = worst_spread = 0.0
    for p, q, r in FOOLING_CASES:
        expo = rate_exponent(r, p, q, W.lam)
        vals = []
        for n in (8, 16, 32):
            m = fooling_m(n, cfg, p <= q)
            b = cfg.grid(m).bound
            pts = np.random.default_rng(1000 + n).uniform(-b, b, n)
            phi = fooling_spline(pts, n, r, p, q, cfg, m)
            worst_zero = max(worst_zero, float(np.max(np.abs(phi(pts)))))
            worst_norm = max(worst_norm, abs(weighted_sobolev_norm(phi, r, p, W) - 1))
            vals.append(weighted_lq_norm(phi, q, W) / n ** (-expo))
        worst_spread = max(worst_spread, max(vals) / min(vals))
    ok = worst_zero < 1e-12 and worst_norm < 1e-8 and worst_spread < 4
    _report(record_property, 9, ok, f"max |phi(points)| {worst_zero:.1e}, max |norm - 1| "
            f"{worst_norm:.1e}, max spread across n {worst_spread:.3f} (< 4)")
    assert worst_zero < 1e-12
    assert worst_norm < 1e-8
    assert worst_spread < 4


@pytest.mark.criterion(10)
def test_criterion_10_tensor(record_property):
    t0 = time.perf_counter()
    cfg = make_config(ell=2)
    g, h = get_corpus("gauss"), get_corpus("oscil")
    F = SeparableFunction(g, h)
    audit = 0.0
    for m in (8, 24):
        nodes = cfg.grid(m).nodes(m)
        X, Y = np.meshgrid(nodes, nodes, indexing="ij")
        audit = max(audit, float(np.max(np.abs(apply_Pd_truncated(F, 2, m, cfg)(X, Y) - F(X, Y)))))

    # factorization of the tensor operator, its quadrature and the weighted norm
    m = 12
    pts = np.random.default_rng(10).uniform(-4, 4, (200, 2))
    fac_op = float(np.max(np.abs(apply_Pd_truncated(F, 2, m, cfg)(pts[:, 0], pts[:, 1])
                                 - apply_P_truncated(g, m, cfg)(pts[:, 0])
                                 * apply_P_truncated(h, m, cfg)(pts[:, 1]))))
    prod = integrate(build_rule("Q", m, cfg), g) * integrate(build_rule("Q", m, cfg), h)
    fac_int = abs(integrate_d("Q", F, 2, m, cfg) - prod) / abs(prod)
    nprod = weighted_lq_norm(g, 2, W) * weighted_lq_norm(h, 2, W)
    fac_norm = abs(weighted_lq_norm_d(F, 2, 2, W) - nprod) / nprod
    factor = max(fac_op, fac_int, fac_norm)

    lines, rate_ok = [], True
    for op in ("Q", "P"):
        rep = run_convergence(ExperimentConfig(d=2, op=op, p=2, q=2, r=2, nmin=100, nmax=10000))
        rate_ok &= rep.passed and rep.status == "ok"
        lines.append(f"{op} slope {rep.slope:.3f}~{-rep.predicted:.3f} (n<={rep.rows[-1]['n']})")
    elapsed = time.perf_counter() - t0
    ok = audit < 1e-9 and factor < 1e-10 and rate_ok and elapsed < 600
    _report(record_property, 10, ok, f"audit {audit:.1e}, factorization {factor:.1e}, "
            + "; ".join(lines) + f"; {elapsed:.0f}s")
    assert audit < 1e-9
    assert factor < 1e-10
    assert rate_ok
    assert elapsed < 600


def _strip_seconds(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    return "\n".join(",".join(line.split(",")[:3]) for line in lines).encode()


@pytest.mark.criterion(11)
def test_criterion_11_determinism(tmp_path, record_property):
    identical = []
    for tag in ("a", "b"):
        d = tmp_path / tag
        d.mkdir()
        cfg = ExperimentConfig(op="P", p=1, q=math.inf, r=3, nmax=1025, seed=7)
        emit_report(run_convergence(cfg), d / "recover.csv")
        main(["inequalities", "--p", "inf", "--q", "1", "--r", "2", "--ms", "16,32", "--size", "8",
              "--seed", "7", "--out", str(d / "ineq.csv")])
        main(["fooling", "--p", "inf", "--q", "1", "--r", "2", "--ns", "8,16", "--seed", "7",
              "--out", str(d / "fool.csv")])
        main(["rule", "export", "--op", "P", "--m", "16", "--out", str(d / "rule.csv")])
    a, b = tmp_path / "a", tmp_path / "b"
    for name in ("recover.dat", "recover.json", "ineq.csv", "fool.csv", "rule.csv"):
        identical.append((name, (a / name).read_bytes() == (b / name).read_bytes()))
    # the seconds column is wall-clock time; every data column must match byte for byte
    identical.append(("recover.csv[n,m,error]",
                      _strip_seconds(a / "recover.csv") == _strip_seconds(b / "recover.csv")))
    ok = all(v for _, v in identical)
    _report(record_property, 11, ok, ", ".join(f"{k} {'same' if v else 'DIFFERENT'}"
                                               for k, v in identical))
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
