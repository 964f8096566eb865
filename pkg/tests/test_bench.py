import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freudspline.bench import (ExactReproduction, ExperimentConfig, RateReport, emit_report,
                               fit_rate, load_config, n_grid, n_to_m, read_report_csv,
                               resolve_function, run_convergence)
from freudspline.quadrature import sample_map
from freudspline.quasi import make_config


# ---- n_to_m -----------------------------------------------------------------

@pytest.mark.parametrize("n, ell, j0, d, m", [
    (11, 2, 1, 1, 3), (7, 1, 0, 1, 3), (121, 2, 1, 2, 3),
    (12, 2, 1, 1, 3), (13, 2, 1, 1, 4), (120, 2, 1, 2, 2), (1331, 2, 1, 3, 3),
])
def test_n_to_m_examples(n, ell, j0, d, m):
    assert n_to_m(n, ell, j0, d) == m


def test_n_to_m_too_small():
    with pytest.raises(ValueError, match="too small"):
        n_to_m(6, 2, 1)


@given(st.integers(9, 5000), st.integers(1, 3))
def test_n_to_m_is_largest_admissible(n, d):
    if (2 * (1 + 3) - 1) ** d > n:
        return
    m = n_to_m(n, 2, 1, d)
    assert (2 * (m + 3) - 1) ** d <= n < (2 * (m + 4) - 1) ** d


@given(st.integers(9, 4000))
def test_n_to_m_monotone(n):
    assert n_to_m(n, 2, 1) <= n_to_m(n + 1, 2, 1)


@pytest.mark.parametrize("op", ["Q", "P", "Qbar", "Pbar"])
@pytest.mark.parametrize("n", [15, 33, 100, 4097])
def test_sample_budget_never_exceeds_n(op, n):
    cfg = make_config(ell=2)
    m = n_to_m(n, cfg.ell, cfg.j0)
    _, _, _, K = sample_map(op, cfg, m)
    assert 2 * K + 1 <= n


def test_extension_needs_room():
    with pytest.raises(ValueError, match="extension"):
        sample_map("Qbar", make_config(ell=2), n_to_m(11))


def test_n_grid_default():
    assert n_grid(33, 4097) == [33, 65, 129, 257, 513, 1025, 2049, 4097]


# ---- fit_rate -----------------------------------------------------------------

def test_fit_rate_constant():
    assert fit_rate([(n, 3.0) for n in (10, 20, 40, 80)]) == pytest.approx(0.0, abs=1e-12)


def test_fit_rate_square():
    assert fit_rate([(n, 5.0 * n ** -2.0) for n in (10, 20, 40, 80)]) == pytest.approx(-2, abs=1e-12)


def test_fit_rate_synthetic_injection():
    ns = n_grid(33, 4097)
    assert abs(fit_rate([(n, 7 * n ** -1.5) for n in ns]) + 1.5) < 1e-10


def test_fit_rate_noisy_power_law():
    ns = n_grid(33, 4097)
    slope = fit_rate([(n, (1 + 0.01 * (-1) ** n) / n) for n in ns])
    assert abs(slope + 1) < 0.02


def test_fit_rate_uses_largest_half():
    # the small-n half is garbage and must be ignored
    pairs = [(10, 1e5), (20, 1e-9), (40, 40.0 ** -3), (80, 80.0 ** -3), (160, 160.0 ** -3)]
    assert fit_rate(pairs) == pytest.approx(-3, abs=1e-10)


def test_fit_rate_order_independent():
    pairs = [(n, n ** -1.25) for n in (33, 65, 129, 257)]
    assert fit_rate(pairs[::-1]) == pytest.approx(fit_rate(pairs), abs=1e-14)


def test_fit_rate_exact_and_too_few():
    with pytest.raises(ExactReproduction):
        fit_rate([(10, 1.0), (20, 0.0), (40, 1.0)])
    with pytest.raises(ValueError):
        fit_rate([(10, 1.0), (20, 0.5)])


@settings(max_examples=30)
@given(st.floats(-4, 1), st.floats(1e-3, 1e3))
def test_fit_rate_recovers_power(alpha, c):
    ns = n_grid(33, 4097)
    assert fit_rate([(n, c * n ** alpha) for n in ns]) == pytest.approx(alpha, abs=1e-9)


# ---- configuration --------------------------------------------------------------

def test_load_config_file_and_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# sweep\nlambda = 3\nop=P\np = inf\nq=1  # comment\nr=2\nnmax=257\n")
    cfg = load_config(path, r=3, a=None)
    assert cfg.lam == 3.0 and cfg.op == "P" and math.isinf(cfg.p) and cfg.q == 1.0
    assert cfg.r == 3 and cfg.a == 0.5 and cfg.nmax == 257


def test_load_config_rejects_unknown_and_malformed(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("colour = red\n")
    with pytest.raises(ValueError, match="unknown"):
        load_config(path)
    path.write_text("just words\n")
    with pytest.raises(ValueError, match="malformed"):
        load_config(path)


@pytest.mark.parametrize("kw, msg", [
    ({"op": "Z"}, "operator"), ({"r": 5}, "exceeds"), ({"d": 4}, "dimension"),
    ({"d": 2, "op": "Qbar"}, "one-dimensional"), ({"nmin": 100, "nmax": 50}, "nmin"),
    ({"p": 1, "q": "inf", "r": 1, "lam": 1.5}, "positive"),
])
def test_config_validation(kw, msg):
    with pytest.raises(ValueError, match=msg):
        ExperimentConfig(**kw).validate()


def test_quadrature_invariant_checked():
    # r_lambda - (1/lambda)(1 - 1/p) = 1 * (1/2) - 1/2 = 0 for r=1, p=inf
    with pytest.raises(ValueError, match="positive"):
        ExperimentConfig(op="quad-Q", r=1, p="inf").validate()


def test_predicted_exponents():
    assert ExperimentConfig(p=2, q=2, r=2).predicted() == pytest.approx(1.0)
    assert ExperimentConfig(op="quad-Q", p=1, r=2).predicted() == pytest.approx(1.0)
    assert ExperimentConfig(op="quad-Q", p=2, r=3).predicted() == pytest.approx(1.25)
    # 3 (1 - 1/2) - (1 - 1/2)(1 - 0)
    assert ExperimentConfig(p=1, q="inf", r=3).predicted() == pytest.approx(1.0)
    # 2 (1 - 1/2) - (1/2)(1 - 0)
    assert ExperimentConfig(p="inf", q=1, r=2).predicted() == pytest.approx(0.5)


def test_resolve_function_tensor():
    f = resolve_function(ExperimentConfig(d=2, r=2))
    assert len(f.factors) == 2
    x = np.array([0.3, -1.0])
    np.testing.assert_allclose(f(x, x), f.factors[0](x) ** 2)


# ---- sweeps -------------------------------------------------------------------------

def test_run_convergence_kink_recovery():
    rep = run_convergence(load_config(function="kink_2", r=2, op="Q"))
    assert rep.status == "ok" and rep.predicted == pytest.approx(1.0)
    assert [r["n"] for r in rep.rows] == n_grid(33, 4097)
    assert [r["m"] for r in rep.rows] == [n_to_m(r["n"]) for r in rep.rows]
    # x_+^2 e^{-x^2/2} lies in W^s_2 for every s < 5/2, so its slope is -5/4, not -1
    assert abs(rep.slope + 1.25) <= 0.25


def test_run_convergence_quadrature_p1():
    rep = run_convergence(load_config(op="quad-Q", p=1, r=2))
    assert rep.predicted == pytest.approx(1.0)
    assert abs(rep.slope + 1.0) <= 0.25 and rep.passed


def test_zero_errors_reported_exact(monkeypatch):
    import freudspline.bench as bench
    monkeypatch.setattr(bench, "_error_at", lambda *args: 0.0)
    rep = run_convergence(load_config(function="poly_3", r=2, op="Q", nmax=257))
    assert rep.status == "exact" and rep.slope is None and not rep.passed


def test_per_n_failure_recorded():
    rep = run_convergence(load_config(function="kink_2", r=2, nmin=5, nmax=65), ns=[5, 33, 65, 129])
    assert rep.status == "partial"
    assert rep.failures[0]["n"] == 5 and "too small" in rep.failures[0]["error"]
    assert len(rep.rows) == 3 and rep.slope is not None


def test_smooth_witness_saturation_guard():
    # gauss is declared infinitely smooth: slope may be steep but never beyond order 2 ell
    rep = run_convergence(load_config(function="gauss", r=4, op="Q", nmax=1025))
    assert rep.smooth
    assert rep.slope >= -(2 * 2) * (1 - 1 / 2) - 0.3


def test_rows_deterministic():
    cfg = load_config(function="kink_1", r=1, op="P", nmax=513)
    a = [(r["n"], r["m"], r["error"]) for r in run_convergence(cfg).rows]
    b = [(r["n"], r["m"], r["error"]) for r in run_convergence(cfg).rows]
    assert a == b


# ---- reports --------------------------------------------------------------------------

def test_emit_empty_report(tmp_path):
    paths = emit_report(RateReport({}), tmp_path / "empty.csv")
    assert paths["csv"].read_bytes() == b"n,m,error,seconds\n"
    summary = json.loads(paths["json"].read_text())
    assert summary["fitted_slope"] is None and summary["passed"] is False


def test_emit_three_rows(tmp_path):
    rep = RateReport({"q": math.inf}, rows=[{"n": n, "m": n // 2, "error": n ** -1.0, "seconds": 0.0}
                                            for n in (33, 65, 129)], slope=-1.0, predicted=1.0)
    paths = emit_report(rep, tmp_path / "three.csv")
    with open(paths["csv"], newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["n", "m", "error", "seconds"] and len(rows) == 4
    summary = json.loads(paths["json"].read_text())
    assert summary["passed"] and summary["predicted_exponent"] == 1.0
    assert summary["config"]["q"] == "inf"
    dat = paths["dat"].read_text().splitlines()
    assert dat[0].startswith("#") and len(dat) == 4 and len(dat[1].split()) == 2
    assert b"\r" not in paths["csv"].read_bytes()


def test_emit_round_trip_slope(tmp_path):
    rep = run_convergence(load_config(function="kink_1", r=1, op="Q", nmax=1025))
    paths = emit_report(rep, tmp_path / "rt.csv")
    rows = read_report_csv(paths["csv"])
    slope = fit_rate([(r["n"], r["error"]) for r in rows])
    assert abs(slope - rep.slope) < 1e-12


def test_emit_unwritable_path(tmp_path):
    target = tmp_path / "missing" / "x.csv"
    with pytest.raises(OSError, match="missing"):
        emit_report(RateReport({}), target)
