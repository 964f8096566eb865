import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from freudspline import (BlendedInterpolant, QuasiInterpolant, TensorInterpolant,
                         WeightedQuadrature, apply_P_truncated, apply_Q_bar, apply_Q_truncated,
                         get_corpus, integrate, make_config)
from freudspline.quadrature import build_rule
from freudspline.tensor import apply_Qd_truncated


@pytest.mark.parametrize("cls", [QuasiInterpolant, BlendedInterpolant, WeightedQuadrature,
                                 TensorInterpolant])
def test_clone_and_params(cls):
    est = cls(m=12, ell=1)
    params = est.get_params()
    assert params["m"] == 12 and params["ell"] == 1
    twin = clone(est)
    assert twin is not est and twin.get_params() == params
    est.set_params(m=20)
    assert est.m == 20


@pytest.mark.parametrize("cls, op", [(QuasiInterpolant, apply_Q_truncated),
                                     (BlendedInterpolant, apply_P_truncated)])
def test_fit_callable_matches_operator(cls, op):
    f = get_corpus("oscil")
    est = cls(m=16).fit(f)
    x = np.linspace(-3, 3, 41)
    ref = op(f, 16, make_config(ell=2))(x)
    np.testing.assert_allclose(est.predict(x), ref, rtol=0, atol=1e-15)
    np.testing.assert_allclose(est.predict(x[:, None]), ref, rtol=0, atol=1e-15)


def test_extended_quasi():
    f = get_corpus("gauss")
    est = QuasiInterpolant(m=16, extend=True).fit(f)
    assert est.n_samples_ == 2 * 16 + 1
    x = np.linspace(-2, 2, 17)
    np.testing.assert_allclose(est.predict(x), apply_Q_bar(f, 16, make_config(ell=2))(x),
                               atol=1e-15)


@pytest.mark.parametrize("cls", [QuasiInterpolant, BlendedInterpolant])
def test_fit_samples_equals_fit_callable(cls):
    f = get_corpus("kink_2")
    est = cls(m=10)
    nodes = est.required_nodes()
    rng = np.random.default_rng(4)
    perm = rng.permutation(len(nodes))
    a = clone(est).fit(nodes[perm], f(nodes)[perm])
    b = clone(est).fit(f)
    x = np.linspace(-2, 2, 23)
    np.testing.assert_array_equal(a.predict(x), b.predict(x))


def test_blended_interpolates():
    f = get_corpus("oscil")
    est = BlendedInterpolant(m=12).fit(f)
    xk = est.config_.grid(12).nodes(12)
    np.testing.assert_allclose(est.predict(xk), f(xk), atol=1e-12)


def test_bad_inputs():
    est = QuasiInterpolant(m=8)
    nodes = est.required_nodes()
    with pytest.raises(ValueError, match="y is required"):
        est.fit(nodes)
    with pytest.raises(ValueError, match="grid nodes"):
        est.fit(nodes[:-1], np.ones(len(nodes) - 1))
    with pytest.raises(ValueError, match="differ"):
        est.fit(nodes, np.ones(3))
    with pytest.raises(ValueError, match="single feature"):
        est.fit(np.c_[nodes, nodes], np.ones(len(nodes)))
    with pytest.raises(ValueError):
        est.fit(nodes, np.full(len(nodes), np.nan))
    with pytest.raises(NotFittedError):
        QuasiInterpolant().predict([0.0])


def test_weighted_quadrature_estimator():
    cfg = make_config(ell=2)
    est = WeightedQuadrature(kind="P", m=14).fit()
    rule = build_rule("P", 14, cfg)
    np.testing.assert_array_equal(est.weights_, rule.weights)
    f = get_corpus("oscil")
    assert est.integrate(f) == integrate(rule, f)
    assert est.integrate(f(est.nodes_)) == pytest.approx(integrate(rule, f), abs=1e-15)
    with pytest.raises(ValueError, match="expected"):
        est.integrate(np.ones(3))
    with pytest.raises(NotFittedError):
        WeightedQuadrature().integrate(f)


def test_tensor_estimator():
    cfg = make_config(ell=2)
    g = get_corpus("gauss")
    f = lambda x, y: g(x) * g(y)  # noqa: E731
    est = TensorInterpolant(d=2, m=6).fit(f)
    pts = np.random.default_rng(2).uniform(-2, 2, (20, 2))
    ref = apply_Qd_truncated(f, 2, 6, cfg)(pts[:, 0], pts[:, 1])
    np.testing.assert_allclose(est.predict(pts), ref, atol=1e-15)
    nodes = est.axis_nodes_
    F = g(nodes)[:, None] * g(nodes)[None, :]
    np.testing.assert_allclose(clone(est).fit(F).predict(pts), ref, atol=1e-15)
    with pytest.raises(ValueError, match="shape"):
        clone(est).fit(F[:-1])
    with pytest.raises(ValueError, match="columns"):
        est.predict(pts[:, :1])
    with pytest.raises(ValueError, match="kind"):
        TensorInterpolant(kind="Qbar").fit(f)
