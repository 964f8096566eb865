"""scikit-learn style wrappers around the recovery operators and quadratures."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .quadrature import build_rule, integrate, sample_map
from .quasi import make_config, sample
from .spline import SplineFunction
from .tensor import TensorSpline, apply_axes, sample_tensor


def _config(est):
    return make_config(est.ell, est.lam, est.a, est.b, est.rho, est.coefficients)


def _column(X, name="X"):
    X = check_array(X, ensure_2d=False, dtype=float, input_name=name)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise ValueError(f"{name} must have a single feature, got shape {X.shape}")
        X = X[:, 0]
    return X


class _SplineRecovery(RegressorMixin, BaseEstimator):
    _kind = "Q"

    def __init__(self, m=32, ell=2, lam=2.0, a=0.5, b=0.0, rho=None, coefficients=None,
                 extend=False):
        self.m = m
        self.ell = ell
        self.lam = lam
        self.a = a
        self.b = b
        self.rho = rho
        self.coefficients = coefficients
        self.extend = extend

    @property
    def operator_kind(self):
        return self._kind + ("bar" if self.extend else "")

    def required_nodes(self) -> np.ndarray:
        """Sample locations ``fit`` expects, in increasing order."""
        cfg = _config(self)
        _, _, _, K = sample_map(self.operator_kind, cfg, self.m)
        return cfg.grid(self.m).nodes(K)

    def fit(self, X, y=None):
        """Fit from a callable ``X`` or from samples ``(X, y)`` at :meth:`required_nodes`."""
        cfg = _config(self)
        A, step, first, K = sample_map(self.operator_kind, cfg, self.m)
        nodes = cfg.grid(self.m).nodes(K)
        if callable(X) and y is None:
            vals = sample(X, nodes)
        else:
            if y is None:
                raise ValueError("y is required when X holds sample locations")
            x = _column(X)
            y = _column(y, "y")
            if len(x) != len(y):
                raise ValueError(f"X and y lengths differ: {len(x)} != {len(y)}")
            order = np.argsort(x)
            x, y = x[order], y[order]
            if len(x) != len(nodes) or not np.allclose(x, nodes, rtol=1e-9, atol=1e-12):
                raise ValueError(f"samples must be taken at the {len(nodes)} grid nodes "
                                 "returned by required_nodes()")
            vals = y
        self.config_ = cfg
        self.spline_ = SplineFunction(step, A @ vals, first, cfg.order, cfg.grid(self.m).bound,
                                      grid=cfg.grid(self.m), n_samples=len(vals))
        self.n_samples_ = len(vals)
        return self

    def predict(self, X):
        check_is_fitted(self, "spline_")
        return np.asarray(self.spline_(_column(X)), dtype=float)


class QuasiInterpolant(_SplineRecovery):
    """Truncated quasi-interpolant; ``extend=True`` uses only ``2m + 1`` samples.

    Examples
    --------
    >>> import numpy as np
    >>> est = QuasiInterpolant(m=16).fit(lambda x: 1.0 + x)
    >>> round(float(est.predict(np.array([0.5]))[0]), 12)
    1.5
    """

    _kind = "Q"


class BlendedInterpolant(_SplineRecovery):
    """Truncated blended interpolant; interpolates at ``x_k``, ``|k| <= m``."""

    _kind = "P"


class WeightedQuadrature(BaseEstimator):
    """Generated weighted quadrature rule (``kind`` in ``Q, P, Qbar, Pbar``)."""

    def __init__(self, kind="Q", m=32, ell=2, lam=2.0, a=0.5, b=0.0, rho=None, coefficients=None):
        self.kind = kind
        self.m = m
        self.ell = ell
        self.lam = lam
        self.a = a
        self.b = b
        self.rho = rho
        self.coefficients = coefficients

    def fit(self, X=None, y=None):
        self.rule_ = build_rule(self.kind, self.m, _config(self))
        self.nodes_ = self.rule_.nodes
        self.weights_ = self.rule_.weights
        return self

    def integrate(self, f):
        """Apply the rule to a callable or to values at ``nodes_``."""
        check_is_fitted(self, "rule_")
        if callable(f):
            return integrate(self.rule_, f)
        vals = _column(f, "f")
        if len(vals) != len(self.nodes_):
            raise ValueError(f"expected {len(self.nodes_)} values, got {len(vals)}")
        return float(np.sum(self.weights_ * vals))


class TensorInterpolant(BaseEstimator):
    """``d``-variate tensor-product recovery (``kind`` is ``Q`` or ``P``)."""

    def __init__(self, d=2, kind="Q", m=16, ell=2, lam=2.0, a=0.5, b=0.0, rho=None,
                 coefficients=None):
        self.d = d
        self.kind = kind
        self.m = m
        self.ell = ell
        self.lam = lam
        self.a = a
        self.b = b
        self.rho = rho
        self.coefficients = coefficients

    def fit(self, X, y=None):
        """Fit from a ``d``-argument callable or a sample tensor on the axis nodes."""
        if self.kind not in ("Q", "P"):
            raise ValueError(f"kind must be 'Q' or 'P', got {self.kind!r}")
        cfg = _config(self)
        A, step, first, K = sample_map(self.kind, cfg, self.m)
        nodes = cfg.grid(self.m).nodes(K)
        if callable(X):
            F = sample_tensor(X, self.d, nodes)
        else:
            F = np.asarray(X, dtype=float)
            if F.shape != (len(nodes),) * self.d:
                raise ValueError(f"sample tensor must have shape {(len(nodes),) * self.d}")
        self.spline_ = TensorSpline(step, apply_axes(F, A), first, cfg.order,
                                    cfg.grid(self.m).bound, n_samples=F.size)
        self.axis_nodes_ = nodes
        return self

    def predict(self, X):
        check_is_fitted(self, "spline_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.d:
            raise ValueError(f"X must have {self.d} columns")
        return self.spline_(*X.T)
