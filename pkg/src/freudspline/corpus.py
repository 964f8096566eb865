"""Test functions with analytic derivatives and known smoothness.

Every function is stored as ``f(x) = G(x) exp(c |x|**mu)`` where ``G`` is a
sympy expression valid for ``x > 0`` (or on the whole line), together with a
parity rule that extends it to ``x < 0``.  Derivatives of ``G exp(c|x|**mu)``
are again of that form, so products with a Freud weight are evaluated
without forming ``exp(c|x|**mu)`` on its own.
"""

from __future__ import annotations

import math
import re
from functools import cached_property

import numpy as np
import sympy as sp

from .weight import FreudWeight, rate_exponent

_X = sp.Symbol("x", positive=True)
_XR = sp.Symbol("x", real=True)


class CorpusFunction:
    """A univariate test function with exact derivatives.

    Parameters
    ----------
    name : str
        Identifier, e.g. ``"kink_2"``.
    expr : sympy expression
        ``G(x)``; in ``x > 0`` unless ``parity == "none"``.
    parity : {"none", "even", "zero"}
        ``"none"``: ``expr`` holds on all of R. ``"even"``: ``f(-x) = f(x)``.
        ``"zero"``: ``f = 0`` on ``x <= 0``.
    exp_coef, exp_pow : float
        Factor ``exp(exp_coef * |x|**exp_pow)`` multiplying ``G``.
    smoothness : float
        Largest ``r`` with ``f`` in ``W^r_{p,w}`` for the ``p`` it was built for
        (``inf`` for analytic functions).
    singular_points : tuple
        Points where ``f`` is not smooth.
    """

    vectorized = True

    def __init__(self, name, expr, parity="none", exp_coef=0.0, exp_pow=2.0,
                 smoothness=math.inf, singular_points=(), description="", k=0, root=None):
        if parity not in ("none", "even", "zero"):
            raise ValueError(f"unknown parity {parity!r}")
        self.name = name
        self.expr = expr
        self.parity = parity
        self.exp_coef = float(exp_coef)
        self.exp_pow = float(exp_pow)
        self.smoothness = smoothness
        self.singular_points = tuple(singular_points)
        self.description = description
        self.order = k
        self._root = root if root is not None else self

    @cached_property
    def _g(self):
        sym = _XR if self.parity == "none" else _X
        return sp.lambdify(sym, self.expr, "numpy")

    def derivative(self, k: int = 1) -> "CorpusFunction":
        """The ``k``-th derivative as another :class:`CorpusFunction`."""
        if k < 0:
            raise ValueError("derivative order must be non-negative")
        expr = self.expr
        sym = _XR if self.parity == "none" else _X
        for _ in range(k):
            # (G e^{c x^mu})' = (G' + c mu x^{mu-1} G) e^{c x^mu} for x > 0
            extra = self.exp_coef * self.exp_pow * sym ** (self.exp_pow - 1) * expr if self.exp_coef else 0
            expr = sp.simplify(sp.diff(expr, sym) + extra) if self.parity != "none" else sp.diff(expr, sym)
        return CorpusFunction(f"{self.name}^({self.order + k})", expr, self.parity, self.exp_coef,
                              self.exp_pow, self.smoothness, self.singular_points,
                              self.description, self.order + k, self._root)

    def _core(self, x):
        """``(G(|x|) * parity sign, |x|)``."""
        x = np.asarray(x, dtype=float)
        if self.parity == "none":
            out = np.asarray(self._g(x), dtype=float)
            return np.broadcast_to(out, x.shape).astype(float), np.abs(x)
        ax = np.abs(x)
        safe = np.where(ax > 0, ax, 1.0)
        with np.errstate(all="ignore"):
            vals = np.asarray(self._g(safe), dtype=float)
            vals = np.broadcast_to(vals, x.shape).astype(float)
            if self.parity == "even":
                vals = vals * np.where(x < 0, (-1.0) ** self.order, 1.0)
                at0 = float(sp.limit(self.expr, _X, 0, "+")) if self.order % 2 == 0 else 0.0
                vals = np.where(ax > 0, vals, at0)
            else:
                vals = np.where(x > 0, vals, 0.0)
        return vals, ax

    def __call__(self, x):
        vals, ax = self._core(x)
        if self.exp_coef:
            vals = vals * np.exp(self.exp_coef * ax ** self.exp_pow)
        return float(vals) if np.ndim(vals) == 0 else vals

    def times_weight(self, x, w: FreudWeight):
        """``f(x) w(x)`` evaluated with the exponents combined."""
        vals, ax = self._core(x)
        expo = -w.a * ax ** w.lam + w.b
        if self.exp_coef:
            expo = expo + self.exp_coef * ax ** self.exp_pow
        return vals * np.exp(expo)

    def __repr__(self):
        return f"CorpusFunction({self.name!r})"


def gauss() -> CorpusFunction:
    return CorpusFunction("gauss", sp.exp(-_XR ** 2 / 2), description="exp(-x^2/2)")


def oscil() -> CorpusFunction:
    return CorpusFunction("oscil", sp.cos(3 * _XR) * sp.exp(-_XR ** 2 / 4),
                          description="cos(3x) exp(-x^2/4)")


def poly(k: int) -> CorpusFunction:
    """Probabilists' Hermite polynomial ``He_k``."""
    expr = sp.hermite_prob(k, _XR) if hasattr(sp, "hermite_prob") else \
        sp.expand(2 ** sp.Rational(-k, 2) * sp.hermite(k, _XR / sp.sqrt(2)))
    return CorpusFunction(f"poly_{k}", sp.expand(expr), description=f"He_{k}(x)")


def kink(nu, p=math.inf) -> CorpusFunction:
    """``x_+**nu exp(-x^2/2)``: in ``W^r_{p,w}`` exactly when ``r < nu + 1/p``."""
    nu_s = sp.nsimplify(nu)
    if p == math.inf:
        smooth = math.floor(nu)
    else:
        smooth = math.ceil(nu + 1.0 / p) - 1
    return CorpusFunction(f"kink_{_fmt(nu)}", _X ** nu_s * sp.exp(-_X ** 2 / 2), "zero",
                          smoothness=smooth, singular_points=(0.0,),
                          description=f"x_+^{_fmt(nu)} exp(-x^2/2)")


def heavy(beta, w: FreudWeight, p=math.inf) -> CorpusFunction:
    """``(1 + x^2)**(-beta) / w(x)`` up to the factor ``e**b``.

    Its weighted product decays only algebraically, which makes it the
    extremal type of function when ``p > q``.
    """
    b = sp.nsimplify(beta)
    singular = (0.0,) if not float(w.lam).is_integer() or int(w.lam) % 2 else ()
    # f^(k) w ~ |x|^(k(lam-1) - 2 beta): bounded while k(lam-1) <= 2 beta and
    # p-integrable while p(2 beta - k(lam-1)) > 1
    if p == math.inf:
        smooth = math.floor(2.0 * beta / (w.lam - 1.0) + 1e-12)
    else:
        smooth = math.ceil((2.0 * beta - 1.0 / p) / (w.lam - 1.0) - 1e-12) - 1
    return CorpusFunction(f"heavy_{_fmt(beta)}", (1 + _X ** 2) ** (-b), "even",
                          exp_coef=w.a, exp_pow=w.lam, singular_points=singular, smoothness=smooth,
                          description=f"(1+x^2)^(-{_fmt(beta)}) exp({w.a:g}|x|^{w.lam:g})")


def _fmt(v):
    v = float(v)
    return str(int(v)) if v.is_integer() else f"{v:g}"


def heavy_integral(beta: float, q: float = 1.0) -> float:
    """``int_R (1 + x^2)**(-beta q) dx`` in closed form."""
    s = beta * q
    return math.sqrt(math.pi) * math.exp(math.lgamma(s - 0.5) - math.lgamma(s))


def get_corpus(name: str, w: FreudWeight | None = None, p=math.inf) -> CorpusFunction:
    """Look up a function by id: ``gauss``, ``oscil``, ``poly_K``, ``kink_NU``, ``heavy_BETA``."""
    w = w or FreudWeight()
    if name == "gauss":
        return gauss()
    if name == "oscil":
        return oscil()
    m = re.fullmatch(r"(poly|kink|heavy)_([0-9.]+)", name)
    if not m:
        raise KeyError(f"unknown corpus function {name!r}")
    kind, val = m.group(1), float(m.group(2))
    if kind == "poly":
        return poly(int(val))
    if kind == "kink":
        return kink(val, p)
    return heavy(val, w, p)


def witness(r: int, p, q, w: FreudWeight, kind: str = "recovery") -> CorpusFunction:
    """A function of smoothness exactly ``r`` whose error decays at the extremal rate.

    For ``p <= q`` the worst case is a local singularity (``kink``); for
    ``p > q`` it is slow weighted decay at infinity (``heavy``).  Quadrature
    errors are driven by the tail, so ``heavy`` is used for every ``p``.
    """
    p, q = float(p), float(q)
    if kind == "recovery" and p <= q:
        nu = float(r) if math.isinf(p) else r - 1.0 / p + 0.1
        return kink(round(nu, 10), p)
    if kind not in ("recovery", "quadrature"):
        raise ValueError(f"unknown kind {kind!r}")
    tail = r * (w.lam - 1.0)
    beta = tail / 2.0 if math.isinf(p) else (tail + 1.0 / p) / 2.0 + 0.05
    return heavy(round(beta, 10), w, p)


def predicted_exponent(r, p, q, w: FreudWeight, kind="recovery", d=1) -> float:
    return rate_exponent(r, p, q, w.lam, kind=kind, d=d)
