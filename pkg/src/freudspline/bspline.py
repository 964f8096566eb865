"""Centered cardinal B-splines, their derivatives, and small polynomial helpers.

``M_n`` denotes the cardinal B-spline of order ``n`` (degree ``n - 1``) centred
at the origin, so its support is ``[-n/2, n/2]``.  Point values at knots are
right limits, which matters only for the discontinuous order-1 spline.
"""

from __future__ import annotations

from math import comb

import numpy as np

SUPPORTED_ORDERS = (2, 4, 6, 8)


def active_basis(u, n: int, deriv: int = 0) -> np.ndarray:
    """Values of the ``n`` B-splines of order ``n`` that are active on ``[k, k+1)``.

    Knots are the integers and ``u = y - k`` is the offset inside the interval.
    Column ``i`` holds ``N_{k-n+1+i}`` (knots ``k-n+1+i .. k+1+i``) at ``y``.
    With ``deriv > 0`` the ``deriv``-th derivatives are returned instead.
    """
    u = np.asarray(u, dtype=float)
    if deriv >= n:
        raise ValueError("derivative order must be below the spline order")
    low = n - deriv
    b = np.ones(u.shape + (1,))
    for d in range(1, low):
        # new[i] = ((u + d - i) old[i-1] + (i + 1 - u) old[i]) / d
        i = np.arange(d + 1)
        left = np.zeros(u.shape + (d + 1,))
        right = np.zeros(u.shape + (d + 1,))
        left[..., 1:] = b
        right[..., :-1] = b
        uu = u[..., None]
        b = ((uu + d - i) * left + (i + 1 - uu) * right) / d
    if deriv == 0:
        return b
    # N^{(r)}_{j,n} = sum_k (-1)^k C(r,k) N_{j+k,n-r}; lower-order values sit
    # at offsets deriv .. n-1 of the order-n window.
    out = np.zeros(u.shape + (n,))
    for k in range(deriv + 1):
        coef = (-1) ** k * comb(deriv, k)
        # lower basis column c corresponds to window index c + deriv; we need
        # N_{j+k} for window index i, i.e. lower column i + k - deriv.
        lo_i = max(0, deriv - k)
        hi_i = min(n, low + deriv - k)
        out[..., lo_i:hi_i] += coef * b[..., lo_i + k - deriv:hi_i + k - deriv]
    return out


def _centered(x, n: int, deriv: int = 0) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = x + n / 2.0
    k = np.floor(y)
    idx = (n - 1 - k).astype(int)
    inside = (k >= 0) & (k <= n - 1)
    vals = active_basis(y - k, n, deriv)
    out = np.zeros_like(x)
    if np.any(inside):
        out[inside] = np.take_along_axis(vals[inside], idx[inside][:, None], axis=-1)[:, 0]
    return out


def cardinal_bspline(x, n: int, deriv: int = 0):
    """Centered cardinal B-spline of any order ``n >= 1`` (or its derivative)."""
    if n < 1:
        raise ValueError("order must be >= 1")
    if deriv < 0 or deriv >= n:
        raise ValueError(f"derivative order must be in [0, {n - 1}], got {deriv}")
    out = _centered(np.atleast_1d(x), n, deriv)
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


def _check_order(two_ell: int):
    if two_ell not in SUPPORTED_ORDERS:
        raise ValueError(f"order must be one of {SUPPORTED_ORDERS}, got {two_ell!r}")


def bspline_eval(x, two_ell: int):
    """``M_{2 ell}(x)``, supported on ``[-ell, ell]``."""
    _check_order(two_ell)
    return cardinal_bspline(x, two_ell)


def bspline_derivative(x, two_ell: int, order: int):
    """Derivative of ``M_{2 ell}``; one-sided (right) values at knots."""
    _check_order(two_ell)
    if order < 0 or order >= two_ell:
        raise ValueError(f"derivative order must be < {two_ell}, got {order}")
    return cardinal_bspline(x, two_ell, order)


def knot_values(n: int) -> np.ndarray:
    """``M_n(j)`` at the integers ``j = -(n/2 - 1) .. n/2 - 1`` (even ``n``)."""
    half = n // 2
    return cardinal_bspline(np.arange(-half + 1, half, dtype=float), n)


def refinement_mask(n: int) -> np.ndarray:
    """Two-scale mask: ``M_n(t) = sum_i mask[i] M_n(2t - i + n/2)`` for even ``n``."""
    return np.array([comb(n, i) for i in range(n + 1)], dtype=float) / 2.0 ** (n - 1)


class BarycentricPolynomial:
    """Interpolating polynomial through ``(nodes, values)`` in barycentric form."""

    def __init__(self, nodes, values):
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape[:1]:
            raise ValueError("nodes must be 1-D and match the leading axis of values")
        if len(np.unique(nodes)) != len(nodes):
            raise ValueError("interpolation nodes must be pairwise distinct")
        self.nodes = nodes
        self.values = values
        diff = nodes[:, None] - nodes[None, :]
        np.fill_diagonal(diff, 1.0)
        self.weights = 1.0 / np.prod(diff, axis=1)

    @property
    def degree(self) -> int:
        return len(self.nodes) - 1

    def basis(self, x) -> np.ndarray:
        """Lagrange basis values, shape ``x.shape + (len(nodes),)``."""
        x = np.asarray(x, dtype=float)
        d = x[..., None] - self.nodes
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            t = self.weights / d
            out = t / t.sum(axis=-1, keepdims=True)
        # x on (or within overflow distance of) a node: the basis is an indicator
        hit = ~np.isfinite(t).all(axis=-1)
        if np.any(hit):
            nearest = np.argmin(np.abs(d[hit]), axis=-1)
            out[hit] = np.eye(len(self.nodes))[nearest]
        return out

    def __call__(self, x):
        out = self.basis(x) @ self.values
        return float(out) if np.ndim(out) == 0 else out


def lagrange_extension(nodes, values) -> BarycentricPolynomial:
    """The unique polynomial of degree ``< len(nodes)`` through the given samples."""
    return BarycentricPolynomial(nodes, values)


class PiecewisePolynomial:
    """Piecewise polynomial in local power form, zero outside its breakpoints.

    ``coeffs[i, j]`` multiplies ``(x - breakpoints[i])**j`` on interval ``i``.
    """

    def __init__(self, breakpoints, coeffs):
        self.breakpoints = np.asarray(breakpoints, dtype=float)
        self.coeffs = np.asarray(coeffs, dtype=float)
        if self.coeffs.shape[0] != len(self.breakpoints) - 1:
            raise ValueError("need one coefficient row per interval")
        if np.any(np.diff(self.breakpoints) <= 0):
            raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def from_function(cls, func, breakpoints, degree: int):
        """Recover the local polynomials of ``func`` by interpolation at Chebyshev points."""
        bp = np.asarray(breakpoints, dtype=float)
        k = np.arange(degree + 1)
        cheb = 0.5 - 0.5 * np.cos((2 * k + 1) * np.pi / (2 * degree + 2))
        widths = np.diff(bp)
        local = cheb[None, :] * widths[:, None]
        vals = np.asarray(func(bp[:-1, None] + local), dtype=float)
        coeffs = np.empty((len(widths), degree + 1))
        for i in range(len(widths)):
            V = np.vander(local[i], degree + 1, increasing=True)
            coeffs[i] = np.linalg.solve(V, vals[i])
        return cls(bp, coeffs)

    @property
    def support(self):
        return self.breakpoints[0], self.breakpoints[-1]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        inside = (idx >= 0) & (idx < len(self.coeffs))
        # the right end point belongs to the last interval
        at_end = x == self.breakpoints[-1]
        idx = np.where(at_end, len(self.coeffs) - 1, idx)
        inside |= at_end
        out = np.zeros_like(x)
        i = idx[inside]
        dx = x[inside] - self.breakpoints[i]
        c = self.coeffs[i]
        acc = c[:, -1].copy()
        for j in range(c.shape[1] - 2, -1, -1):
            acc = acc * dx + c[:, j]
        out[inside] = acc
        return float(out) if out.ndim == 0 else out

    def integral(self) -> float:
        """Exact integral over the support."""
        widths = np.diff(self.breakpoints)
        j = np.arange(self.coeffs.shape[1])
        return float(np.sum(self.coeffs * widths[:, None] ** (j + 1) / (j + 1)))

    def power(self, k: int) -> "PiecewisePolynomial":
        out = np.zeros((len(self.coeffs), 1))
        out[:, 0] = 1.0
        for _ in range(k):
            prod = np.zeros((len(self.coeffs), out.shape[1] + self.coeffs.shape[1] - 1))
            for i in range(len(self.coeffs)):
                prod[i] = np.convolve(out[i], self.coeffs[i])
            out = prod
        return PiecewisePolynomial(self.breakpoints, out)
