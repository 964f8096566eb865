"""Equidistant B-spline series ``sum_s c_s M_n(x / step - s)`` with truncation."""

from __future__ import annotations

import numpy as np

from .bspline import PiecewisePolynomial, active_basis, refinement_mask


class SplineFunction:
    """A truncated spline ``x -> sum_s c_s M_n(x/step - s)`` on ``[-bound, bound]``.

    Parameters
    ----------
    step : float
        Knot spacing of the basis.
    coeffs : ndarray
        Coefficients for consecutive shifts ``s = first, first + 1, ...``.
    first : int
        Shift of ``coeffs[0]``.
    order : int
        Spline order ``n`` (even; degree ``n - 1``).
    bound : float or None
        Values outside ``[-bound, bound]`` are set to zero. ``None`` disables
        truncation.
    """

    def __init__(self, step, coeffs, first, order, bound=None, grid=None, n_samples=None):
        self.step = float(step)
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.first = int(first)
        self.order = int(order)
        self.bound = None if bound is None else float(bound)
        self.grid = grid
        self.n_samples = n_samples
        if self.order % 2:
            raise ValueError("SplineFunction uses even orders only")

    @property
    def last(self) -> int:
        return self.first + len(self.coeffs) - 1

    @property
    def support(self):
        half = self.order // 2
        lo = (self.first - half) * self.step
        hi = (self.last + half) * self.step
        if self.bound is not None:
            lo, hi = max(lo, -self.bound), min(hi, self.bound)
        return lo, hi

    @property
    def breakpoints(self) -> np.ndarray:
        lo, hi = self.support
        k0 = int(np.ceil(lo / self.step - 1e-9))
        k1 = int(np.floor(hi / self.step + 1e-9))
        pts = np.arange(k0, k1 + 1) * self.step
        return np.unique(np.concatenate([[lo], pts[(pts > lo) & (pts < hi)], [hi]]))

    def _window(self, x):
        t = np.asarray(x, dtype=float) / self.step
        k = np.floor(t)
        half = self.order // 2
        # active shifts s = k - half + 1 + i, i = 0..order-1
        start = k.astype(np.int64) - half + 1 - self.first
        return t - k, start

    def basis_values(self, x, deriv: int = 0):
        """Active basis values and the coefficient index of the first one."""
        u, start = self._window(x)
        vals = active_basis(u, self.order, deriv) / self.step ** deriv
        return vals, start

    def __call__(self, x, deriv: int = 0):
        x_arr = np.asarray(x, dtype=float)
        vals, start = self.basis_values(x_arr.ravel(), deriv)
        idx = start[:, None] + np.arange(self.order)
        ok = (idx >= 0) & (idx < len(self.coeffs))
        c = np.where(ok, self.coeffs[np.clip(idx, 0, len(self.coeffs) - 1)], 0.0)
        out = np.sum(vals * c, axis=1)
        if self.bound is not None:
            out[np.abs(x_arr.ravel()) > self.bound] = 0.0
        out = out.reshape(x_arr.shape)
        return float(out) if out.ndim == 0 else out

    evaluate = __call__

    def derivative(self, k: int = 1) -> "SplineDerivative":
        if k >= self.order:
            raise ValueError(f"derivative order must be < {self.order}")
        return SplineDerivative(self, k)

    def refine(self, levels: int = 1) -> "SplineFunction":
        """The same function written on a basis with step ``step / 2**levels``."""
        mask = refinement_mask(self.order)
        half = self.order // 2
        coeffs, first, step = self.coeffs, self.first, self.step
        for _ in range(levels):
            # c_s M(t - s) = sum_i mask[i] c_s M(2t - 2s - i + half)
            fine = np.zeros(2 * len(coeffs) - 1 + self.order)
            for i, mk in enumerate(mask):
                fine[i:i + 2 * len(coeffs) - 1:2] += mk * coeffs
            coeffs, first, step = fine, 2 * first - half, step / 2
        return SplineFunction(step, coeffs, first, self.order, self.bound,
                              grid=self.grid, n_samples=self.n_samples)

    def __add__(self, other):
        return _combine(self, other, 1.0)

    def __sub__(self, other):
        return _combine(self, other, -1.0)

    def __mul__(self, alpha):
        return SplineFunction(self.step, alpha * self.coeffs, self.first, self.order,
                              self.bound, grid=self.grid, n_samples=self.n_samples)

    __rmul__ = __mul__

    def coefficient(self, s: int) -> float:
        i = s - self.first
        return float(self.coeffs[i]) if 0 <= i < len(self.coeffs) else 0.0

    def to_piecewise(self) -> PiecewisePolynomial:
        """Exact piecewise-polynomial form over the knot intervals of the support."""
        return PiecewisePolynomial.from_function(self, self.breakpoints, self.order - 1)

    def __repr__(self):
        return (f"SplineFunction(order={self.order}, step={self.step:.6g}, "
                f"shifts={self.first}..{self.last}, bound={self.bound})")


class SplineDerivative:
    """``k``-th derivative of a :class:`SplineFunction` (right limits at knots)."""

    def __init__(self, spline: SplineFunction, k: int):
        self.spline = spline
        self.k = k
        self.breakpoints = spline.breakpoints
        self.support = spline.support

    def __call__(self, x):
        return self.spline(x, deriv=self.k)


def _combine(a: SplineFunction, b: SplineFunction, sign: float) -> SplineFunction:
    if a.order != b.order:
        raise ValueError("cannot add splines of different order")
    if a.bound != b.bound:
        raise ValueError("cannot add splines with different truncation")
    ratio = a.step / b.step
    lv = int(round(np.log2(ratio))) if ratio > 0 else 0
    if not np.isclose(2.0 ** lv, ratio, rtol=1e-12):
        raise ValueError("steps must differ by a power of two")
    if lv > 0:
        a = a.refine(lv)
    elif lv < 0:
        b = b.refine(-lv)
    first = min(a.first, b.first)
    last = max(a.last, b.last)
    out = np.zeros(last - first + 1)
    out[a.first - first:a.last - first + 1] += a.coeffs
    out[b.first - first:b.last - first + 1] += sign * b.coeffs
    return SplineFunction(a.step, out, first, a.order, a.bound, grid=a.grid)


def basis_matrix(x, step: float, first: int, count: int, order: int, deriv: int = 0):
    """Dense matrix ``B[i, j] = d^deriv/dx^deriv M(x_i/step - (first + j))``."""
    x = np.asarray(x, dtype=float).ravel()
    t = x / step
    k = np.floor(t)
    half = order // 2
    start = k.astype(np.int64) - half + 1 - first
    vals = active_basis(t - k, order, deriv) / step ** deriv
    B = np.zeros((len(x), count))
    rows = np.repeat(np.arange(len(x)), order)
    cols = (start[:, None] + np.arange(order)).ravel()
    ok = (cols >= 0) & (cols < count)
    np.add.at(B, (rows[ok], cols[ok]), vals.ravel()[ok])
    return B
