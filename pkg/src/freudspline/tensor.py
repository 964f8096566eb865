"""Tensor-product recovery and quadrature for ``d <= 3``.

The ``d``-variate operators apply the univariate sample-to-coefficient map
along every axis of the sample tensor.  Weighted norms on ``R^d`` use tensor
products of one-dimensional panel rules, split into the truncation box and
the ``3**d - 1`` regions around it.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .analysis import _sign_change_edges, core_scale, gauss_legendre
from .blend import blend_matrix
from .bspline import active_basis
from .quadrature import build_rule
from .quasi import RecoveryConfig, SamplingError, quasi_matrix
from .weight import FreudWeight

MAX_DIM = 3


def _check_dim(d):
    if d not in (1, 2, 3):
        raise ValueError(f"unsupported dimension d={d}; expected 1, 2 or 3")


class SeparableFunction:
    """``f(x_1, ..., x_d) = prod_i g_i(x_i)``."""

    vectorized = True

    def __init__(self, *factors):
        self.factors = factors

    @property
    def d(self):
        return len(self.factors)

    def __call__(self, *xs):
        out = 1.0
        for g, x in zip(self.factors, xs):
            out = out * np.asarray(g(x), dtype=float)
        return out

    def times_weight(self, xs, w: FreudWeight):
        out = 1.0
        for g, x in zip(self.factors, xs):
            gw = g.times_weight(x, w) if hasattr(g, "times_weight") else g(x) * w(x)
            out = out * gw
        return out


def sample_tensor(f, d: int, nodes) -> np.ndarray:
    """``f`` on the tensor grid ``nodes x ... x nodes``; ``f`` takes ``d`` broadcastable arrays."""
    _check_dim(d)
    grids = np.meshgrid(*([np.asarray(nodes, dtype=float)] * d), indexing="ij")
    try:
        vals = np.asarray(f(*grids), dtype=float)
        vals = np.broadcast_to(vals, grids[0].shape).copy()
    except SamplingError:
        raise
    except Exception as exc:
        raise SamplingError("tensor grid", exc) from exc
    if not np.all(np.isfinite(vals)):
        idx = np.unravel_index(np.argmax(~np.isfinite(vals)), vals.shape)
        raise SamplingError(tuple(float(g[idx]) for g in grids), "non-finite value")
    return vals


def mode_product(T: np.ndarray, A, axis: int) -> np.ndarray:
    """Apply the (sparse) matrix ``A`` along ``axis`` of ``T``."""
    Tm = np.moveaxis(T, axis, 0)
    shape = Tm.shape
    out = A @ Tm.reshape(shape[0], -1)
    return np.moveaxis(np.asarray(out).reshape((A.shape[0],) + shape[1:]), 0, axis)


def apply_axes(T, A, axes=None):
    axes = range(T.ndim) if axes is None else axes
    for ax in axes:
        T = mode_product(T, A, ax)
    return T


class TensorSpline:
    """``sum_s c_s prod_i M(x_i/step - s_i)``, zero outside ``[-bound, bound]^d``."""

    def __init__(self, step, coeffs, first, order, bound, n_samples=None):
        self.step = float(step)
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.first = int(first)
        self.order = int(order)
        self.bound = float(bound)
        self.n_samples = n_samples

    @property
    def d(self):
        return self.coeffs.ndim

    def axis_breakpoints(self):
        k = int(round(self.bound / self.step))
        return np.arange(-k, k + 1) * self.step

    def axis_basis(self, x):
        """Dense ``(len(x), count)`` matrix of axis basis values."""
        from .spline import basis_matrix

        return basis_matrix(x, self.step, self.first, self.coeffs.shape[0], self.order)

    def on_grid(self, *axes_pts) -> np.ndarray:
        """Values on the tensor grid of the given per-axis points."""
        T = self.coeffs
        for ax, x in enumerate(axes_pts):
            x = np.asarray(x, dtype=float)
            B = self.axis_basis(x)
            B[np.abs(x) > self.bound] = 0.0
            T = mode_product(T, B, ax)
        return T

    def __call__(self, *xs):
        """Pointwise values; ``xs`` are ``d`` broadcastable coordinate arrays."""
        xs = np.broadcast_arrays(*[np.asarray(x, dtype=float) for x in xs])
        if len(xs) != self.d:
            raise ValueError(f"expected {self.d} coordinates")
        shape = xs[0].shape
        flat = [x.ravel() for x in xs]
        half = self.order // 2
        vals, starts = [], []
        for x in flat:
            t = x / self.step
            k = np.floor(t)
            vals.append(active_basis(t - k, self.order))
            starts.append(k.astype(np.int64) - half + 1 - self.first)
        out = np.zeros(len(flat[0]))
        n = self.coeffs.shape[0]
        for combo in itertools.product(range(self.order), repeat=self.d):
            idx = [s + c for s, c in zip(starts, combo)]
            ok = np.ones(len(out), dtype=bool)
            for i in idx:
                ok &= (i >= 0) & (i < n)
            weight = np.ones(len(out))
            for v, c in zip(vals, combo):
                weight = weight * v[:, c]
            safe = tuple(np.clip(i, 0, n - 1) for i in idx)
            out += np.where(ok, weight * self.coeffs[safe], 0.0)
        inside = np.ones(len(out), dtype=bool)
        for x in flat:
            inside &= np.abs(x) <= self.bound
        out[~inside] = 0.0
        out = out.reshape(shape)
        return float(out) if out.ndim == 0 else out


def _operator(kind, cfg, m):
    grid = cfg.grid(m)
    if kind == "Q":
        return quasi_matrix(cfg, m), grid.h, -(m + cfg.ell - 1)
    if kind == "P":
        A, first, scale = blend_matrix(cfg, m)
        return A, grid.h / scale, first
    raise ValueError(f"unknown operator {kind!r}")


def _apply(kind, f, d, m, cfg, axes=None):
    _check_dim(d)
    grid = cfg.grid(m)
    F = sample_tensor(f, d, grid.nodes(cfg.sample_radius(m)))
    A, step, first = _operator(kind, cfg, m)
    C = apply_axes(F, A, axes)
    return TensorSpline(step, C, first, cfg.order, grid.bound, n_samples=F.size)


def apply_Qd_truncated(f, d: int, m: int, cfg: RecoveryConfig, axes=None) -> TensorSpline:
    """Tensor quasi-interpolant from ``(2(m + ell + j0) - 1)**d`` samples."""
    return _apply("Q", f, d, m, cfg, axes)


def apply_Pd_truncated(f, d: int, m: int, cfg: RecoveryConfig, axes=None) -> TensorSpline:
    """Tensor blended interpolant; interpolates at the nodes with ``|k_i| <= m``."""
    return _apply("P", f, d, m, cfg, axes)


def tensor_rule(kind: str, d: int, m: int, cfg: RecoveryConfig):
    """Nodes (1-D) and the weight tensor ``prod_i lambda_{s_i}``."""
    _check_dim(d)
    rule = build_rule(kind, m, cfg)
    W = rule.weights
    for _ in range(d - 1):
        W = np.multiply.outer(W, rule.weights)
    return rule.nodes, W


def integrate_d(kind: str, f, d: int, m: int, cfg: RecoveryConfig) -> float:
    """Tensor-product generated rule applied to ``f``."""
    nodes, W = tensor_rule(kind, d, m, cfg)
    F = sample_tensor(f, d, nodes)
    return math.fsum((W * F).ravel())


def node_count(d: int, m: int, cfg: RecoveryConfig) -> int:
    return (2 * (m + cfg.ell + cfg.j0) - 1) ** d


# ---------------------------------------------------------------------------
# d-dimensional weighted norms


def axis_rule(lo, hi, breakpoints=(), order=16, max_width=None):
    """Fixed composite Gauss-Legendre nodes and weights on ``[lo, hi]``."""
    bp = np.asarray(breakpoints, dtype=float)
    edges = np.unique(np.concatenate([[lo, hi], bp[(bp > lo) & (bp < hi)]]))
    if max_width is not None:
        widths = np.diff(edges)
        nsub = np.maximum(1, np.ceil(widths / max_width).astype(int))
        parts = [edges[i] + widths[i] * np.arange(nsub[i]) / nsub[i] for i in range(len(widths))]
        edges = np.concatenate(parts + [[edges[-1]]])
    u, gw = gauss_legendre(order)
    width = np.diff(edges)
    x = (edges[:-1, None] + width[:, None] * u).ravel()
    wts = (width[:, None] * gw).ravel()
    return x, wts


def _weighted(f, xs, w):
    if hasattr(f, "times_weight"):
        return f.times_weight(xs, w)
    val = np.asarray(f(*xs), dtype=float)
    for x in xs:
        val = val * w(x)
    return val


def _grid_sum(func, rules, chunk=None):
    """``sum_{i} prod_k wts_k[i_k] func(x_1[i_1], ..., x_d[i_d])`` in row chunks."""
    d = len(rules)
    chunk = chunk or _chunk_rows([r[0] for r in rules])
    x0, w0 = rules[0]
    total = []
    for start in range(0, len(x0), chunk):
        xs = [x0[start:start + chunk].reshape((-1,) + (1,) * (d - 1))]
        W = w0[start:start + chunk].reshape((-1,) + (1,) * (d - 1))
        for k in range(1, d):
            shape = [1] * d
            shape[k] = -1
            xs.append(rules[k][0].reshape(shape))
            W = W * rules[k][1].reshape(shape)
        total.append(float(np.sum(W * func(xs))))
    return math.fsum(total)


def _factor_roots(f, lo, hi, w, count=4096):
    """Sign changes of the factors of a separable ``f`` (kinks of ``|f|``)."""
    factors = getattr(f, "factors", ())
    edges = np.linspace(lo, hi, count + 1)
    roots = []
    for g in factors:
        fn = (lambda x, g=g: g.times_weight(x, w)) if hasattr(g, "times_weight") else g
        found = _sign_change_edges(fn, edges)
        roots.append(np.setdiff1d(found, edges))
    return np.concatenate(roots) if roots else np.array([])


# Gauss-Legendre points per panel (core, tails); fewer in 3-D to bound the grid size
AXIS_ORDERS = {1: (16, 16), 2: (16, 16), 3: (8, 6)}


def _regions(bound, w, breakpoints, extra_breaks, order=16, f=None, tail_order=None):
    scale = core_scale(w)
    bp = np.concatenate([np.asarray(breakpoints, float), np.asarray(extra_breaks, float)])
    if f is not None:
        bp = np.concatenate([bp, _factor_roots(f, -bound, bound, w)])
    core = axis_rule(-bound, bound, bp, order, max_width=0.25 * scale)
    tails = []
    for sign in (-1, 1):
        edges = sign * bound + sign * scale * (2.0 ** np.arange(49) - 1.0)
        lo, hi = min(edges[0], edges[-1]), max(edges[0], edges[-1])
        extra = _factor_roots(f, lo, min(hi, lo + 64 * scale), w, 1024) if f is not None else []
        tails.append(axis_rule(lo, hi, np.concatenate([edges, extra]), tail_order or order))
    return core, tails[0], tails[1]


def weighted_lq_norm_d(f, q, d: int, w: FreudWeight, bound: float | None = None,
                       breakpoints=(), order=None) -> float:
    """``||f||_{L_{q,w}(R^d)}`` with the product weight ``prod_i w(x_i)``."""
    _check_dim(d)
    bound = 4.0 * core_scale(w) if bound is None else bound
    sing = getattr(f, "singular_points", ()) or ()
    split = not (float(q).is_integer() and int(q) % 2 == 0) and not math.isinf(float(q))
    order, tail_order = AXIS_ORDERS[d] if order is None else (order, order)
    core, left, right = _regions(bound, w, breakpoints, sing, order, f if split else None,
                                 tail_order)
    if math.isinf(float(q)):
        # scan density drops with d to keep the grid bounded
        per = {1: 64, 2: 16, 3: 4}[d]
        pts = np.concatenate([_scan_points(bound, w, np.concatenate([breakpoints, sing]), per),
                              _tail_scan(bound, w, per)])
        return _sup_grid(lambda xs: _weighted(f, xs, w), [pts] * d)
    g = lambda xs: np.abs(_weighted(f, xs, w)) ** q
    total = math.fsum(_grid_sum(g, list(combo))
                      for combo in itertools.product((left, core, right), repeat=d))
    return total ** (1.0 / q)


def _scan_points(bound, w, extra=(), per=64):
    """Uniform scan of ``[-bound, bound]``: ``per`` points per quarter core scale plus ``extra``."""
    n = max(1, int(math.ceil(2 * bound / (0.25 * core_scale(w))))) * per
    pts = np.concatenate([np.linspace(-bound, bound, n + 1), [0.0], np.asarray(extra, float)])
    return np.unique(pts[np.abs(pts) <= bound])


def _tail_scan(bound, w, per):
    """Geometric scan of both tails: ``per // 4 + 1`` points per doubling, 48 doublings."""
    k = np.arange(1, 48 * (per // 4 + 1) + 1) / (per // 4 + 1)
    t = bound + core_scale(w) * (2.0 ** k - 1.0)
    return np.concatenate([-t[::-1], t])


def _chunk_rows(pts, budget=2 ** 21):
    other = int(np.prod([len(p) for p in pts[1:]])) if len(pts) > 1 else 1
    return max(1, budget // max(other, 1))


def _sup_grid(func, pts, chunk=None):
    best = 0.0
    x0 = pts[0]
    d = len(pts)
    chunk = chunk or _chunk_rows(pts)
    for start in range(0, len(x0), chunk):
        xs = [x0[start:start + chunk].reshape((-1,) + (1,) * (d - 1))]
        for k in range(1, d):
            shape = [1] * d
            shape[k] = -1
            xs.append(pts[k].reshape(shape))
        best = max(best, float(np.max(np.abs(func(xs)))))
    return best


def recovery_error_d(f, approx: TensorSpline, q, w: FreudWeight, order=None) -> float:
    """``||f - approx||_{L_{q,w}(R^d)}``: box panels follow the spline knots."""
    d = approx.d
    sing = getattr(f, "singular_points", ()) or ()
    q = float(q)
    split = not (q.is_integer() and int(q) % 2 == 0) and not math.isinf(q)
    order, tail_order = AXIS_ORDERS[d] if order is None else (order, order)
    core, left, right = _regions(approx.bound, w, approx.axis_breakpoints(), sing, order,
                                 f if split else None, tail_order)

    if math.isinf(q):
        # scan density per knot interval drops with d to keep the grid bounded
        per = {1: 64, 2: 16, 3: 4}[d]
        k = int(round(approx.bound / approx.step))
        scan = np.concatenate([(np.arange(-k, k)[:, None] + np.arange(per) / per).ravel(), [k]])
        scan = scan * approx.step
        S = approx.on_grid(*([scan] * d))
        inside = _max_box(f, S, scan, d, w)
        # the outer limit at the box faces counts towards the outside region
        tails = np.concatenate([_tail_scan(approx.bound, w, per), [-approx.bound, approx.bound]])
        outside = 0.0
        for combo in itertools.product((0, 1), repeat=d):
            if all(combo):
                continue
            pts = [scan if c else tails for c in combo]
            outside = max(outside, _sup_grid(lambda xs: _weighted(f, xs, w), pts))
        return max(inside, outside)

    total = []
    for combo in itertools.product((left, core, right), repeat=d):
        if all(c is core for c in combo):
            S = approx.on_grid(*[c[0] for c in combo])
            total.append(_box_sum(f, S, [c for c in combo], w, q))
        else:
            g = lambda xs: np.abs(_weighted(f, xs, w)) ** q
            total.append(_grid_sum(g, list(combo)))
    return math.fsum(total) ** (1.0 / q)


def _wprod(xs, w):
    out = 1.0
    for x in xs:
        out = out * w(x)
    return out


def _box_sum(f, S, rules, w, q, chunk=None):
    d = len(rules)
    chunk = chunk or _chunk_rows([r[0] for r in rules])
    x0, w0 = rules[0]
    total = []
    for start in range(0, len(x0), chunk):
        sl = slice(start, start + chunk)
        xs = [x0[sl].reshape((-1,) + (1,) * (d - 1))]
        W = w0[sl].reshape((-1,) + (1,) * (d - 1))
        for k in range(1, d):
            shape = [1] * d
            shape[k] = -1
            xs.append(rules[k][0].reshape(shape))
            W = W * rules[k][1].reshape(shape)
        vals = _weighted(f, xs, w) - S[sl] * _wprod(xs, w)
        total.append(float(np.sum(W * np.abs(vals) ** q)))
    return math.fsum(total)


def _max_box(f, S, scan, d, w, chunk=None):
    best = 0.0
    chunk = chunk or _chunk_rows([scan] * d)
    for start in range(0, len(scan), chunk):
        sl = slice(start, start + chunk)
        xs = [scan[sl].reshape((-1,) + (1,) * (d - 1))]
        for k in range(1, d):
            shape = [1] * d
            shape[k] = -1
            xs.append(scan.reshape(shape))
        vals = _weighted(f, xs, w) - S[sl] * _wprod(xs, w)
        best = max(best, float(np.max(np.abs(vals))))
    return best
