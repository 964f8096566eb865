"""Weighted integrals, ``L_{q,w}`` and Sobolev norms, and recovery errors.

Integrals are composite Gauss-Legendre sums over panels aligned with the
known breakpoints of the integrand.  Each panel is integrated at two orders
and the panels are halved until both agree; the tails beyond the core
interval use geometrically growing panels with a geometric-series
extrapolation so algebraically decaying integrands are handled as well.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .weight import FreudWeight


class IntegrationError(RuntimeError):
    def __init__(self, message, estimates=()):
        self.estimates = tuple(estimates)
        if estimates:
            message += f" (last estimates: {', '.join(f'{e:.17g}' for e in estimates)})"
        super().__init__(message)


class ReducedAccuracyWarning(UserWarning):
    """Derivatives were approximated by finite differences."""


@dataclass(frozen=True)
class IntegrationSpec:
    order: int = 16
    rtol: float = 1e-10
    atol: float = 1e-300
    max_halvings: int = 6
    grading_levels: int = 24
    scan_points: int = 64


DEFAULT_SPEC = IntegrationSpec()


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    """Nodes and weights on ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def as_vectorized(f):
    """Wrap ``f`` so it accepts and returns arrays of the same shape."""
    if getattr(f, "vectorized", False) or hasattr(f, "breakpoints"):
        def g(x):
            out = np.asarray(f(x), dtype=float)
            return np.broadcast_to(out, np.shape(x)).copy() if out.shape != np.shape(x) else out
        return g
    probe = np.array([0.25, 0.5])
    try:
        out = np.asarray(f(probe), dtype=float)
        ok = out.shape in (probe.shape, ())
    except Exception:
        ok = False
    if ok:
        def g(x):
            out = np.asarray(f(np.asarray(x, dtype=float)), dtype=float)
            return np.broadcast_to(out, np.shape(x)).copy() if out.shape != np.shape(x) else out
        return g
    vf = np.vectorize(lambda t: float(f(t)), otypes=[float])
    return lambda x: vf(np.asarray(x, dtype=float))


def weighted_evaluator(f, w: FreudWeight):
    """``x -> f(x) w(x)``, using ``f.times_weight`` when available (no overflow)."""
    if hasattr(f, "times_weight"):
        return lambda x: f.times_weight(np.asarray(x, dtype=float), w)
    g = as_vectorized(f)
    return lambda x: g(x) * w(x)


def _singular(f):
    return tuple(getattr(f, "singular_points", ()) or ())


def _breaks(f):
    bp = getattr(f, "breakpoints", None)
    return np.asarray([] if bp is None else bp, dtype=float)


def core_scale(w: FreudWeight) -> float:
    """Length scale of the weight: ``a**(-1/lam)``."""
    return w.a ** (-1.0 / w.lam)


def _panel_edges(lo, hi, breakpoints, max_width, singular=(), levels=24):
    pts = [lo, hi]
    bp = np.asarray(breakpoints, dtype=float)
    pts.extend(bp[(bp > lo) & (bp < hi)].tolist())
    edges = np.unique(np.asarray(pts, dtype=float))
    widths = np.diff(edges)
    nsub = np.maximum(1, np.ceil(widths / max_width).astype(int))
    if np.any(nsub > 1):
        parts = [edges[i] + widths[i] * np.arange(nsub[i]) / nsub[i] for i in range(len(widths))]
        edges = np.concatenate(parts + [[edges[-1]]])
    if singular:
        extra = []
        for sp in singular:
            if not lo <= sp <= hi:
                continue
            j = np.searchsorted(edges, sp)
            for nb in (j - 1, j, j + 1):
                if 0 <= nb < len(edges) and edges[nb] != sp:
                    d = edges[nb] - sp
                    extra.extend(sp + d * 2.0 ** -np.arange(1, levels + 1))
            extra.append(sp)
        edges = np.unique(np.concatenate([edges, np.clip(extra, lo, hi)]))
    return edges


def _sign_change_edges(g, edges, samples=9, iters=60):
    """Add the zeros of ``g`` located by sign changes on a sample of each panel."""
    t = np.linspace(0.0, 1.0, samples)
    a, b = edges[:-1], edges[1:]
    X = a[:, None] + (b - a)[:, None] * t
    V = g(X)
    flip = np.sign(V[:, :-1]) * np.sign(V[:, 1:]) < 0
    if not np.any(flip):
        return edges
    pi, ti = np.nonzero(flip)
    lo = X[pi, ti].copy()
    hi = X[pi, ti + 1].copy()
    flo = V[pi, ti].copy()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = g(mid)
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
    return np.unique(np.concatenate([edges, 0.5 * (lo + hi)]))


SINGULAR_POWER = 64


def _gl_sum(g, edges, n, singular=()):
    """Per-panel Gauss-Legendre sums.

    Panels with an end on a singular point use ``x = s +- d u**k`` so that
    integrable endpoint singularities ``|x - s|**alpha`` (``alpha > -1``)
    become mild powers of ``u``.
    """
    x, wts = gauss_legendre(n)
    a = edges[:-1, None]
    width = np.diff(edges)[:, None]
    X = a + width * x
    J = np.broadcast_to(width * wts, X.shape).copy()
    if len(singular):
        sing = np.asarray(singular, dtype=float)
        left = np.isin(edges[:-1], sing)
        right = np.isin(edges[1:], sing) & ~left
        k = SINGULAR_POWER
        t = x ** k
        dt = k * x ** (k - 1) * wts
        X[left] = a[left] + width[left] * t
        J[left] = width[left] * dt
        X[right] = edges[1:, None][right] - width[right] * t
        J[right] = width[right] * dt
    vals = g(X)
    return np.sum(vals * J, axis=1)


def _pairwise(v):
    return float(math.fsum(v))


def integrate_panels(g, edges, spec: IntegrationSpec = DEFAULT_SPEC, split_roots=None,
                     singular=()):
    """Composite Gauss-Legendre integral of ``g`` with panel-halving refinement."""
    edges = np.asarray(edges, dtype=float)
    if split_roots is not None:
        edges = _sign_change_edges(split_roots, edges)
    n = spec.order
    prev = None
    for _ in range(spec.max_halvings + 1):
        lo = _pairwise(_gl_sum(g, edges, n, singular))
        panels = _gl_sum(g, edges, 2 * n, singular)
        hi = _pairwise(panels)
        # cancellation between panels is measured against the absolute mass
        mass = _pairwise(np.abs(panels))
        if abs(hi - lo) <= spec.rtol * mass + spec.atol:
            return hi
        prev = (lo, hi)
        mids = 0.5 * (edges[:-1] + edges[1:])
        edges = np.sort(np.concatenate([edges, mids]))
        if split_roots is not None:
            # finer panels can separate close pairs of roots missed before
            edges = _sign_change_edges(split_roots, edges)
    raise IntegrationError("panel refinement did not converge", prev)


def integrate_tail(g, start, direction, scale, spec: IntegrationSpec = DEFAULT_SPEC,
                   max_panels=400, split_roots=None):
    """``int_start^{+-inf} g`` over geometrically growing panels.

    Once consecutive panel contributions shrink by a stable ratio the rest is
    summed as a geometric series, which is exact for power-law tails.
    """
    parts = []
    total = 0.0
    width = scale
    x0 = start
    zeros = 0
    ratios = []
    for k in range(max_panels):
        edges = np.array([x0, x0 + direction * width]) if direction > 0 else np.array([x0 - width, x0])
        edges = np.linspace(edges[0], edges[1], 5)
        # panels far out only need accuracy relative to what is already summed
        local = replace(spec, atol=max(spec.atol, 1e-3 * spec.rtol * abs(total)))
        part = integrate_panels(g, edges, local, split_roots)
        parts.append(part)
        total += part
        x0 = x0 + direction * width
        width *= 2.0
        if part == 0.0:
            zeros += 1
            if zeros >= 2:
                return total
            continue
        zeros = 0
        if abs(part) <= 1e-17 * abs(total):
            return total
        if len(parts) >= 2 and parts[-2] != 0.0:
            ratios.append(part / parts[-2])
            if len(ratios) >= 6 and k >= 10:
                r = ratios[-1]
                if 0 < r < 1 and abs(r - ratios[-2]) <= 1e-6 * r and abs(r - ratios[-3]) <= 1e-5 * r:
                    return total + part * r / (1.0 - r)
    raise IntegrationError("tail integral did not converge", parts[-2:])


def reference_weighted_integral(f, w: FreudWeight, domain=None, spec: IntegrationSpec = DEFAULT_SPEC):
    """``int f w`` over ``domain`` (an interval) or the whole line when ``domain`` is None."""
    fw = weighted_evaluator(f, w)
    return _integrate(fw, domain, w, _breaks(f), _singular(f), spec)


def _integrate(g, domain, w, breakpoints=(), singular=(), spec=DEFAULT_SPEC, split_roots=None):
    scale = core_scale(w)
    max_width = 0.25 * scale
    if domain is not None:
        lo, hi = float(domain[0]), float(domain[1])
        if hi <= lo:
            return 0.0
        edges = _panel_edges(lo, hi, breakpoints, max_width, singular, spec.grading_levels)
        return integrate_panels(g, edges, spec, split_roots, singular)
    bp = np.asarray(breakpoints, dtype=float)
    reach = max([4.0 * scale] + [abs(v) for v in bp] + [abs(s) for s in singular])
    core = _integrate(g, (-reach, reach), w, bp, singular, spec, split_roots)
    left = integrate_tail(g, -reach, -1, scale, spec, split_roots=split_roots)
    right = integrate_tail(g, reach, 1, scale, spec, split_roots=split_roots)
    return math.fsum([left, core, right])


def _is_even_integer(q):
    return np.isfinite(q) and float(q).is_integer() and int(q) % 2 == 0


def _scan_sup(g, domain, w, breakpoints, singular, npts):
    scale = core_scale(w)
    if domain is None:
        bp = np.asarray(breakpoints, dtype=float)
        reach = max([4.0 * scale] + [abs(v) for v in bp])
        inner = _scan_sup(g, (-reach, reach), w, bp, singular, npts)
        far = reach * 2.0 ** np.linspace(0, 40, 400)
        tail = np.max(np.abs(np.concatenate([g(far), g(-far)])))
        return max(inner, float(tail))
    lo, hi = domain
    edges = _panel_edges(lo, hi, breakpoints, 0.25 * scale, singular, 0)
    t = np.linspace(0.0, 1.0, npts + 1)
    X = edges[:-1, None] + np.diff(edges)[:, None] * t
    pts = np.concatenate([X.ravel(), edges, np.asarray(singular, dtype=float)])
    pts = pts[(pts >= lo) & (pts <= hi)]
    return float(np.max(np.abs(g(pts))))


def weighted_lq_norm(f, q, w: FreudWeight, domain=None, spec: IntegrationSpec = DEFAULT_SPEC):
    """``||f||_{L_{q,w}}`` on ``domain`` (whole line by default); ``q = inf`` by dense scan."""
    fw = weighted_evaluator(f, w)
    return _lq(fw, q, w, domain, _breaks(f), _singular(f), spec)


def _lq(fw, q, w, domain, breakpoints, singular, spec):
    q = float(q)
    if q < 1:
        raise ValueError("q must be >= 1")
    if math.isinf(q):
        return _scan_sup(fw, domain, w, breakpoints, singular, spec.scan_points)
    integrand = lambda x: np.abs(fw(x)) ** q
    split = None if _is_even_integer(q) else fw
    val = _integrate(integrand, domain, w, breakpoints, singular, spec, split)
    return max(val, 0.0) ** (1.0 / q)


def _finite_difference(f, k, step=1e-5):
    g = as_vectorized(f)

    def d(x):
        x = np.asarray(x, dtype=float)
        return sum((-1) ** i * math.comb(k, i) * g(x + (k / 2 - i) * step)
                   for i in range(k + 1)) / step ** k

    d.vectorized = True
    d.breakpoints = getattr(f, "breakpoints", None)
    return d


def derivative_of(f, k: int):
    if k == 0:
        return f
    if hasattr(f, "derivative"):
        return f.derivative(k)
    warnings.warn("no analytic derivative available; using central differences "
                  "(reduced accuracy)", ReducedAccuracyWarning, stacklevel=3)
    return _finite_difference(f, k)


def weighted_sobolev_norm(f, r: int, p, w: FreudWeight, spec: IntegrationSpec = DEFAULT_SPEC):
    """``(sum_{k<=r} ||f^(k)||_{L_{p,w}}**p)**(1/p)``; the maximum when ``p = inf``."""
    norms = [weighted_lq_norm(derivative_of(f, k), p, w, spec=spec) for k in range(r + 1)]
    if math.isinf(float(p)):
        return max(norms)
    return math.fsum(v ** p for v in norms) ** (1.0 / p)


def recovery_error(f, approx, q, w: FreudWeight, spec: IntegrationSpec = DEFAULT_SPEC,
                   parts: bool = False):
    """``||f - approx||_{L_{q,w}(R)}`` for an approximant supported on ``[-B, B]``.

    Inside the interval panels follow the approximant's knots; outside only
    ``f`` remains.  With ``parts=True`` the inside and tail contributions are
    returned as well.
    """
    fw = weighted_evaluator(f, w)
    aw = lambda x: approx(x) * w(x)
    lo, hi = approx.support
    diff = lambda x: fw(x) - aw(x)
    bp = np.concatenate([_breaks(approx), _breaks(f)])
    sing = _singular(f)
    q = float(q)
    scale = core_scale(w)
    if math.isinf(q):
        inside = _scan_sup(diff, (lo, hi), w, bp, sing, spec.scan_points)
        out_l = _scan_sup(fw, (min(lo - 8 * scale, lo), lo), w, _breaks(f), sing, spec.scan_points)
        out_r = _scan_sup(fw, (hi, hi + 8 * scale), w, _breaks(f), sing, spec.scan_points)
        far = np.abs(hi) + 8 * scale + scale * 2.0 ** np.linspace(0, 40, 400)
        out_far = float(np.max(np.abs(np.concatenate([fw(far), fw(-far)]))))
        tail = max(out_l, out_r, out_far)
        total = max(inside, tail)
        return (total, inside, tail) if parts else total
    integrand = lambda x: np.abs(diff(x)) ** q
    split = None if _is_even_integer(q) else diff
    # rounding in f - approx sets a floor below which panel doubling cannot agree
    fmax = float(np.max(np.abs(fw(np.linspace(lo, hi, 257)))))
    floor = (1e3 * np.finfo(float).eps * fmax) ** q * (hi - lo)
    inner_spec = replace(spec, atol=max(spec.atol, floor))
    inside_q = _integrate(integrand, (lo, hi), w, bp, sing, inner_spec, split)
    f_int = lambda x: np.abs(fw(x)) ** q
    f_split = None if _is_even_integer(q) else fw
    # tails: [hi, inf) and (-inf, lo], with f's own breakpoints respected
    fb = _breaks(f)
    reach = max([hi + 4 * scale] + [abs(v) for v in fb] + [abs(s) for s in sing])
    right = (_integrate(f_int, (hi, reach), w, fb, sing, spec, f_split)
             + integrate_tail(f_int, reach, 1, scale, spec, split_roots=f_split))
    left = (_integrate(f_int, (-reach, lo), w, fb, sing, spec, f_split)
            + integrate_tail(f_int, -reach, -1, scale, spec, split_roots=f_split))
    tail_q = left + right
    total = (inside_q + tail_q) ** (1.0 / q)
    if parts:
        return total, inside_q ** (1.0 / q), tail_q ** (1.0 / q)
    return total
