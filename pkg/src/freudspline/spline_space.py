"""The truncated spline space, weighted sequence norms and inequality ratios.

Elements are ``sum_{|s| <= m - ell} b_s M(x/h - s)``, which are supported in
``[-rho a_m, rho a_m]`` without any truncation.
"""

from __future__ import annotations

import csv
import math

import numpy as np
from scipy import sparse

from .analysis import gauss_legendre, weighted_lq_norm, weighted_sobolev_norm
from .bspline import active_basis
from .quasi import RecoveryConfig
from .spline import SplineFunction
from .weight import delta_exponent

ENSEMBLE_PROFILES = ("uniform", "inverse_weight", "localized")


class UndefinedRatioError(ValueError):
    """Ratio of norms requested for the zero spline."""


def space_dimension(m: int, cfg: RecoveryConfig) -> int:
    return 2 * (m - cfg.ell) + 1


def make_spline(coeffs, m: int, cfg: RecoveryConfig) -> SplineFunction:
    """Element of the spline space with coefficients ``b_s``, ``|s| <= m - ell``."""
    coeffs = np.asarray(coeffs, dtype=float)
    if m <= cfg.ell:
        raise ValueError(f"need m > ell = {cfg.ell}, got m={m}")
    dim = space_dimension(m, cfg)
    if coeffs.shape != (dim,):
        raise ValueError(f"expected {dim} coefficients for m={m}, got {coeffs.shape}")
    grid = cfg.grid(m)
    return SplineFunction(grid.h, coeffs, -(m - cfg.ell), cfg.order, grid.bound, grid=grid)


def discrete_norm(values, nodes, p, w) -> float:
    """``(sum |w(x_s) c_s|**p)**(1/p)``; the maximum for ``p = inf``."""
    v = np.abs(np.asarray(values, dtype=float) * w(np.asarray(nodes, dtype=float)))
    if math.isinf(float(p)):
        return float(v.max()) if v.size else 0.0
    return math.fsum(v ** p) ** (1.0 / p)


def _grid_info(phi: SplineFunction):
    if phi.grid is None:
        raise ValueError("spline has no grid attached; build it with make_spline")
    return phi.grid


def _check_nonzero(phi):
    if not np.any(phi.coeffs):
        raise UndefinedRatioError("undefined ratio: zero spline")


def marcinkiewicz_ratios(phi: SplineFunction, p, cfg: RecoveryConfig) -> dict:
    """Continuous norm over the node-value norm and over the coefficient norm.

    Both denominators carry the factor ``m**((1/lam - 1)/p)``.
    """
    _check_nonzero(phi)
    grid = _grid_info(phi)
    m, w = grid.m, cfg.weight
    scale = 1.0 if math.isinf(float(p)) else m ** ((1.0 / w.lam - 1.0) / p)
    cont = weighted_lq_norm(phi, p, w, domain=phi.support)
    nodes = grid.nodes(m)
    node = discrete_norm(phi(nodes), nodes, p, w)
    shifts = np.arange(phi.first, phi.last + 1)
    coef = discrete_norm(phi.coeffs, grid.node(shifts), p, w)
    return {"node_ratio": cont / (scale * node), "coeff_ratio": cont / (scale * coef)}


def nikolskii_ratio(phi: SplineFunction, p, q, cfg: RecoveryConfig) -> float:
    """``||phi||_q / (m**delta ||phi||_p)``."""
    _check_nonzero(phi)
    grid = _grid_info(phi)
    if float(p) == float(q):
        return 1.0
    w = cfg.weight
    num = weighted_lq_norm(phi, q, w, domain=phi.support)
    den = weighted_lq_norm(phi, p, w, domain=phi.support)
    return num / (grid.m ** delta_exponent(p, q, w.lam) * den)


def bernstein_ratio(phi: SplineFunction, r: int, p, cfg: RecoveryConfig) -> float:
    """``||phi^(r)||_p / (m**(r(1 - 1/lam)) ||phi||_p)`` for ``r <= 2 ell - 1``."""
    _check_nonzero(phi)
    grid = _grid_info(phi)
    if r > cfg.order - 1:
        raise ValueError(f"derivative order r={r} exceeds 2*ell - 1 = {cfg.order - 1}")
    if r == 0:
        return 1.0
    w = cfg.weight
    num = weighted_lq_norm(phi.derivative(r), p, w, domain=phi.support)
    den = weighted_lq_norm(phi, p, w, domain=phi.support)
    return num / (grid.m ** (r * (1.0 - 1.0 / w.lam)) * den)


# ---------------------------------------------------------------------------
# ensembles


def random_coefficients(m: int, cfg: RecoveryConfig, size: int, profile: str = "uniform",
                        seed=0) -> np.ndarray:
    """``(dim, size)`` coefficient matrix drawn from ``U[-1, 1]`` with an amplitude profile.

    ``inverse_weight`` multiplies ``b_s`` by ``1/w(x_s)`` so every shift carries
    the same weighted mass; ``localized`` keeps a random window of ``2 ell + 1``
    consecutive coefficients near the origin and zeroes the rest.
    """
    rng = np.random.default_rng(seed)
    dim = space_dimension(m, cfg)
    C = rng.uniform(-1.0, 1.0, (dim, size))
    shifts = np.arange(-(m - cfg.ell), m - cfg.ell + 1)
    if profile == "uniform":
        return C
    if profile == "inverse_weight":
        logw = cfg.weight.log(cfg.grid(m).node(shifts))
        return C * np.exp(-logw)[:, None]
    if profile == "localized":
        width = 2 * cfg.ell + 1
        span = min(dim - width, 4 * cfg.ell)
        start = (dim - width) // 2 + rng.integers(-span // 2, span // 2 + 1, size)
        mask = (np.arange(dim)[:, None] >= start) & (np.arange(dim)[:, None] < start + width)
        return C * mask
    raise ValueError(f"unknown profile {profile!r}; expected one of {ENSEMBLE_PROFILES}")


def _sample_matrix(m, cfg, deriv=0, n_gauss=24, scan=False):
    """Sparse evaluation matrix at per-interval quadrature (or scan) points.

    Returns ``(B, x, qw)`` where ``qw`` are the quadrature weights (``None``
    for a scan).
    """
    grid = cfg.grid(m)
    h, order, half = grid.h, cfg.order, cfg.order // 2
    if scan:
        u = np.linspace(0.0, 1.0, 65)[:-1]
        gw = None
    else:
        u, gw = gauss_legendre(n_gauss)
    k = np.arange(-m, m)
    x = (h * (k[:, None] + u[None, :])).ravel()
    vals = active_basis(u, order, deriv) / h ** deriv          # (npts, order)
    first = -(m - cfg.ell)
    dim = space_dimension(m, cfg)
    cols = (k[:, None, None] - half + 1 + np.arange(order)[None, None, :] - first)
    cols = np.broadcast_to(cols, (len(k), len(u), order)).reshape(-1, order)
    data = np.broadcast_to(vals, (len(k), len(u), order)).reshape(-1, order)
    rows = np.repeat(np.arange(len(x)), order)
    ok = (cols.ravel() >= 0) & (cols.ravel() < dim)
    B = sparse.csr_matrix((data.ravel()[ok], (rows[ok], cols.ravel()[ok])), shape=(len(x), dim))
    qw = None if gw is None else np.tile(gw, len(k)) * h
    return B, x, qw


def ensemble_norms(C, m, p, cfg: RecoveryConfig, deriv: int = 0) -> np.ndarray:
    """``L_{p,w}`` norms of ``phi^(deriv)`` for every column of ``C``.

    Finite ``p`` uses 24-point Gauss-Legendre per knot interval; ``p = inf``
    scans 64 points per interval.  For odd ``p`` the kinks of ``|phi|`` at
    sign changes limit the relative accuracy to about ``1e-4``, which is ample
    for boundedness studies; use :func:`weighted_lq_norm` for exact values.
    """
    scan = math.isinf(float(p))
    B, x, qw = _sample_matrix(m, cfg, deriv, scan=scan)
    V = np.abs(B @ C) * cfg.weight(x)[:, None]
    if scan:
        return V.max(axis=0)
    return (qw @ V ** p) ** (1.0 / p)


def ensemble_ratios(kind: str, m: int, cfg: RecoveryConfig, p, q=None, r: int = 0,
                    size: int = 64, profile: str = "uniform", seed=0) -> np.ndarray:
    """Vector of one inequality ratio over a random ensemble.

    ``kind`` is one of ``node``, ``coeff`` (Marcinkiewicz), ``nikolskii``,
    ``bernstein``.
    """
    w = cfg.weight
    C = random_coefficients(m, cfg, size, profile, seed)
    norm_p = ensemble_norms(C, m, p, cfg)
    if np.any(norm_p == 0):
        raise UndefinedRatioError("undefined ratio: zero spline in ensemble")
    grid = cfg.grid(m)
    if kind in ("node", "coeff"):
        scale = 1.0 if math.isinf(float(p)) else m ** ((1.0 / w.lam - 1.0) / p)
        if kind == "node":
            nodes = grid.nodes(m)
            B, _, _ = _node_matrix(m, cfg)
            vals = B @ C
        else:
            nodes = grid.node(np.arange(-(m - cfg.ell), m - cfg.ell + 1))
            vals = C
        wv = np.abs(vals) * w(nodes)[:, None]
        disc = wv.max(axis=0) if math.isinf(float(p)) else (wv ** p).sum(axis=0) ** (1.0 / p)
        return norm_p / (scale * disc)
    if kind == "nikolskii":
        norm_q = ensemble_norms(C, m, q, cfg)
        return norm_q / (m ** delta_exponent(p, q, w.lam) * norm_p)
    if kind == "bernstein":
        if r > cfg.order - 1:
            raise ValueError(f"derivative order r={r} exceeds 2*ell - 1 = {cfg.order - 1}")
        norm_r = ensemble_norms(C, m, p, cfg, deriv=r)
        return norm_r / (m ** (r * (1.0 - 1.0 / w.lam)) * norm_p)
    raise ValueError(f"unknown ratio kind {kind!r}")


def _node_matrix(m, cfg):
    grid = cfg.grid(m)
    nodes = grid.nodes(m)
    from .spline import basis_matrix

    B = basis_matrix(nodes, grid.h, -(m - cfg.ell), space_dimension(m, cfg), cfg.order)
    return B, nodes, None


def default_profile(kind: str, p=None, q=None) -> str:
    """Profile that makes the ratio saturate its bound for the given regime."""
    if kind == "nikolskii":
        return "localized" if float(p) < float(q) else "inverse_weight"
    return "uniform"


def drift_slope(ms, values) -> float:
    """Least-squares slope of ``log(values)`` against ``log(ms)``."""
    return float(np.polyfit(np.log(ms), np.log(values), 1)[0])


def ensemble_report(kind, ms, cfg, p, q=None, r=0, size=64, profile=None, seed=0):
    """Per-``m`` min/max/median rows plus max/min-across-``m`` and drift of the medians."""
    profile = profile or default_profile(kind, p, q)
    rows = []
    for m in ms:
        v = ensemble_ratios(kind, m, cfg, p, q, r, size, profile, seed)
        rows.append({"m": m, "p": p, "q": q, "r": r, "ratio_kind": kind,
                     "min": float(v.min()), "max": float(v.max()), "median": float(np.median(v))})
    med = np.array([row["median"] for row in rows])
    return {"rows": rows, "spread": float(med.max() / med.min()),
            "drift": drift_slope(np.asarray(ms, float), med), "profile": profile}


def write_ensemble_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["m", "p", "q", "r", "ratio_kind", "min", "max", "median"])
        for row in rows:
            out.writerow([row["m"], row["p"], "" if row["q"] is None else row["q"], row["r"],
                          row["ratio_kind"], f"{row['min']:.17g}", f"{row['max']:.17g}",
                          f"{row['median']:.17g}"])


# ---------------------------------------------------------------------------
# lower-bound witness


def fooling_m(n: int, cfg: RecoveryConfig, single: bool = False) -> int:
    """Smallest ``m`` with ``2m + 1 > 4 ell (n + 1)`` (``2 ell (n + 1)`` for one bump)."""
    c = (2 if single else 4) * cfg.ell * (n + 1)
    return max(cfg.ell + 1, c // 2)


def _free_blocks(points, m, cfg, grid):
    """Block indices ``s`` whose closed interval ``[x_{2 ell s}, x_{2 ell (s+1)}]`` avoids all points."""
    ell = cfg.ell
    s_max = (m - 2 * ell) // (2 * ell)
    s_min = -((m) // (2 * ell))
    blocks = [s for s in range(s_min, s_max + 1) if abs(2 * ell * s + ell) <= m - ell]
    pts = np.asarray(points, dtype=float)
    free = []
    for s in blocks:
        lo, hi = grid.node(2 * ell * s), grid.node(2 * ell * (s + 1))
        if not np.any((pts >= lo) & (pts <= hi)):
            free.append(s)
    free.sort(key=lambda s: (abs(2 * ell * s + ell), s))
    return free


def fooling_spline(points, n: int, r: int, p, q, cfg: RecoveryConfig, m: int | None = None):
    """Unit-Sobolev-norm spline vanishing at ``points`` with large ``L_{q,w}`` norm.

    For ``p > q`` it is a sum of ``n`` bumps on blocks free of points; for
    ``p <= q`` a single bump.  Bumps are scaled by ``1/w`` at their centre and
    the sum is normalized so that ``||phi||_{W^r_{p,w}} = 1``.
    """
    points = np.asarray(points, dtype=float)
    single = float(p) <= float(q)
    if m is None:
        m = fooling_m(n, cfg, single)
    grid = cfg.grid(m)
    free = _free_blocks(points, m, cfg, grid)
    need = 1 if single else n
    assert len(free) >= need, "infeasible bump placement; m too small for the point count"
    coeffs = np.zeros(space_dimension(m, cfg))
    first = -(m - cfg.ell)
    for s in free[:need]:
        c = 2 * cfg.ell * s + cfg.ell
        coeffs[c - first] = math.exp(-cfg.weight.log(grid.node(c)))
    phi = make_spline(coeffs, m, cfg)
    norm = weighted_sobolev_norm(phi, r, p, cfg.weight)
    phi = make_spline(coeffs / norm, m, cfg)
    phi.n_points = n
    return phi
