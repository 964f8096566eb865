"""Refined-grid interpolation ``R`` and the blended interpolant ``P = R + Q - RQ``."""

from __future__ import annotations

import numpy as np
from scipy import sparse

from .bspline import cardinal_bspline, knot_values, refinement_mask
from .quasi import RecoveryConfig, extension_matrix, quasi_matrix, sample
from .spline import SplineFunction


def refinement_matrix(count: int, first: int, order: int, levels: int):
    """Sparse map from coefficients on step ``H`` to step ``H / 2**levels``.

    Returns the matrix and the first shift of the refined coefficient vector.
    """
    mask = refinement_mask(order)
    half = order // 2
    T = sparse.identity(count, format="csr")
    for _ in range(levels):
        n_fine = 2 * count - 1 + order
        q = np.arange(count)
        rows = (2 * q[:, None] + np.arange(order + 1)).ravel()
        cols = np.repeat(q, order + 1)
        vals = np.tile(mask, count)
        step = sparse.csr_matrix((vals, (rows, cols)), shape=(n_fine, count))
        T = step @ T
        count, first = n_fine, 2 * first - half
    return T.tocsr(), first


def _node_eval_matrix(cfg: RecoveryConfig, m: int):
    """``Qf(x_i)``, ``|i| <= m``, from the coefficients ``c_s``, ``|s| <= m + ell - 1``."""
    S = m + cfg.ell - 1
    vals = knot_values(cfg.order)  # M(d), |d| <= ell - 1
    i = np.arange(-m, m + 1)
    rows, cols, data = [], [], []
    for d, v in zip(range(-cfg.ell + 1, cfg.ell), vals):
        rows.append(i + m)
        cols.append(i - d + S)
        data.append(np.full(len(i), v))
    return sparse.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(2 * m + 1, 2 * S + 1))


def blend_matrix(cfg: RecoveryConfig, m: int):
    """Sparse map from the ``2(m + ell + j0) - 1`` samples to refined coefficients of ``P``.

    Implements ``P = Q + R (I - Q)``, which equals ``R + Q - RQ``; ``R`` only
    needs node values ``|i| <= m`` inside the truncation interval because
    ``2**kappa >= ell``.  Returns ``(matrix, first_shift, step_divisor)``.
    """
    A = quasi_matrix(cfg, m)
    S = m + cfg.ell - 1
    if cfg.ell == 1:
        return A, -S, 1
    kappa = cfg.kappa
    scale = 2 ** kappa
    Ref, first = refinement_matrix(2 * S + 1, -S, cfg.order, kappa)
    K = cfg.sample_radius(m)
    sel = sparse.eye(2 * m + 1, 2 * K + 1, k=K - m, format="csr")
    G = sel - _node_eval_matrix(cfg, m) @ A
    m0 = float(cardinal_bspline(0.0, cfg.order))
    i = np.arange(-m, m + 1)
    U = sparse.csr_matrix((np.full(len(i), 1.0 / m0), (scale * i - first, i + m)),
                          shape=(Ref.shape[0], 2 * m + 1))
    return (Ref @ A + U @ G).tocsr(), first, scale


def _refined_spline(cfg, m, coeffs, first, scale, n_samples):
    grid = cfg.grid(m)
    return SplineFunction(grid.h / scale, coeffs, first, cfg.order, grid.bound,
                          grid=grid, n_samples=n_samples)


def apply_R_truncated(f, m: int, cfg: RecoveryConfig) -> SplineFunction:
    """``M(0)**-1 sum_{|s| <= m+ell-1} f(x_s) M(2**kappa (x/h - s))`` on the interval."""
    grid = cfg.grid(m)
    S = m + cfg.ell - 1
    vals = sample(f, grid.nodes(S))
    return _r_spline(cfg, m, vals, len(vals))


def _r_spline(cfg, m, node_vals, n_samples):
    grid = cfg.grid(m)
    scale = 2 ** cfg.kappa
    S = (len(node_vals) - 1) // 2
    m0 = float(cardinal_bspline(0.0, cfg.order))
    coeffs = np.zeros(2 * scale * S + 1)
    coeffs[::scale] = np.asarray(node_vals) / m0
    return SplineFunction(grid.h / scale, coeffs, -scale * S, cfg.order, grid.bound,
                          grid=grid, n_samples=n_samples)


def apply_RQ_truncated(f, m: int, cfg: RecoveryConfig) -> SplineFunction:
    """``R`` applied to the node values of the quasi-interpolant (nodes ``|i| <= m``)."""
    from .quasi import apply_Q_truncated

    q = apply_Q_truncated(f, m, cfg)
    return _r_spline(cfg, m, q(cfg.grid(m).nodes(m)), q.n_samples)


def apply_P_truncated(f, m: int, cfg: RecoveryConfig) -> SplineFunction:
    """Truncated blended interpolant; interpolates ``f`` at ``x_k``, ``|k| <= m``."""
    grid = cfg.grid(m)
    vals = sample(f, grid.nodes(cfg.sample_radius(m)))
    B, first, scale = blend_matrix(cfg, m)
    return _refined_spline(cfg, m, B @ vals, first, scale, len(vals))


def apply_P_bar(f, m: int, cfg: RecoveryConfig) -> SplineFunction:
    """Blended interpolant of the extended function; uses only ``2m + 1`` samples."""
    grid = cfg.grid(m)
    vals = sample(f, grid.nodes(m))
    B, first, scale = blend_matrix(cfg, m)
    E = extension_matrix(cfg, m)
    return _refined_spline(cfg, m, B @ (E @ vals), first, scale, len(vals))


def blended_stencil(cfg: RecoveryConfig) -> dict:
    """Coefficients of ``M(2**kappa x - r)`` contributed by a unit sample at 0.

    This is ``P`` flattened onto the refined basis; for ``ell = 2`` the keys run
    over ``|r| <= 4``.
    """
    m = 4 * (cfg.ell + cfg.j0) + 4
    K = cfg.sample_radius(m)
    B, first, _ = blend_matrix(cfg, m)
    unit = np.zeros(2 * K + 1)
    unit[K] = 1.0
    d = B @ unit
    r = np.arange(first, first + len(d))
    keep = np.abs(d) > 1e-15
    return {int(k): float(v) for k, v in zip(r[keep], d[keep])}
