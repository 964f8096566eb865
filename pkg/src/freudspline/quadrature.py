"""Equidistant weighted quadratures generated by the recovery operators.

A rule integrates the recovered spline against the weight.  Since every
operator is a linear map ``A`` from samples to spline coefficients, the rule
weights are ``A.T @ beta`` where ``beta`` holds the weighted moments of the
truncated basis functions.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .analysis import IntegrationError, gauss_legendre
from .blend import blend_matrix
from .bspline import active_basis
from .quasi import RecoveryConfig, SamplingError, extension_matrix, quasi_matrix, sample

RULE_KINDS = ("Q", "P", "Qbar", "Pbar")


@dataclass(frozen=True)
class WeightedQuadratureRule:
    """Nodes ``x_s`` and weights ``lambda_s`` of a generated rule."""

    kind: str
    m: int
    rho: float
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.nodes)

    @property
    def indices(self) -> np.ndarray:
        half = (len(self.nodes) - 1) // 2
        return np.arange(-half, half + 1)

    def __call__(self, f) -> float:
        return integrate(self, f)


def basis_moments(step: float, first: int, count: int, order: int, bound: float, w,
                  n_gauss: int = 16, rtol: float = 1e-12) -> np.ndarray:
    """``int_{-bound}^{bound} M(x/step - s) w(x) dx`` for ``s = first .. first+count-1``.

    ``bound`` must be a multiple of ``step``.  Every knot interval carries the
    same local basis values, so only the weight changes between intervals.
    """
    K = int(round(bound / step))
    if not math.isclose(K * step, bound, rel_tol=1e-12):
        raise ValueError("truncation bound must lie on the knot grid")
    k = np.arange(-K, K)
    half = order // 2

    def moments(n):
        u, gw = gauss_legendre(n)
        vals = active_basis(u, order)                     # (n, order)
        wx = w(step * (k[:, None] + u[None, :]))          # (intervals, n)
        local = step * (wx * gw) @ vals                   # (intervals, order)
        out = np.zeros(count)
        idx = k[:, None] - half + 1 + np.arange(order) - first
        ok = (idx >= 0) & (idx < count)
        np.add.at(out, idx[ok], local[ok])
        return out

    lo, hi = moments(n_gauss), moments(2 * n_gauss)
    scale = np.max(np.abs(hi)) if count else 0.0
    if np.any(np.abs(hi - lo) > rtol * scale):
        raise IntegrationError("basis moments not converged",
                               (float(np.sum(lo)), float(np.sum(hi))))
    return hi


def sample_map(kind: str, cfg: RecoveryConfig, m: int):
    """``(A, step, first, node_radius)``: samples -> coefficients for rule ``kind``."""
    grid = cfg.grid(m)
    K = cfg.sample_radius(m)
    if kind in ("Q", "Qbar"):
        A = quasi_matrix(cfg, m)
        step, first = grid.h, -(m + cfg.ell - 1)
    elif kind in ("P", "Pbar"):
        A, first, scale = blend_matrix(cfg, m)
        step = grid.h / scale
    else:
        raise ValueError(f"unknown rule kind {kind!r}; expected one of {RULE_KINDS}")
    if kind.endswith("bar"):
        A = A @ extension_matrix(cfg, m)
        K = m
    return A, step, first, K


_CACHE: dict = {}


def build_rule(kind: str, m: int, cfg: RecoveryConfig) -> WeightedQuadratureRule:
    """Generated rule of the given kind; cached by ``(kind, config, m)``."""
    key = (kind, cfg.key(), m)
    rule = _CACHE.get(key)
    if rule is None:
        grid = cfg.grid(m)
        A, step, first, K = sample_map(kind, cfg, m)
        beta = basis_moments(step, first, A.shape[0], cfg.order, grid.bound, cfg.weight)
        weights = np.asarray(A.T @ beta).ravel()
        nodes = grid.nodes(K)
        weights.setflags(write=False)
        nodes.setflags(write=False)
        rule = WeightedQuadratureRule(kind, m, cfg.rho, nodes, weights)
        _CACHE[key] = rule
    return rule


def build_rule_Q(m: int, cfg: RecoveryConfig) -> WeightedQuadratureRule:
    return build_rule("Q", m, cfg)


def build_rule_P(m: int, cfg: RecoveryConfig) -> WeightedQuadratureRule:
    return build_rule("P", m, cfg)


def clear_rule_cache():
    _CACHE.clear()


def integrate(rule: WeightedQuadratureRule, f) -> float:
    """``sum_s lambda_s f(x_s)`` with compensated summation."""
    vals = sample(f, rule.nodes)
    return math.fsum(rule.weights * vals)


def export_rule(rule: WeightedQuadratureRule, path) -> None:
    """Write ``s,x_s,lambda_s`` rows with 17 significant digits."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["s", "x_s", "lambda_s"])
            for s, x, lam in zip(rule.indices, rule.nodes, rule.weights):
                out.writerow([int(s), f"{x:.17g}", f"{lam:.17g}"])
    except OSError as exc:
        raise OSError(f"cannot write rule to {path}: {exc}") from exc


def read_rule(path, kind="Q", m=0, rho=float("nan")) -> WeightedQuadratureRule:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return WeightedQuadratureRule(kind, m, rho, data[:, 1], data[:, 2])


__all__ = [
    "RULE_KINDS", "SamplingError", "WeightedQuadratureRule", "basis_moments", "build_rule",
    "build_rule_P", "build_rule_Q", "clear_rule_cache", "export_rule", "integrate", "read_rule",
    "sample_map",
]
