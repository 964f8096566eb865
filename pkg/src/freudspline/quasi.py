"""Quasi-interpolation coefficients and the truncated operators ``Q`` and ``Q-bar``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import sparse

from .bspline import BarycentricPolynomial, PiecewisePolynomial, cardinal_bspline
from .spline import SplineFunction
from .weight import FreudWeight, RecoveryGrid, select_rho


class SamplingError(RuntimeError):
    """The user's function failed (raised or returned a non-finite value) at a node."""

    def __init__(self, node, cause=None):
        self.node = node
        msg = f"sampling failed at node x={node!r}"
        if cause is not None:
            msg += f": {cause}"
        super().__init__(msg)


@dataclass(frozen=True)
class QuasiCoefficients:
    """Even stencil ``lam(j)``, ``|j| <= j0``, for a B-spline of order ``2 ell``."""

    ell: int
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) % 2 == 0:
            raise ValueError("stencil must have odd length 2*j0 + 1")

    @property
    def j0(self) -> int:
        return (len(self.values) - 1) // 2

    def lam(self, j: int) -> float:
        return self.values[j + self.j0] if abs(j) <= self.j0 else 0.0

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values)

    def key(self):
        return (self.ell, self.values)


_CATALOG = {
    1: (Fraction(1),),
    2: (Fraction(-1, 6), Fraction(8, 6), Fraction(-1, 6)),
}


def lambda_catalog(ell: int) -> QuasiCoefficients:
    """Cataloged stencils: piecewise-linear (``ell=1``) and cubic (``ell=2``)."""
    if ell not in _CATALOG:
        raise KeyError(f"no catalog entry for ell={ell}; supply custom coefficients")
    return QuasiCoefficients(ell, tuple(float(v) for v in _CATALOG[ell]))


@dataclass
class CoefficientReport:
    ok: bool
    violations: list = field(default_factory=list)
    first_failing_degree: int | None = None

    def __bool__(self):
        return self.ok


def validate_coefficients(c: QuasiCoefficients, n_points: int = 50, tol: float = 1e-9,
                          seed: int = 0) -> CoefficientReport:
    """Check evenness, ``j0 >= ell - 1`` and reproduction of ``x**k``, ``k < 2 ell``.

    Never raises; all violations are collected in the report.
    """
    violations = []
    vals = c.array
    if not np.allclose(vals, vals[::-1], rtol=0, atol=1e-14 * max(1.0, np.abs(vals).max())):
        violations.append(("evenness", "lam(-j) != lam(j)"))
    if c.j0 < c.ell - 1:
        violations.append(("j0", f"j0={c.j0} < ell - 1 = {c.ell - 1}"))
    first_bad = None
    n = 2 * c.ell
    x = np.random.default_rng(seed).uniform(0.0, 1.0, n_points)
    shifts = np.arange(-c.ell - 1, c.ell + 2)
    basis = cardinal_bspline(x[:, None] - shifts[None, :], n)
    for k in range(n):
        coef = np.array([sum(c.lam(j) * float(s - j) ** k for j in range(-c.j0, c.j0 + 1))
                         for s in shifts])
        approx = basis @ coef
        err = np.max(np.abs(approx - x ** k))
        if err > tol:
            violations.append(("reproduction", f"x**{k} reproduced with error {err:.3g}"))
            first_bad = k
            break
    return CoefficientReport(not violations, violations, first_bad)


def build_kernel(c: QuasiCoefficients) -> PiecewisePolynomial:
    """``L(x) = sum_j lam(j) M(x - j)`` in piecewise-polynomial form."""
    n = 2 * c.ell
    width = c.ell + c.j0

    def kernel(x):
        x = np.asarray(x, dtype=float)
        return sum(c.lam(j) * cardinal_bspline(x - j, n) for j in range(-c.j0, c.j0 + 1))

    return PiecewisePolynomial.from_function(kernel, np.arange(-width, width + 1.0), n - 1)


def kappa_for(ell: int) -> int:
    """Refinement exponent ``ceil(log2(2 ell) - 1)``."""
    return max(0, math.ceil(math.log2(2 * ell) - 1 - 1e-12))


@dataclass(frozen=True)
class RecoveryConfig:
    """Weight, stencil and truncation fraction shared by all operators."""

    weight: FreudWeight = field(default_factory=FreudWeight)
    coefficients: QuasiCoefficients = field(default_factory=lambda: lambda_catalog(2))
    rho: float | None = None

    def __post_init__(self):
        report = validate_coefficients(self.coefficients)
        if not report.ok:
            raise ValueError(f"invalid quasi-interpolation coefficients: {report.violations}")
        if self.rho is None:
            object.__setattr__(self, "rho", self.rho_bound.chosen)
        if not 0 < self.rho < 1:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho!r}")

    @property
    def ell(self) -> int:
        return self.coefficients.ell

    @property
    def j0(self) -> int:
        return self.coefficients.j0

    @property
    def order(self) -> int:
        return 2 * self.ell

    @property
    def kappa(self) -> int:
        return kappa_for(self.ell)

    @property
    def rho_bound(self):
        return select_rho(self.weight, self.ell, self.coefficients.j0, kappa_for(self.ell))

    def grid(self, m: int) -> RecoveryGrid:
        return RecoveryGrid(m, self.rho, self.weight)

    def sample_radius(self, m: int) -> int:
        """Largest ``|k|`` sampled by the truncated operators."""
        return m + self.ell + self.j0 - 1

    def key(self):
        w = self.weight
        return (self.coefficients.key(), w.lam, w.a, w.b, self.rho)


def make_config(ell: int = 2, lam: float = 2.0, a: float = 0.5, b: float = 0.0,
                rho: float | None = None, coefficients=None) -> RecoveryConfig:
    coeffs = lambda_catalog(ell) if coefficients is None else coefficients
    if not isinstance(coeffs, QuasiCoefficients):
        coeffs = QuasiCoefficients(ell, tuple(coeffs))
    return RecoveryConfig(FreudWeight(lam, a, b), coeffs, rho)


def sample(f, nodes) -> np.ndarray:
    """Evaluate ``f`` at ``nodes`` in increasing order.

    Callables flagged ``vectorized = True`` get one array call; anything else is
    called once per node, so call counts equal node counts.
    """
    nodes = np.asarray(nodes, dtype=float)
    if getattr(f, "vectorized", False):
        try:
            vals = np.asarray(f(nodes), dtype=float)
        except Exception as exc:
            raise SamplingError(nodes.tolist(), exc) from exc
        bad = ~np.isfinite(vals)
        if np.any(bad):
            raise SamplingError(float(nodes[np.argmax(bad)]), "non-finite value")
        return vals
    out = np.empty(len(nodes))
    for i, x in enumerate(nodes):
        try:
            v = float(f(float(x)))
        except Exception as exc:
            raise SamplingError(float(x), exc) from exc
        if not math.isfinite(v):
            raise SamplingError(float(x), "non-finite value")
        out[i] = v
    return out


def quasi_matrix(cfg: RecoveryConfig, m: int) -> sparse.csr_matrix:
    """Map samples ``f(x_k)``, ``|k| <= m + ell + j0 - 1``, to coefficients ``c_s``, ``|s| <= m + ell - 1``."""
    K = cfg.sample_radius(m)
    S = m + cfg.ell - 1
    j0 = cfg.j0
    rows, cols, vals = [], [], []
    s = np.arange(-S, S + 1)
    for j in range(-j0, j0 + 1):
        lam = cfg.coefficients.lam(j)
        if lam == 0.0:
            continue
        rows.append(s + S)
        cols.append(s - j + K)
        vals.append(np.full(len(s), lam))
    return sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(2 * S + 1, 2 * K + 1))


def extension_matrix(cfg: RecoveryConfig, m: int) -> sparse.csr_matrix:
    """Map the ``2m + 1`` inner samples to all samples of ``f-bar``.

    Outer values come from the degree ``2 ell - 1`` interpolants through the
    ``2 ell`` samples nearest each end of the interval.
    """
    n = cfg.order
    if m < n:
        raise ValueError(f"extension needs m >= 2*ell = {n}, got m={m}")
    K = cfg.sample_radius(m)
    E = np.zeros((2 * K + 1, 2 * m + 1))
    E[K - m:K + m + 1, :] = np.eye(2 * m + 1)
    outer = np.arange(m + 1, K + 1, dtype=float)
    if len(outer):
        right = BarycentricPolynomial(np.arange(m - n + 1, m + 1, dtype=float), np.zeros(n))
        left = BarycentricPolynomial(np.arange(-m, -m + n, dtype=float), np.zeros(n))
        E[K + m + 1:, 2 * m + 1 - n:] = right.basis(outer)
        E[:K - m, :n] = left.basis(-outer[::-1])
    return sparse.csr_matrix(E)


def _spline(cfg, m, coeffs, n_samples):
    grid = cfg.grid(m)
    S = m + cfg.ell - 1
    return SplineFunction(grid.h, coeffs, -S, cfg.order, grid.bound, grid=grid, n_samples=n_samples)


def apply_Q_truncated(f, m: int, cfg: RecoveryConfig) -> SplineFunction:
    """Truncated scaled quasi-interpolant from ``2(m + ell + j0) - 1`` samples."""
    grid = cfg.grid(m)
    K = cfg.sample_radius(m)
    vals = sample(f, grid.nodes(K))
    return _spline(cfg, m, quasi_matrix(cfg, m) @ vals, len(vals))


def apply_Q_bar(f, m: int, cfg: RecoveryConfig) -> SplineFunction:
    """Quasi-interpolant of the polynomially extended function; uses ``2m + 1`` samples."""
    grid = cfg.grid(m)
    E = extension_matrix(cfg, m)
    vals = sample(f, grid.nodes(m))
    return _spline(cfg, m, quasi_matrix(cfg, m) @ (E @ vals), len(vals))
