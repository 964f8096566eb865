"""Freud weights, Mhaskar-Rakhmanov-Saff numbers and the equidistant recovery grid."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class FreudWeight:
    """The weight ``w(x) = exp(-a |x|**lam + b)`` with ``lam > 1`` and ``a > 0``.

    ``b`` only rescales norms by ``exp(b)``; it defaults to 0.
    """

    lam: float = 2.0
    a: float = 0.5
    b: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 1):
            raise ValueError(f"Freud exponent must satisfy lam > 1, got {self.lam!r}")
        if not (np.isfinite(self.a) and self.a > 0):
            raise ValueError(f"Freud scale must satisfy a > 0, got {self.a!r}")
        if not np.isfinite(self.b):
            raise ValueError(f"offset b must be finite, got {self.b!r}")

    def __call__(self, x):
        return weight_eval(x, self)

    def log(self, x):
        return -self.a * np.abs(x) ** self.lam + self.b

    @property
    def nu(self) -> float:
        return mrs_constant(self.lam)

    def mrs(self, m: int) -> float:
        return mrs_number(m, self)


def weight_eval(x, w: FreudWeight):
    """Evaluate ``w`` at ``x`` (scalar or array). Large ``|x|`` underflows to 0."""
    out = np.exp(-w.a * np.abs(np.asarray(x, dtype=float)) ** w.lam + w.b)
    return float(out) if np.ndim(out) == 0 else out


def mrs_constant(lam: float) -> float:
    """``nu_lam = (2**(lam-1) Gamma(lam)**-1 Gamma(lam/2)**2)**(1/lam)``.

    Computed in log space so large ``lam`` does not overflow.
    """
    if lam <= 1:
        raise ValueError("lam must be > 1")
    log_val = (lam - 1) * math.log(2.0) - math.lgamma(lam) + 2.0 * math.lgamma(lam / 2.0)
    return math.exp(log_val / lam)


def mrs_number(m: int, w: FreudWeight) -> float:
    """Mhaskar-Rakhmanov-Saff number ``a_m = nu_lam * m**(1/lam)``."""
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    return mrs_constant(w.lam) * float(m) ** (1.0 / w.lam)


@dataclass(frozen=True)
class RhoBound:
    rho_max_Q: float
    rho_max_R: float
    chosen: float


def select_rho(w: FreudWeight, ell: int, j0: int, kappa: int, safety: float = 0.5) -> RhoBound:
    """Pick the truncation fraction rho from the monotonicity conditions.

    ``rho_max_Q`` solves ``a lam (ell + j0) rho**lam nu**lam = 2 ell - 1`` and
    ``rho_max_R`` is the same condition for the refined weight
    ``a 2**(-kappa lam)`` with ``ell`` in place of ``ell + j0``. The chosen value
    is ``min(0.9, safety * rho_max_Q, safety * rho_max_R)``.
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if j0 < ell - 1:
        raise ValueError(f"need j0 >= ell - 1, got j0={j0}, ell={ell}")
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    nu_pow = mrs_constant(w.lam) ** w.lam
    lam, a = w.lam, w.a
    rho_q = ((2 * ell - 1) / (a * lam * (ell + j0) * nu_pow)) ** (1.0 / lam)
    rho_r = ((2 * ell - 1) / (a * 2.0 ** (-kappa * lam) * lam * ell * nu_pow)) ** (1.0 / lam)
    chosen = min(0.9, safety * rho_q, safety * rho_r)
    return RhoBound(rho_q, rho_r, chosen)


@dataclass(frozen=True)
class RecoveryGrid:
    """Equidistant nodes ``x_k = k h`` with ``h = rho a_m / m``."""

    m: int
    rho: float
    weight: FreudWeight = field(default_factory=FreudWeight)

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m!r}")
        if not 0 < self.rho < 1:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho!r}")

    @property
    def a_m(self) -> float:
        return mrs_number(self.m, self.weight)

    @property
    def h(self) -> float:
        return self.rho * self.a_m / self.m

    @property
    def bound(self) -> float:
        """Right end ``rho a_m`` of the truncation interval, computed as ``m h``.

        Using ``m h`` makes ``node(m) == bound`` hold exactly in floating point.
        """
        return self.m * self.h

    def node(self, k):
        return np.asarray(k) * self.h if np.ndim(k) else k * self.h

    def nodes(self, kmax: int) -> np.ndarray:
        """Nodes ``x_k`` for ``|k| <= kmax`` in increasing order."""
        return np.arange(-kmax, kmax + 1) * self.h


def build_grid(m: int, rho: float, w: FreudWeight) -> RecoveryGrid:
    return RecoveryGrid(m=m, rho=rho, weight=w)


def delta_exponent(p, q, lam: float) -> float:
    """Penalty ``delta_{lam,p,q}`` for measuring in ``L_q`` a function from ``W_p``."""
    ip = 0.0 if math.isinf(float(p)) else 1.0 / float(p)
    iq = 0.0 if math.isinf(float(q)) else 1.0 / float(q)
    if float(p) <= float(q):
        return (1.0 - 1.0 / lam) * (ip - iq)
    return (iq - ip) / lam


def rate_exponent(r, p, q, lam: float, kind: str = "recovery", d: int = 1) -> float:
    """Predicted decay exponent in ``n`` (positive number).

    ``kind="recovery"``: ``r(1 - 1/lam)/d - delta``.
    ``kind="quadrature"``: ``r(1 - 1/lam)/d - (1/lam)(1 - 1/p)``.

    >>> rate_exponent(2, 2, 2, 2.0)
    1.0
    >>> rate_exponent(2, float("inf"), 1, 2.0)
    0.5
    """
    r_lam = r * (1.0 - 1.0 / lam) / d
    if kind == "recovery":
        return r_lam - delta_exponent(p, q, lam)
    if kind == "quadrature":
        ip = 0.0 if math.isinf(float(p)) else 1.0 / float(p)
        return r_lam - (1.0 - ip) / lam
    raise ValueError(f"unknown kind {kind!r}")
