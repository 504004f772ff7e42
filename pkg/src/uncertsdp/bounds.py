"""Closed-form complementarity bounds, uncertainty-relation checks, Gaussian formulas.

The finite-dimensional checks combine SDP values from :mod:`uncertsdp.measures`
into the two error/disturbance trade-offs (measurement disturbance, and the
two kinds of preparation disturbance) and the leakage corollary for channel
complements. The position/momentum part only exposes closed forms; the test
suite compares them with numeric optimization and quadrature.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import Basis, ChoiOperator, ideal_measurement, stinespring
from .measures import (
    MeasureResult,
    best_measurement_error,
    constant_radius,
    epsilon,
    eta,
    eta_hat,
    nu,
)
from .numerics import TOL

__all__ = [
    "BoundReport",
    "GaussianParams",
    "overlap_matrix",
    "overlap_bound",
    "demerit_bound",
    "check_theorem1",
    "check_theorem2",
    "check_corollary1",
    "gaussian_bound",
    "optimal_sigma_f",
    "gaussian_overlap",
    "measurement_gap",
]


@dataclass(frozen=True)
class BoundReport:
    """Outcome of checking one inequality.

    ``slack`` is the margin in the direction of the claimed inequality:
    ``lhs - rhs`` for ``>=`` and ``rhs - lhs`` for ``<=``.
    """

    name: str
    lhs: float
    rhs: float
    sense: str = ">="
    components: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs if self.sense == ">=" else self.rhs - self.lhs

    @property
    def satisfied(self) -> bool:
        return self.slack >= -TOL.bound_slack

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "sense": self.sense,
            "slack": self.slack,
            "satisfied": self.satisfied,
            "components": dict(self.components),
        }


# ---------------------------------------------------------------------------
# closed-form bounds on complementarity


def overlap_matrix(x: Basis, z: Basis) -> np.ndarray:
    """``O[i, j] = |<x_i|z_j>|^2``."""
    if x.dim != z.dim:
        raise ValueError("bases must have the same dimension")
    return np.abs(x.vectors.conj() @ z.vectors.T) ** 2


def overlap_bound(x: Basis, z: Basis) -> float:
    """Lower bound on measurement and preparation complementarity from the largest overlaps."""
    o = overlap_matrix(x, z)
    return float(1.0 - o.max(axis=1).sum() / x.dim)


def demerit_bound(x: Basis, z: Basis, variant: str = "uniform") -> float:
    """Lower bound on demerit complementarity from a fixed constant distribution.

    ``uniform`` compares every outcome distribution with the uniform one;
    ``rowP`` tries each outcome distribution of a basis state as the constant.
    """
    o = overlap_matrix(x, z)  # column j: distribution of x outcomes on input z_j
    d = x.dim
    base = (d - 1) / d
    if variant == "uniform":
        return float(base - 0.5 * np.abs(1.0 / d - o).sum(axis=0).max())
    if variant == "rowP":
        # dist[j, k] = 1/2 sum_i |o[i, j] - o[i, k]|
        dist = 0.5 * np.abs(o[:, :, None] - o[:, None, :]).sum(axis=0)
        return float(base - dist.max(axis=0).min())
    raise ValueError(f"unknown variant {variant!r}")


# ---------------------------------------------------------------------------
# uncertainty relations


def _v(m: MeasureResult | float) -> float:
    return float(m.value) if isinstance(m, MeasureResult) else float(m)


def check_theorem1(e, x: Basis, z: Basis, c_xz=None, c_zx=None, tol: float | None = None
                   ) -> tuple[BoundReport, BoundReport]:
    """Error/measurement-disturbance trade-off, in both orders.

    ``c_xz`` and ``c_zx`` may pass precomputed measurement complementarities
    ``nu_z(Q_x)`` and ``nu_x(Q_z)``.
    """
    eps = epsilon(e, x, tol)
    dist = nu(e, z, tol)
    if c_xz is None:
        c_xz = nu(ideal_measurement(x), z, tol)
    if c_zx is None:
        c_zx = nu(ideal_measurement(z), x, tol)
    ev, nv = max(eps.value, 0.0), max(dist.value, 0.0)
    comps = {
        "epsilon_X": eps.value,
        "nu_Z": dist.value,
        "c_M(X,Z)": _v(c_xz),
        "c_M(Z,X)": _v(c_zx),
        "overlap_bound(X,Z)": overlap_bound(x, z),
        "overlap_bound(Z,X)": overlap_bound(z, x),
        "gaps": {"epsilon_X": eps.gap, "nu_Z": dist.gap},
    }
    r1 = BoundReport("sqrt(2 eps_X) + nu_Z >= c_M(X,Z)", np.sqrt(2 * ev) + dist.value, _v(c_xz), ">=", comps)
    r2 = BoundReport("eps_X + sqrt(2 nu_Z) >= c_M(Z,X)", eps.value + np.sqrt(2 * nv), _v(c_zx), ">=", comps)
    return r1, r2


def check_theorem2(e, x: Basis, z: Basis, c_p=None, c_hat=None, tol: float | None = None
                   ) -> tuple[BoundReport, BoundReport]:
    """Error/preparation-disturbance trade-offs for both disturbance notions."""
    eps = epsilon(e, x, tol)
    et = eta(e, z, tol)
    eh = eta_hat(e, z, tol)
    qx = ideal_measurement(x)
    if c_p is None:
        c_p = eta(qx, z, tol)
    if c_hat is None:
        c_hat = eta_hat(qx, z, tol)
    root = np.sqrt(2 * max(eps.value, 0.0))
    comps = {
        "epsilon_X": eps.value,
        "eta_Z": et.value,
        "eta_hat_Z": eh.value,
        "c_P(X,Z)": _v(c_p),
        "c_P_hat(X,Z)": _v(c_hat),
        "overlap_bound": overlap_bound(x, z),
        "demerit_bound": demerit_bound(x, z),
        "gaps": {"epsilon_X": eps.gap, "eta_Z": et.gap, "eta_hat_Z": eh.gap},
    }
    r1 = BoundReport("sqrt(2 eps_X) + eta_Z >= c_P(X,Z)", root + et.value, _v(c_p), ">=", comps)
    r2 = BoundReport("sqrt(2 eps_X) + eta_hat_Z >= c_P_hat(X,Z)", root + eh.value, _v(c_hat), ">=", comps)
    return r1, r2


def check_corollary1(n: ChoiOperator, x: Basis, z: Basis, c_hat=None, tol: float | None = None) -> BoundReport:
    """Leakage bound: a channel that preserves X information has a nearly constant complement on Z inputs.

    ``lhs`` is the distance of the z-dephased complement from the closest
    constant channel; ``rhs = sqrt(2 eps) + (d-1)/d - c_hat`` with ``eps`` the
    best error of measuring ``x`` after ``n``.
    """
    d = x.dim
    eps = best_measurement_error(n, x, tol)
    _, comp = stinespring(n)
    radius = constant_radius(comp, basis=z, tol=tol)
    if c_hat is None:
        c_hat = eta_hat(ideal_measurement(x), z, tol)
    rhs = np.sqrt(2 * max(eps.value, 0.0)) + (d - 1) / d - _v(c_hat)
    comps = {"epsilon": eps.value, "radius": radius.value, "c_P_hat(X,Z)": _v(c_hat),
             "gaps": {"epsilon": eps.gap, "radius": radius.gap}}
    return BoundReport("radius(Z-dephased complement) <= sqrt(2 eps) + (d-1)/d - c_P_hat", radius.value, rhs, "<=",
                       comps)


# ---------------------------------------------------------------------------
# position and momentum


@dataclass(frozen=True)
class GaussianParams:
    """Position and momentum precisions (units with hbar = 1)."""

    sigma_Q: float
    sigma_P: float

    def __post_init__(self):
        if not (self.sigma_Q > 0 and self.sigma_P > 0):
            raise ValueError("precisions must be positive")

    @property
    def c(self) -> float:
        return 2.0 * self.sigma_Q * self.sigma_P

    @property
    def sigma_P_hat(self) -> float:
        """Smallest momentum spread compatible with position precision ``sigma_Q``."""
        return 1.0 / (2.0 * self.sigma_Q)

    @classmethod
    def from_c(cls, c: float, sigma_P: float = 1.0) -> "GaussianParams":
        return cls(c / (2.0 * sigma_P), sigma_P)


def _c(p) -> float:
    c = p.c if isinstance(p, GaussianParams) else float(p)
    if not c > 0:
        raise ValueError("c must be positive")
    return c


def gaussian_bound(p, kind: str = "measurement") -> float:
    """Lower bound on the error/disturbance sums for position and momentum.

    ``p`` is a :class:`GaussianParams` or the dimensionless ``c`` directly.
    The measurement version is clamped at 0 for ``c >= 1``.
    """
    c = _c(p)
    if kind == "measurement":
        if c >= 1.0:
            return 0.0
        c23 = c ** (2.0 / 3.0)
        return float((1.0 - c * c) / (1.0 + c23 + c23 * c23) ** 1.5)
    if kind == "preparation":
        s = 1.0 + c * c
        c23 = c ** (2.0 / 3.0)
        return float(np.sqrt(s) / (s + c23 * s ** (2.0 / 3.0) + c23 * c23 * s ** (1.0 / 3.0)) ** 1.5)
    raise ValueError(f"kind must be 'measurement' or 'preparation', got {kind!r}")


def optimal_sigma_f(p: GaussianParams) -> float:
    """Test-function width maximizing :func:`measurement_gap` at ``sigma_psi = 0``."""
    c = p.c
    if c >= 1.0:
        raise ValueError("no positive bound for c >= 1")
    c23 = c ** (2.0 / 3.0)
    return float(p.sigma_P / np.sqrt(c23 * (1.0 + c23)))


def gaussian_overlap(sigma_psi: float, sigma_noise: float, sigma_f: float) -> float:
    """Expectation of a Gaussian test function under a noisy Gaussian momentum distribution."""
    if sigma_f <= 0 or sigma_psi < 0 or sigma_noise < 0:
        raise ValueError("widths must be nonnegative and sigma_f positive")
    return float(sigma_f / np.sqrt(sigma_f**2 + sigma_noise**2 + sigma_psi**2))


def measurement_gap(sigma_f: float, p: GaussianParams, sigma_psi: float = 0.0) -> float:
    """Difference of test-function expectations at noise ``sigma_P`` and at the Kennard minimum."""
    return gaussian_overlap(sigma_psi, p.sigma_P, sigma_f) - gaussian_overlap(sigma_psi, p.sigma_P_hat, sigma_f)
