"""Deterministic equivalents of the mutual information and of its variance.

All information quantities are in nats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .fixed_point import DEFAULT_TOL, FixedPoint, solve, solve_path
from .profile import VarianceProfile, validate

DEFAULT_GRID = 256


@dataclass(frozen=True)
class Equivalents:
    rho: float
    v: float
    sigma2: float
    fp: FixedPoint

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.sigma2))


def v_from_fixed_point(fp: FixedPoint) -> float:
    p, rho = fp.profile, fp.t
    return float(
        np.sum(np.log1p(rho * fp.delta * p.d_tilde))
        + np.sum(np.log1p(rho * fp.delta_tilde * p.d))
        - p.n * rho * fp.delta * fp.delta_tilde
    )


def sigma2_from_fixed_point(fp: FixedPoint) -> float:
    return float(-np.log1p(-(fp.t**2) * fp.gamma * fp.gamma_tilde))


def v_of_rho(profile: VarianceProfile, rho: float, tol: float = DEFAULT_TOL) -> Equivalents:
    """``V_n(rho)`` and ``sigma_n^2(rho)`` from the fixed point at ``t = rho``."""
    if rho < 0:
        raise ValueError(f"rho must be >= 0, got {rho}")
    fp = solve(profile, rho, tol)
    return Equivalents(float(rho), v_from_fixed_point(fp), sigma2_from_fixed_point(fp), fp)


def variance_bounds(fp: FixedPoint) -> tuple[float, float]:
    """Lower and upper bounds ``(m^2, M^2)`` on ``sigma^2`` evaluated on this profile.

    They follow from ``(n/N) delta^2 <= gamma``, ``delta_tilde^2 <= gamma_tilde`` and
    ``1 - t^2 gamma gamma_tilde >= (n/N)^2 delta^2 delta_tilde^2 / (d_max^2 d_tilde_max^2)``.
    """
    p, t = fp.profile, fp.t
    dd = (fp.delta * fp.delta_tilde) ** 2
    lower = -np.log1p(-(t**2) * dd / p.c)
    upper = -np.log(dd / (p.c**2 * p.bound_d**2 * p.bound_d_tilde**2))
    return float(lower), float(upper)


def dgamma_dt(fp: FixedPoint) -> tuple[float, float]:
    """Closed-form ``(d gamma/dt, d gamma_tilde/dt)``."""
    den = fp.one_minus_t2gg
    dg = -2.0 * fp.tr(3, 3) * fp.tr_tilde(1, 2) / den
    dgt = -2.0 * fp.tr_tilde(3, 3) * fp.tr(1, 2) / den
    return dg, dgt


def eta_from_fixed_point(fp: FixedPoint) -> float:
    t, g, gt = fp.t, fp.gamma, fp.gamma_tilde
    den = 1.0 - t * t * g * gt
    tr_dt2 = fp.tr(1, 2)
    term1 = -(t**2) * g * fp.tr_tilde(3, 3) * tr_dt2 / den
    term2 = t * gt * fp.tr(2, 3)
    term3 = t**3 * gt**2 * fp.tr(3, 3) * tr_dt2 / den
    return (term1 + term2 + term3) / den


def eta_symmetric_from_fixed_point(fp: FixedPoint) -> float:
    """Same quantity as :func:`eta_from_fixed_point`, in the form symmetric in both sides."""
    t, g, gt = fp.t, fp.gamma, fp.gamma_tilde
    dg, dgt = dgamma_dt(fp)
    return 0.5 * (t * t * g * dgt + t * t * dg * gt + 2.0 * t * g * gt) / fp.one_minus_t2gg


def eta(profile: VarianceProfile, t: float, tol: float = DEFAULT_TOL) -> float:
    """Integrand ``eta_n(t)``, equal to half the derivative of ``sigma_n^2`` in ``t``."""
    return eta_from_fixed_point(solve(profile, t, tol))


def simpson(values, a: float, b: float) -> float:
    """Composite Simpson rule on an odd number of equispaced samples over ``[a, b]``."""
    y = np.asarray(values, dtype=float)
    m = y.size - 1
    if m < 2 or m % 2:
        raise ValueError("composite Simpson needs an even number of intervals")
    h = (b - a) / m
    return float(h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum()))


def spectral_scale(profile: VarianceProfile) -> float:
    """Rough upper edge of the spectrum of ``Y Y^*/n``: ``d_max d_tilde_max (1 + sqrt(N/n))^2``."""
    return profile.bound_d * profile.bound_d_tilde * (1.0 + np.sqrt(profile.c)) ** 2


def quadrature_nodes(profile: VarianceProfile, rho: float, grid_size: int):
    """Nodes and Jacobian for Simpson's rule on ``[0, rho]`` in a graded variable.

    With ``t = tau (exp(s L) - 1)``, ``s`` uniform on ``[0, 1]``, ``tau`` the inverse
    spectral scale and ``L = log(1 + rho / tau)``, integrands built from terms
    ``1 / (1 + t lambda)`` are smooth in ``s`` over the whole spectrum.
    """
    if grid_size < 16:
        raise ValueError(f"grid_size must be >= 16, got {grid_size}")
    intervals = grid_size + (grid_size % 2)
    tau = 1.0 / spectral_scale(profile)
    span = np.log1p(rho / tau)
    s = np.linspace(0.0, 1.0, intervals + 1)
    t = tau * np.expm1(s * span)
    t[-1] = rho
    jac = tau * span * np.exp(s * span)
    return t, jac


def _integrate(profile, rho, grid_size, tol, integrand):
    t, jac = quadrature_nodes(profile, rho, grid_size)
    path = solve_path(profile, t, tol)
    return simpson([integrand(fp) * j for fp, j in zip(path, jac)], 0.0, 1.0)


def sigma2_by_integration(
    profile: VarianceProfile, rho: float, grid_size: int = DEFAULT_GRID, tol: float = DEFAULT_TOL
) -> float:
    """``2 * integral_0^rho eta(t) dt``, composite Simpson over a warm-started solve path.

    ``eta`` is half the derivative of the variance, hence the factor 2.
    """
    if rho == 0:
        return 0.0
    profile = validate(profile)
    return 2.0 * _integrate(profile, rho, grid_size, tol, eta_from_fixed_point)


def v_by_integration(
    profile: VarianceProfile, rho: float, grid_size: int = DEFAULT_GRID, tol: float = DEFAULT_TOL
) -> float:
    """``integral_0^rho n delta(t) delta_tilde(t) dt``."""
    if rho == 0:
        return 0.0
    profile = validate(profile)
    return _integrate(profile, rho, grid_size, tol, lambda fp: profile.n * fp.delta * fp.delta_tilde)


def outage(profile: VarianceProfile, rho: float, threshold_r: float, tol: float = DEFAULT_TOL) -> float:
    """Gaussian approximation of ``P(I_n(rho) < threshold_r)``."""
    if rho <= 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    eq = v_of_rho(profile, rho, tol)
    return outage_from(eq, threshold_r)


def outage_from(eq: Equivalents, threshold_r: float) -> float:
    return float(ndtr((threshold_r - eq.v) / eq.sigma))
