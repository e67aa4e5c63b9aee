"""Solver for the canonical system

    delta       = (1/n) tr D (I + t delta_tilde D)^-1
    delta_tilde = (1/n) tr D_tilde (I + t delta D_tilde)^-1

and the diagonal matrices / second-order traces derived from its solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import NoConvergence
from .profile import VarianceProfile, validate

DEFAULT_TOL = 1e-12
MAX_BISECTIONS = 400


@dataclass(frozen=True, eq=False)
class FixedPoint:
    t: float
    delta: float
    delta_tilde: float
    profile: VarianceProfile = field(repr=False)
    t_diag: Optional[np.ndarray] = field(default=None, repr=False)
    t_tilde_diag: Optional[np.ndarray] = field(default=None, repr=False)
    gamma: Optional[float] = None
    gamma_tilde: Optional[float] = None

    def tr(self, d_power: int, t_power: int) -> float:
        """``(1/n) tr(D^a T^b)``."""
        return float(np.sum(self.profile.d**d_power * self.t_diag**t_power)) / self.profile.n

    def tr_tilde(self, d_power: int, t_power: int) -> float:
        """``(1/n) tr(D_tilde^a T_tilde^b)``."""
        return float(np.sum(self.profile.d_tilde**d_power * self.t_tilde_diag**t_power)) / self.profile.n

    @property
    def one_minus_t2gg(self) -> float:
        return 1.0 - self.t**2 * self.gamma * self.gamma_tilde

    @property
    def residuals(self) -> tuple[float, float]:
        d, dt = self.profile.d, self.profile.d_tilde
        n = self.profile.n
        r1 = self.delta - np.sum(d / (1.0 + self.t * self.delta_tilde * d)) / n
        r2 = self.delta_tilde - np.sum(dt / (1.0 + self.t * self.delta * dt)) / n
        return abs(float(r1)), abs(float(r2))

    def delta_prime(self) -> float:
        """``d delta / dt`` from the linearised system."""
        t, g, gt = self.t, self.gamma, self.gamma_tilde
        return (t * g * gt * self.delta - g * self.delta_tilde) / (1.0 - t * t * g * gt)

    def delta_tilde_prime(self) -> float:
        t, g, gt = self.t, self.gamma, self.gamma_tilde
        return (t * g * gt * self.delta_tilde - gt * self.delta) / (1.0 - t * t * g * gt)


def _delta_tilde_of(profile, t, delta):
    return float(np.sum(profile.d_tilde / (1.0 + t * delta * profile.d_tilde))) / profile.n


def _f(profile, t, delta):
    """Right-hand side of the scalar reduction ``delta = f(t, delta)``."""
    dt = _delta_tilde_of(profile, t, delta)
    return float(np.sum(profile.d / (1.0 + t * dt * profile.d))) / profile.n


def lower_bounds(profile, t) -> tuple[float, float]:
    """A-priori lower bounds on ``(delta, delta_tilde)``."""
    dm, dtm = profile.bound_d, profile.bound_d_tilde
    lo = profile.trace_d / (1.0 + t * dm * dtm)
    lo_tilde = profile.trace_d_tilde / (1.0 + t * profile.c * dm * dtm)
    return lo, lo_tilde


def upper_bounds(profile) -> tuple[float, float]:
    return profile.c * profile.bound_d, profile.bound_d_tilde


def derived_quantities(fp: FixedPoint, profile: Optional[VarianceProfile] = None) -> FixedPoint:
    """Fill ``T``, ``T_tilde``, ``gamma`` and ``gamma_tilde`` from ``(delta, delta_tilde)``."""
    profile = fp.profile if profile is None else profile
    t = fp.t
    t_diag = 1.0 / (1.0 + t * fp.delta_tilde * profile.d)
    t_tilde_diag = 1.0 / (1.0 + t * fp.delta * profile.d_tilde)
    t_diag.setflags(write=False)
    t_tilde_diag.setflags(write=False)
    n = profile.n
    gamma = float(np.sum((profile.d * t_diag) ** 2)) / n
    gamma_tilde = float(np.sum((profile.d_tilde * t_tilde_diag) ** 2)) / n
    return replace(
        fp, profile=profile, t_diag=t_diag, t_tilde_diag=t_tilde_diag, gamma=gamma, gamma_tilde=gamma_tilde
    )


def _bisect(profile, t, lo, hi):
    # g(t, delta) = f(t, delta) / delta is decreasing; find g = 1, i.e. f(delta) - delta = 0.
    # Invariant: f(lo) > lo and f(hi) <= hi.
    for it in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return lo, hi, it
        if _f(profile, t, mid) > mid:
            lo = mid
        else:
            hi = mid
    return lo, hi, MAX_BISECTIONS


def solve(
    profile: VarianceProfile,
    t: float,
    tol: float = DEFAULT_TOL,
    bracket: Optional[Sequence[float]] = None,
) -> FixedPoint:
    """Unique positive solution of the canonical system at ``t``.

    The system is reduced to a scalar equation in ``delta`` which is solved by
    bisection over ``(lower_bound / 2, (1/n) tr D]``; ``delta_tilde`` then follows
    in closed form. ``bracket`` overrides the search interval (it is widened
    automatically if it does not straddle the root).
    """
    profile = validate(profile)
    t = float(t)
    if t < 0 or not np.isfinite(t):
        raise ValueError(f"t must be a finite nonnegative number, got {t}")
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    if t == 0.0:
        fp = FixedPoint(0.0, profile.trace_d, profile.trace_d_tilde, profile)
        return derived_quantities(fp, profile)

    if bracket is None:
        lo, hi = 0.5 * lower_bounds(profile, t)[0], profile.trace_d
    else:
        lo, hi = (float(b) for b in bracket)
        lo = max(lo, np.finfo(float).tiny)
    # widen geometrically until f(lo) > lo and f(hi) <= hi
    for _ in range(200):
        if _f(profile, t, lo) > lo:
            break
        lo *= 0.5
    for _ in range(200):
        if _f(profile, t, hi) <= hi:
            break
        hi *= 2.0
    lo, hi, iters = _bisect(profile, t, lo, hi)
    delta = min((lo, hi), key=lambda x: abs(x - _f(profile, t, x)))
    fp = derived_quantities(FixedPoint(t, delta, _delta_tilde_of(profile, t, delta), profile), profile)
    if max(fp.residuals) >= tol:
        raise NoConvergence(
            f"bisection stopped with residuals {fp.residuals} >= tol={tol} at t={t}", iterations=iters
        )
    return fp


def solve_path(profile: VarianceProfile, t_grid, tol: float = DEFAULT_TOL) -> list[FixedPoint]:
    """Solve along an ascending grid, warm-starting each node from the previous one."""
    profile = validate(profile)
    grid = np.asarray(t_grid, dtype=float).reshape(-1)
    if grid.size == 0:
        return []
    if grid[0] < 0 or np.any(np.diff(grid) < 0):
        raise ValueError("t_grid must be ascending with t_grid[0] >= 0")
    out = []
    prev = None
    for k, t in enumerate(grid):
        # delta is decreasing in t, so the previous solution caps the next one
        bracket = None
        if prev is not None and t > 0:
            bracket = (0.5 * lower_bounds(profile, t)[0], prev.delta * (1.0 + 1e-12))
        try:
            prev = solve(profile, t, tol, bracket=bracket)
        except NoConvergence as exc:
            raise NoConvergence(f"grid index {k} (t={t}): {exc}", exc.iterations, index=k) from exc
        out.append(prev)
    return out
