"""Empirical checks of the resolvent ``H(t) = (t/n Y Y^* + I)^-1`` against its
deterministic equivalents, and log-log fits of the error decay in ``n``."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .fixed_point import DEFAULT_TOL, solve
from .montecarlo import channel_block, gram, gram_spectrum, map_blocks
from .profile import VarianceProfile, generate, validate


def resolvent(y: np.ndarray, rho: float) -> np.ndarray:
    n = y.shape[-1]
    big_n = y.shape[-2]
    return np.linalg.inv(np.eye(big_n) + (rho / n) * gram(y))


def resolvent_identity_residual(y: np.ndarray, rho: float) -> float:
    """Max-norm of ``H - (I - rho/n H Y Y^*)`` for one realization."""
    h = resolvent(y, rho)
    n = y.shape[-1]
    rhs = np.eye(y.shape[-2]) - (rho / n) * h @ gram(y)
    return float(np.max(np.abs(h - rhs)))


def resolvent_spectrum(y: np.ndarray, rho: float) -> np.ndarray:
    """Eigenvalues of ``H``, obtained from the spectrum of ``Y Y^*``."""
    lam = np.clip(gram_spectrum(y), 0.0, None)
    return 1.0 / (1.0 + rho / y.shape[-1] * lam)


def _beta_and_moments(y, d, rho, kmax):
    """Per-realization ``(1/n) tr(D H)`` and spectral moments ``(1/n) tr (YY^*/n)^k``, k=1..kmax."""
    n = y.shape[-1]
    if np.all(d == d[0]):
        lam = np.clip(gram_spectrum(y), 0.0, None)
        beta = d[0] * np.sum(1.0 / (1.0 + rho / n * lam), axis=-1) / n
    else:
        lam, u = gram_spectrum(y, vectors=True)
        lam = np.clip(lam, 0.0, None)
        # tr(D H) = sum_k (sum_i d_i |U_ik|^2) / (1 + rho lam_k / n)
        weights = np.einsum("i,...ik->...k", d, np.abs(u) ** 2)
        beta = np.sum(weights / (1.0 + rho / n * lam), axis=-1) / n
    if kmax == 0:
        return beta, np.empty(beta.shape + (0,))
    x = lam / n
    moments = np.stack([np.sum(x**k, axis=-1) / n for k in range(1, kmax + 1)], axis=-1)
    return beta, moments


def beta_samples(y: np.ndarray, d: np.ndarray, rho: float) -> np.ndarray:
    """Per-realization ``(1/n) tr(D H)`` for a stack of channels."""
    return _beta_and_moments(y, d, rho, 0)[0]


def wishart_trace_moments(big_n: int, n: int, kmax: int) -> list:
    """Exact ``E tr (X X^*)^k`` for ``X`` an ``N x n`` matrix of i.i.d. CN(0, 1) entries.

    Haagerup-Thorbjornsen recursion; values are exact integers.
    """
    m = [Fraction(big_n), Fraction(big_n * n)]
    for k in range(1, kmax):
        nxt = (Fraction(2 * k + 1) * (big_n + n) * m[k] + Fraction(k - 1) * (k * k - (big_n - n) ** 2) * m[k - 1]) / (
            k + 2
        )
        m.append(nxt)
    return [int(v) for v in m[1 : kmax + 1]]


def moment_means(profile: VarianceProfile, kmax: int) -> np.ndarray:
    """Exact means of ``(1/n) tr (Y Y^*/n)^k`` for ``k = 1..kmax``.

    Any order for constant profiles; orders 1 and 2 (Wick pairings) otherwise.
    """
    d, dt, n = profile.d, profile.d_tilde, profile.n
    if profile.is_constant():
        scale = d[0] * dt[0]
        raw = wishart_trace_moments(profile.big_n, n, kmax)
        return np.array([float(Fraction(r) * Fraction(scale) ** k / Fraction(n) ** (k + 1)) for k, r in enumerate(raw, 1)])
    if kmax > 2:
        raise ValueError("exact moments above order 2 are only available for constant profiles")
    sd, sdt = d.sum(), dt.sum()
    means = [sd * sdt / n**2, (np.sum(d**2) * sdt**2 + sd**2 * np.sum(dt**2)) / n**3]
    return np.array(means[:kmax])


def control_variate_mean(values, controls, control_means):
    """Regression-adjusted mean of ``values`` using controls with known means.

    Returns ``(estimate, stderr)``.
    """
    values = np.asarray(values, dtype=float)
    t = values.size
    if controls is None or controls.shape[-1] == 0 or t <= controls.shape[-1] + 1:
        se = values.std(ddof=1) / np.sqrt(t) if t > 1 else float("nan")
        return float(values.mean()), float(se)
    c = controls - controls.mean(axis=0)
    scale = c.std(axis=0)
    scale[scale == 0] = 1.0
    c = c / scale
    coef, *_ = np.linalg.lstsq(c, values - values.mean(), rcond=None)
    shift = (controls.mean(axis=0) - control_means) / scale
    resid = values - values.mean() - c @ coef
    dof = t - controls.shape[-1] - 1
    return float(values.mean() - shift @ coef), float(np.sqrt(resid @ resid / dof / t))


def alpha_samples(profile, rho, trials, seed=0, parallelism=1, kmax=0):
    """Per-trial ``(1/n) tr(D H)``; with ``kmax > 0`` also the spectral moments used as controls."""
    profile = validate(profile)
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")

    def work(start, stop):
        beta, mom = _beta_and_moments(channel_block(profile, seed, start, stop), profile.d, rho, kmax)
        return np.column_stack([beta, mom])

    out = np.concatenate(map_blocks(work, trials, parallelism))
    if kmax == 0:
        return out[:, 0]
    return out[:, 0], out[:, 1:]


def estimate_alpha(profile, rho, trials, seed=0, parallelism=1, control_order=0):
    """``(alpha_hat, stderr)``; ``control_order`` spectral moments serve as control variates."""
    profile = validate(profile)
    if rho == 0:
        return profile.trace_d, 0.0
    if control_order == 0:
        beta = alpha_samples(profile, rho, trials, seed, parallelism)
        return control_variate_mean(beta, None, None)
    beta, mom = alpha_samples(profile, rho, trials, seed, parallelism, kmax=control_order)
    return control_variate_mean(beta, mom, moment_means(profile, control_order))


def empirical_alpha(profile, rho, trials, seed=0, parallelism=1, control_order=0) -> float:
    """Monte Carlo estimate of ``alpha = (1/n) tr D E[H(rho)]``."""
    return estimate_alpha(profile, rho, trials, seed, parallelism, control_order)[0]


def r_matrices(profile: VarianceProfile, rho: float, alpha_hat: float):
    """``R_tilde = (I + rho alpha D_tilde)^-1``, ``alpha_tilde = (1/n) tr D_tilde R_tilde``
    and ``R = (I + rho alpha_tilde D)^-1``.

    Returns ``(r_diag, r_tilde_diag, alpha_tilde_hat)``.
    """
    profile = validate(profile)
    if alpha_hat <= 0:
        raise ValueError(f"alpha_hat must be > 0, got {alpha_hat}")
    r_tilde = 1.0 / (1.0 + rho * alpha_hat * profile.d_tilde)
    alpha_tilde = float(np.sum(profile.d_tilde * r_tilde)) / profile.n
    r = 1.0 / (1.0 + rho * alpha_tilde * profile.d)
    return r, r_tilde, alpha_tilde


@dataclass
class LogLogFit:
    slope: float
    stderr: float
    intercept: float


def loglog_fit(ns, errors) -> LogLogFit:
    """OLS slope of ``log(error)`` against ``log(n)`` with its standard error."""
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    if x.size < 3:
        raise ValueError("need at least 3 points for a slope with a standard error")
    if not np.all(np.isfinite(y)):
        return LogLogFit(float("nan"), float("nan"), float("nan"))
    res = stats.linregress(x, y)
    return LogLogFit(float(res.slope), float(res.stderr), float(res.intercept))


@dataclass
class DiagnosticSeries:
    ns: list
    errors: list
    fitted_exponent: float
    stderr: float = float("nan")

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.ns, self.ns[1:])):
            raise ValueError("ns must be strictly increasing")
        if any(e < 0 for e in self.errors):
            raise ValueError("errors must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "ns": list(self.ns),
            "errors": list(self.errors),
            "fitted_exponent": self.fitted_exponent,
            "stderr": self.stderr,
        }


@dataclass
class RateReport:
    rho: float
    seed: int
    trials: list
    alpha_gap: DiagnosticSeries
    trace_gap: DiagnosticSeries
    alpha_stderr: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "seed": self.seed,
            "trials": list(self.trials),
            "alpha_gap": self.alpha_gap.to_dict(),
            "trace_gap": self.trace_gap.to_dict(),
            "alpha_stderr": list(self.alpha_stderr),
        }


def trials_for(n: int, n0: int, trials_per_n: int, scaling: str = "quadratic") -> int:
    """Trials at dimension ``n``: ``trials_per_n`` at ``n0``, grown like ``(n/n0)^2``."""
    if scaling == "quadratic":
        return int(np.ceil(trials_per_n * (n / n0) ** 2))
    if scaling == "constant":
        return int(trials_per_n)
    raise ValueError(f"unknown scaling {scaling!r}")


def rate_fit(
    family: tuple,
    rho: float,
    ns: Sequence[int],
    trials_per_n: int,
    seed: int = 0,
    ratio: float = 1.0,
    scaling: str = "quadratic",
    parallelism: int = 1,
    tol: float = DEFAULT_TOL,
    control_order: Optional[int] = None,
) -> RateReport:
    """Measure ``|alpha_hat - delta|`` and ``|alpha_hat - (1/n) tr D R|`` across ``ns``.

    ``family`` is ``(kind, params)`` as accepted by :func:`generate`; at each
    ``n`` the profile has ``N = round(ratio * n)`` rows. Each ``n`` uses its
    own seed, derived from ``seed`` and ``n``.

    ``control_order`` sets how many spectral moments are used as control
    variates; by default 6 for constant profiles and 2 otherwise. Pass 0 for
    the plain sample mean.
    """
    ns = [int(v) for v in ns]
    if len(ns) < 3:
        raise ValueError("rate_fit needs at least 3 dimensions")
    kind, params = family
    alpha_gaps, trace_gaps, trial_counts, ses = [], [], [], []
    for n in ns:
        profile = validate(generate(kind, max(1, round(ratio * n)), n, params))
        trials = trials_for(n, ns[0], trials_per_n, scaling)
        n_seed = int(np.random.SeedSequence([seed, n]).generate_state(1, np.uint64)[0])
        order = control_order
        if order is None:
            order = 6 if profile.is_constant() else 2
        alpha_hat, se = estimate_alpha(profile, rho, trials, n_seed, parallelism, order)
        fp = solve(profile, rho, tol)
        if rho == 0:
            r = np.ones(profile.big_n)
        else:
            r, _, _ = r_matrices(profile, rho, alpha_hat)
        alpha_gaps.append(abs(alpha_hat - fp.delta))
        trace_gaps.append(abs(alpha_hat - float(np.sum(profile.d * r)) / profile.n))
        trial_counts.append(trials)
        ses.append(se)

    def series(errors):
        if min(errors) == 0:
            return DiagnosticSeries(ns, errors, float("nan"))
        fit = loglog_fit(ns, errors)
        return DiagnosticSeries(ns, errors, fit.slope, fit.stderr)

    return RateReport(float(rho), int(seed), trial_counts, series(alpha_gaps), series(trace_gaps), ses)
