"""Monte Carlo sampling of Kronecker-model channels and exact mutual information.

Reproducibility: trial ``k`` of a batch with seed ``s`` draws from a Philox
stream keyed on ``s`` whose counter starts at ``k << 192``, so samples do not
depend on how trials are split across threads.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from .equivalents import Equivalents
from .errors import InsufficientSamples, NumericalFailure
from .profile import VarianceProfile, validate

log = logging.getLogger(__name__)

BLOCK = 128
MIN_NORMALITY_SAMPLES = 100


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for trial ``index`` of a run seeded with ``seed``."""
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be nonnegative")
    return np.random.Generator(np.random.Philox(key=int(seed), counter=[0, 0, 0, int(index)]))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) entries: ``(g1 + i g2) / sqrt(2)``."""
    g = rng.standard_normal((2,) + tuple(shape))
    return (g[0] + 1j * g[1]) * np.sqrt(0.5)


def sample_channel(profile: VarianceProfile, rng: np.random.Generator) -> np.ndarray:
    """Draw ``Y = D^{1/2} X D_tilde^{1/2}`` with ``X`` i.i.d. CN(0, 1)."""
    profile = validate(profile)
    x = complex_normal(rng, (profile.big_n, profile.n))
    return np.sqrt(profile.d)[:, None] * x * np.sqrt(profile.d_tilde)[None, :]


def gram(y: np.ndarray) -> np.ndarray:
    """``Y Y^*`` (batched over leading axes)."""
    return y @ np.swapaxes(y, -1, -2).conj()


def gram_spectrum(y: np.ndarray, vectors: bool = False):
    g = gram(y)
    try:
        if vectors:
            return np.linalg.eigh(g)
        return np.linalg.eigvalsh(g)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition of YY* failed: {exc}") from exc


def mi_from_spectrum(eigvals: np.ndarray, rho: float, n: int) -> np.ndarray:
    lam = np.clip(eigvals, 0.0, None)  # YY* is PSD; clip roundoff negatives
    return np.sum(np.log1p(rho / n * lam), axis=-1)


def mutual_information(y: np.ndarray, rho: float, method: str = "eigh"):
    """``log det(I + rho/n Y Y^*)`` in nats; ``y`` may carry leading batch axes.

    ``method="eigh"`` uses the Hermitian spectrum, ``"cholesky"`` a triangular
    factorization of ``I + rho/n Y Y^*``.
    """
    if rho < 0:
        raise ValueError(f"rho must be >= 0, got {rho}")
    y = np.asarray(y)
    n = y.shape[-1]
    if method == "eigh":
        return mi_from_spectrum(gram_spectrum(y), rho, n)
    if method == "cholesky":
        big_n = y.shape[-2]
        m = np.eye(big_n) + (rho / n) * gram(y)
        try:
            chol = np.linalg.cholesky(m)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(f"Cholesky factorization failed: {exc}") from exc
        return 2.0 * np.sum(np.log(np.abs(np.diagonal(chol, axis1=-2, axis2=-1))), axis=-1)
    raise ValueError(f"unknown method {method!r}")


@dataclass
class TrialBatch:
    rho: float
    samples: np.ndarray
    seed: int
    profile: Optional[VarianceProfile] = field(default=None, repr=False)

    @property
    def trials(self) -> int:
        return self.samples.size

    @property
    def mean(self) -> float:
        return float(self.samples.mean())

    @property
    def var(self) -> float:
        if self.samples.size < 2:
            raise InsufficientSamples("variance needs at least 2 samples")
        return float(self.samples.var(ddof=1))

    @property
    def stderr(self) -> float:
        return float(np.sqrt(self.var / self.samples.size))


def channel_block(profile, seed, start, stop) -> np.ndarray:
    """Stacked channels for trials ``start..stop-1``."""
    return np.stack([sample_channel(profile, trial_rng(seed, k)) for k in range(start, stop)])


def _blocks(trials):
    return [(s, min(s + BLOCK, trials)) for s in range(0, trials, BLOCK)]


def map_blocks(fn, trials: int, parallelism: int = 1):
    """Apply ``fn(start, stop)`` over fixed trial blocks; results come back in trial order."""
    blocks = _blocks(trials)
    if parallelism <= 1 or len(blocks) == 1:
        return [fn(a, b) for a, b in blocks]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(lambda ab: fn(*ab), blocks))


def run_batch(
    profile: VarianceProfile,
    rho: float,
    trials: int,
    seed: int = 0,
    parallelism: int = 1,
    method: str = "eigh",
) -> TrialBatch:
    """Draw ``trials`` independent realizations of ``I_n(rho)``."""
    profile = validate(profile)
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")

    def work(start, stop):
        try:
            return mutual_information(channel_block(profile, seed, start, stop), rho, method)
        except NumericalFailure as exc:
            raise NumericalFailure(f"trials {start}..{stop - 1}: {exc}", trial=start) from exc

    samples = np.concatenate(map_blocks(work, trials, parallelism))
    log.debug("run_batch: %d trials, N=%d n=%d rho=%g", trials, profile.big_n, profile.n, rho)
    return TrialBatch(float(rho), samples, int(seed), profile)


@dataclass(frozen=True)
class TestReport:
    ks_stat: float
    ks_p: float
    var_ratio: float
    skewness: float
    excess_kurtosis: float
    mean_z: float
    count: int

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        return {
            "ks_stat": self.ks_stat,
            "ks_p": self.ks_p,
            "var_ratio": self.var_ratio,
            "skewness": self.skewness,
            "excess_kurtosis": self.excess_kurtosis,
            "mean_z": self.mean_z,
            "count": self.count,
        }


def standardized_normality(z) -> TestReport:
    """Normality diagnostics of already-standardized samples against N(0, 1)."""
    z = np.asarray(z, dtype=float)
    if z.size < MIN_NORMALITY_SAMPLES:
        raise InsufficientSamples(f"need at least {MIN_NORMALITY_SAMPLES} samples, got {z.size}")
    ks = stats.kstest(z, "norm")
    return TestReport(
        ks_stat=float(ks.statistic),
        ks_p=float(ks.pvalue),
        var_ratio=float(z.var(ddof=1)),
        skewness=float(stats.skew(z)),
        excess_kurtosis=float(stats.kurtosis(z)),
        mean_z=float(z.mean()),
        count=int(z.size),
    )


def normality_test(batch: TrialBatch, equivalents: Equivalents) -> TestReport:
    """Standardize with ``(I - V) / sigma`` and compare to N(0, 1).

    ``var_ratio`` is the sample variance of the standardized values, i.e.
    ``var(I) / sigma^2``.
    """
    return standardized_normality((batch.samples - equivalents.v) / equivalents.sigma)
