"""Seeded, parallel Monte Carlo estimation of the majority-vote error.

Replications are split into fixed-size chunks. Chunk i draws all of its
randomness from the substream ``make_rng(seed, i)``, and chunk results
are reduced in chunk-index order, so the estimate is a pure function of
(config, reps, seed): bit-identical across runs, thread counts, and
scheduling. Threads only change wall time. The worker pool size comes
from the ``threads`` argument, else the VOTEPHASE_THREADS environment
variable, else 1.

Standard errors use the plug-in binomial formula sqrt(v (1 - v) / reps);
replications are independent by construction so no batching correction
is needed.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .model import (
    BadParameter,
    CorrelationModel,
    EnsembleConfig,
    VotePhaseError,
    _as_probability,
    _as_size,
)
from .sampler import RngSeed, make_rng, sample_matrix

# One substream per chunk of this many replications; fixed so that the
# chunk layout (and therefore the result) never depends on thread count.
CHUNK_REPS = 16384

_THREADS_ENV = "VOTEPHASE_THREADS"


class DegenerateVariance(VotePhaseError, ValueError):
    """A vote position showed zero empirical variance; correlations undefined."""


@dataclass(frozen=True)
class McEstimate:
    """An error-rate estimate with its binomial standard error."""

    value: float
    std_error: float
    reps: int
    seed: RngSeed

    def __post_init__(self) -> None:
        _as_size(self.reps, "reps")
        if not 0.0 <= self.value <= 1.0:
            raise BadParameter(f"value must be a probability, got {self.value!r}")
        if not self.std_error >= 0.0:
            raise BadParameter(f"std_error must be nonnegative, got {self.std_error!r}")

    @classmethod
    def from_count(cls, errors: int, reps: int, seed: RngSeed) -> "McEstimate":
        value = errors / reps
        return cls(
            value=value,
            std_error=math.sqrt(value * (1.0 - value) / reps),
            reps=reps,
            seed=seed,
        )

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "std_error": self.std_error,
            "reps": self.reps,
            "seed": self.seed.seed,
            "stream": self.seed.stream,
        }


def _resolve_threads(threads: Union[int, None]) -> int:
    if threads is None:
        raw = os.environ.get(_THREADS_ENV)
        threads = int(raw) if raw else 1
    if threads < 1:
        raise BadParameter(f"threads must be >= 1, got {threads}")
    return threads


def _chunk_sizes(reps: int) -> list:
    full, rest = divmod(reps, CHUNK_REPS)
    return [CHUNK_REPS] * full + ([rest] if rest else [])


def _map_ordered(fn: Callable, sizes: list, threads: int) -> list:
    """Apply fn(chunk_index, chunk_size) and return results in index order."""
    if threads == 1 or len(sizes) == 1:
        return [fn(i, m) for i, m in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(len(sizes)), sizes))


def mc_error(
    cfg: EnsembleConfig,
    reps: int,
    seed: RngSeed,
    threads: Union[int, None] = None,
) -> McEstimate:
    """Monte Carlo estimate of the majority-vote error rate.

    Each replication draws a class from the prior, a vote vector under
    the model at that class's rate, and scores the strict-majority
    prediction against the class.
    """
    reps = _as_size(reps, "reps", minimum=100)
    n, pi = cfg.n, cfg.prior.pi
    p, q = cfg.rates.p, cfg.rates.q

    def chunk(i: int, m: int) -> int:
        rng = make_rng(seed, i)
        labels = rng.random(m) < pi
        rates = np.where(labels, p, q)
        votes = sample_matrix(cfg.model, n, rates, m, rng)
        predicted = 2 * votes.sum(axis=1, dtype=np.int64) > n
        return int((predicted != labels).sum())

    counts = _map_ordered(chunk, _chunk_sizes(reps), _resolve_threads(threads))
    return McEstimate.from_count(sum(counts), reps, seed)


def mc_conditional_error(
    cfg: EnsembleConfig,
    label: int,
    reps: int,
    seed: RngSeed,
    threads: Union[int, None] = None,
) -> McEstimate:
    """Estimate of one class's misclassification probability.

    label=1 estimates P(g <= n/2 | class 1) at rate p; label=0
    estimates P(g > n/2 | class 0) at rate q. These are the two terms
    the normal approximation models with its two Phi expressions.
    """
    if label not in (0, 1):
        raise BadParameter(f"label must be 0 or 1, got {label!r}")
    reps = _as_size(reps, "reps", minimum=100)
    n = cfg.n
    rate = cfg.rates.rate_for_class(label)

    def chunk(i: int, m: int) -> int:
        rng = make_rng(seed, i)
        votes = sample_matrix(cfg.model, n, rate, m, rng)
        majority_one = 2 * votes.sum(axis=1, dtype=np.int64) > n
        wrong = ~majority_one if label == 1 else majority_one
        return int(wrong.sum())

    counts = _map_ordered(chunk, _chunk_sizes(reps), _resolve_threads(threads))
    return McEstimate.from_count(sum(counts), reps, seed)


@dataclass(frozen=True)
class CorrelationSummary:
    """Empirical pairwise correlation structure of sampled votes."""

    n: int
    reps: int
    correlation: np.ndarray
    lag_means: np.ndarray
    off_diagonal_mean: float

    def __post_init__(self) -> None:
        corr = np.asarray(self.correlation, dtype=float)
        lags = np.asarray(self.lag_means, dtype=float)
        if corr.shape != (self.n, self.n) or lags.shape != (self.n - 1,):
            raise BadParameter("correlation summary shapes do not match n")
        corr.flags.writeable = False
        lags.flags.writeable = False
        object.__setattr__(self, "correlation", corr)
        object.__setattr__(self, "lag_means", lags)


def mc_correlation_matrix(
    model: CorrelationModel,
    n: int,
    rate: float,
    reps: int,
    seed: RngSeed,
    threads: Union[int, None] = None,
) -> CorrelationSummary:
    """Unbiased sample correlations between vote positions.

    Accumulates per-chunk first and second moments, reduced in chunk
    order, then forms the sample covariance with ddof=1. ``lag_means``
    holds the mean correlation at each positive lag (the gamma**k
    diagnostic); ``off_diagonal_mean`` averages all distinct pairs (the
    lambda diagnostic).
    """
    n = _as_size(n, "n", minimum=2)
    reps = _as_size(reps, "reps", minimum=10_000)
    r = _as_probability(rate, "rate")

    def chunk(i: int, m: int) -> tuple:
        rng = make_rng(seed, i)
        votes = sample_matrix(model, n, r, m, rng).astype(np.float64)
        return votes.sum(axis=0), votes.T @ votes

    parts = _map_ordered(chunk, _chunk_sizes(reps), _resolve_threads(threads))
    s1 = np.zeros(n)
    s2 = np.zeros((n, n))
    for a, b in parts:
        s1 += a
        s2 += b
    mean = s1 / reps
    cov = (s2 - reps * np.outer(mean, mean)) / (reps - 1)
    variances = np.diag(cov).copy()
    if np.any(variances <= 0.0):
        dead = np.flatnonzero(variances <= 0.0).tolist()
        raise DegenerateVariance(
            f"zero empirical variance at positions {dead}; "
            f"rate {r} too extreme for reps={reps}"
        )
    corr = cov / np.sqrt(np.outer(variances, variances))
    np.fill_diagonal(corr, 1.0)
    lag_means = np.array([np.mean(np.diag(corr, k)) for k in range(1, n)])
    off_mask = ~np.eye(n, dtype=bool)
    return CorrelationSummary(
        n=n,
        reps=reps,
        correlation=corr,
        lag_means=lag_means,
        off_diagonal_mean=float(corr[off_mask].mean()),
    )
