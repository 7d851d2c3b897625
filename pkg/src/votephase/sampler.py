"""Seeded generation of correlated vote vectors.

Randomness is counter-based: every public operation derives a fresh
Philox generator from an ``RngSeed`` plus an explicit integer path, so
substreams are reproducible and statistically independent regardless of
evaluation order. A fixed number of uniforms is consumed per vector
independent of outcomes, which keeps mixed-class batches deterministic.

Generative constructions, conditioned on one class at marginal rate r:

* Independent: n i.i.d. Bernoulli(r) votes. With heterogeneity, each
  member first draws its own rate from a Beta with mean r, then votes.
* Geometric: a stationary two-state Markov chain started from
  Bernoulli(r) with transitions t11 = r + gamma (1 - r) and
  t01 = r (1 - gamma). The chain's second eigenvalue is gamma, so the
  lag-k autocorrelation is exactly gamma**k and the marginal stays r.
* Equicorrelated: with probability lam all n members copy one shared
  Bernoulli(r) coin; otherwise they vote independently. Pairwise
  correlation is lam for every pair.

``VoteVector`` is a plain numpy uint8 array of shape (n,); vectors of
vectors are (count, n) matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .model import (
    BadParameter,
    BetaSpec,
    CorrelationModel,
    EnsembleConfig,
    Equicorrelated,
    Geometric,
    Independent,
    _as_probability,
    _as_size,
)

VoteVector = np.ndarray

_U64_MAX = 2**64 - 1


@dataclass(frozen=True)
class RngSeed:
    """Root of all randomness: a 64-bit seed plus a substream index.

    Two RngSeeds differing in either field produce independent streams.
    Derived generators extend the key with integer path components
    (e.g. a chunk index) rather than consuming from a shared stream.
    """

    seed: int
    stream: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise BadParameter(f"{name} must be an integer, got {v!r}")
            if not 0 <= v <= _U64_MAX:
                raise BadParameter(f"{name} must fit in 64 unsigned bits, got {v}")


def make_rng(seed: RngSeed, *path: int) -> np.random.Generator:
    """Philox generator keyed by (seed, stream) and an integer path."""
    ss = np.random.SeedSequence(entropy=(seed.seed, seed.stream), spawn_key=tuple(path))
    return np.random.Generator(np.random.Philox(ss))


def markov_transition_probs(rate: float, gamma: float) -> tuple:
    """Transition probabilities of the geometric-correlation chain.

    t11 = P(vote 1 | previous 1) = r + gamma (1 - r)
    t01 = P(vote 1 | previous 0) = r (1 - gamma)

    Stationarity at Bernoulli(r): (1 - r) t01 + r t11 = r. The lag-1
    autocorrelation is t11 - t01 = gamma.
    """
    r = _as_probability(rate, "rate")
    g = _as_probability(gamma, "gamma", BadParameter)
    return r + g * (1.0 - r), r * (1.0 - g)


def _per_row_rates(rate: Union[float, np.ndarray], count: int) -> np.ndarray:
    rates = np.asarray(rate, dtype=float)
    if rates.ndim == 0:
        rates = np.full(count, float(rates))
    if rates.shape != (count,):
        raise BadParameter(f"rate must be scalar or shape ({count},)")
    return rates


def sample_matrix(
    model: CorrelationModel,
    n: int,
    rate: Union[float, np.ndarray],
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """(count, n) uint8 matrix of vote vectors; one rate per row.

    Per-row rates let mixed-class batches sample both classes in one
    pass with a draw order independent of the label pattern.
    """
    n = _as_size(n, "n")
    count = _as_size(count, "count")
    rates = _per_row_rates(rate, count)
    if isinstance(model, Independent):
        if model.heterogeneity is None:
            return (rng.random((count, n)) < rates[:, None]).astype(np.uint8)
        c = model.heterogeneity
        member_rates = rng.beta(
            rates[:, None] * c, (1.0 - rates[:, None]) * c, size=(count, n)
        )
        return (rng.random((count, n)) < member_rates).astype(np.uint8)
    if isinstance(model, Geometric):
        g = model.gamma
        t11 = rates + g * (1.0 - rates)
        t01 = rates * (1.0 - g)
        u = rng.random((count, n))
        votes = np.empty((count, n), dtype=np.uint8)
        votes[:, 0] = u[:, 0] < rates
        for i in range(1, n):
            threshold = np.where(votes[:, i - 1] == 1, t11, t01)
            votes[:, i] = u[:, i] < threshold
        return votes
    if isinstance(model, Equicorrelated):
        shared_branch = rng.random(count) < model.lam
        shared_vote = (rng.random(count) < rates).astype(np.uint8)
        independent = (rng.random((count, n)) < rates[:, None]).astype(np.uint8)
        return np.where(shared_branch[:, None], shared_vote[:, None], independent)
    raise BadParameter(f"unknown correlation model {model!r}")


def sample_votes(
    model: CorrelationModel, n: int, rate: float, seed: RngSeed
) -> VoteVector:
    """One vote vector conditioned on a class at marginal ``rate``."""
    rng = make_rng(seed)
    return sample_matrix(model, n, rate, 1, rng)[0]


def sample_votes_heterogeneous(spec: BetaSpec, n: int, seed: RngSeed) -> VoteVector:
    """One vote vector with member rates drawn i.i.d. from Beta(spec)."""
    n = _as_size(n, "n")
    rng = make_rng(seed)
    member_rates = rng.beta(spec.alpha, spec.beta, size=n)
    return (rng.random(n) < member_rates).astype(np.uint8)


def sample_labeled_votes(
    cfg: EnsembleConfig, count: int, rng: np.random.Generator
) -> tuple:
    """(labels, votes): class draws from the prior, then vote vectors.

    Labels are drawn first in one block, then a single mixed-rate
    matrix; total uniforms consumed depend only on (model, n, count).
    """
    count = _as_size(count, "count")
    labels = (rng.random(count) < cfg.prior.pi).astype(np.uint8)
    rates = np.where(labels == 1, cfg.rates.p, cfg.rates.q)
    votes = sample_matrix(cfg.model, cfg.n, rates, count, rng)
    return labels, votes


def majority_vote(votes: VoteVector) -> int:
    """1 iff the votes sum to a strict majority; ties go to 0."""
    arr = np.asarray(votes)
    if arr.ndim != 1 or arr.size == 0:
        raise BadParameter("votes must be a nonempty 1-d sequence")
    if not np.isin(arr, (0, 1)).all():
        raise BadParameter("votes must be binary")
    return int(2 * int(arr.sum()) > arr.size)
