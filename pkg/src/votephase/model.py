"""Domain types for correlated majority-vote ensembles.

An ensemble of n binary classifiers votes on an input; the ensemble
predicts class 1 when the vote sum exceeds n/2 (ties go to class 0).
Members share a true-positive rate p on class-1 inputs and a
false-positive rate q on class-0 inputs, and within each class their
votes may be dependent. Three dependence regimes are supported:

* ``Independent``: zero pairwise correlation. Optionally the
  per-classifier rates are themselves random, drawn from a Beta
  distribution whose mean matches the ensemble rate (heterogeneity).
* ``Geometric``: correlation gamma**|i - j| between members i and j,
  realized by a stationary two-state Markov chain along the ensemble
  ordering.
* ``Equicorrelated``: constant correlation lam between every pair,
  realized by a shared-coin mixture. The vote-sum variance grows like
  n**2 under this model, so no law of large numbers applies.

Every type here is immutable and validates eagerly: construction either
succeeds with all invariants satisfied or raises a typed error. Rates,
priors and correlation parameters live in the open interval (0, 1);
degenerate endpoint values are rejected rather than silently handled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any, Iterator, Union


class VotePhaseError(Exception):
    """Base class for all errors raised by this package."""


class RateOutOfRange(VotePhaseError, ValueError):
    """A probability-like rate fell outside the open interval (0, 1)."""


class BadParameter(VotePhaseError, ValueError):
    """A model or distribution parameter violated its domain."""


class BadSize(VotePhaseError, ValueError):
    """An ensemble size, resolution, or repetition count was invalid."""


def _as_float(value: Any, name: str, err: type = BadParameter) -> float:
    """Coerce to float, rejecting NaN and infinities."""
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise err(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(out):
        raise err(f"{name} must be finite, got {out!r}")
    return out


def _as_probability(value: Any, name: str, err: type = RateOutOfRange) -> float:
    """Coerce to float and require strict interior of (0, 1)."""
    out = _as_float(value, name, err)
    if not 0.0 < out < 1.0:
        raise err(f"{name} must lie strictly inside (0, 1), got {out!r}")
    return out


def _as_size(value: Any, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise BadSize(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise BadSize(f"{name} must be >= {minimum}, got {value}")
    return value


@dataclass(frozen=True)
class RatePair:
    """Per-class vote rates of an ensemble member.

    ``p`` is the probability of voting 1 on a class-1 input (true
    positive rate); ``q`` the probability of voting 1 on a class-0
    input (false positive rate). Both are interpreted as ensemble
    averages when members are heterogeneous.
    """

    p: float
    q: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", _as_probability(self.p, "p"))
        object.__setattr__(self, "q", _as_probability(self.q, "q"))

    def rate_for_class(self, label: int) -> float:
        """Marginal vote-1 rate conditioned on the true class label."""
        if label not in (0, 1):
            raise BadParameter(f"label must be 0 or 1, got {label!r}")
        return self.p if label == 1 else self.q


@dataclass(frozen=True)
class Prior:
    """Marginal probability ``pi`` of class 1."""

    pi: float

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "pi", _as_probability(self.pi, "pi", BadParameter)
        )


@dataclass(frozen=True)
class BetaSpec:
    """Shape parameters of a Beta distribution over per-member rates."""

    alpha: float
    beta: float

    _MEAN_TOL = 1e-12

    def __post_init__(self) -> None:
        for name in ("alpha", "beta"):
            v = _as_float(getattr(self, name), name)
            if v <= 0.0:
                raise BadParameter(f"{name} must be positive, got {v!r}")
            object.__setattr__(self, name, v)

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    @property
    def concentration(self) -> float:
        return self.alpha + self.beta

    @classmethod
    def from_mean_concentration(cls, mean: float, concentration: float) -> "BetaSpec":
        """Build the spec with given mean and alpha + beta total.

        The reconstructed mean must match the request to within 1e-12;
        with IEEE doubles this holds for any valid inputs, so a failure
        indicates a bug rather than a conditioning problem.
        """
        m = _as_probability(mean, "mean", BadParameter)
        c = _as_float(concentration, "concentration")
        if c <= 0.0:
            raise BadParameter(f"concentration must be positive, got {c!r}")
        spec = cls(alpha=m * c, beta=(1.0 - m) * c)
        if abs(spec.mean - m) > cls._MEAN_TOL:
            raise BadParameter(
                f"mean round-trip error {abs(spec.mean - m):.3e} exceeds 1e-12"
            )
        return spec


class CorrelationModel:
    """Marker base for the three dependence regimes."""

    kind: str = ""

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Independent(CorrelationModel):
    """Conditionally independent votes.

    ``heterogeneity`` is an optional Beta concentration (alpha + beta).
    When set, each member's per-class rate is drawn once from a Beta
    distribution with that concentration whose mean equals the ensemble
    rate; the unconditional vote-sum distribution is then still
    Binomial(n, rate), but individual members differ.
    """

    heterogeneity: Union[float, None] = None

    kind = "independent"

    def __post_init__(self) -> None:
        if self.heterogeneity is not None:
            c = _as_float(self.heterogeneity, "heterogeneity")
            if c <= 0.0:
                raise BadParameter(
                    f"heterogeneity concentration must be positive, got {c!r}"
                )
            object.__setattr__(self, "heterogeneity", c)

    def beta_spec(self, rate: float) -> Union[BetaSpec, None]:
        """Per-member rate distribution at the given mean, or None."""
        if self.heterogeneity is None:
            return None
        return BetaSpec.from_mean_concentration(rate, self.heterogeneity)

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.heterogeneity is not None:
            out["heterogeneity"] = self.heterogeneity
        return out


@dataclass(frozen=True)
class Geometric(CorrelationModel):
    """Correlation gamma**|i - j| between members i and j.

    Realized by a stationary two-state Markov chain whose second
    eigenvalue equals gamma, so lag-k correlations are exactly gamma**k.
    """

    gamma: float

    kind = "geometric"

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "gamma", _as_probability(self.gamma, "gamma", BadParameter)
        )

    def to_dict(self) -> dict:
        return {"kind": self.kind, "gamma": self.gamma}


@dataclass(frozen=True)
class Equicorrelated(CorrelationModel):
    """Constant pairwise correlation lam between all members.

    Realized as a mixture: with probability lam all members copy one
    shared coin flip, otherwise all vote independently. The vote-sum
    variance contains an n**2 term, so the per-vote asymptotic variance
    diverges and the usual normal limit does not hold.
    """

    lam: float

    kind = "equicorrelated"

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "lam", _as_probability(self.lam, "lambda", BadParameter)
        )

    def to_dict(self) -> dict:
        return {"kind": self.kind, "lambda": self.lam}


def model_from_dict(data: dict) -> CorrelationModel:
    """Inverse of ``CorrelationModel.to_dict``."""
    if not isinstance(data, dict) or "kind" not in data:
        raise BadParameter(f"correlation model must be a dict with 'kind', got {data!r}")
    kind = data["kind"]
    if kind == "independent":
        return Independent(heterogeneity=data.get("heterogeneity"))
    if kind == "geometric":
        if "gamma" not in data:
            raise BadParameter("geometric model requires 'gamma'")
        return Geometric(gamma=data["gamma"])
    if kind == "equicorrelated":
        if "lambda" not in data:
            raise BadParameter("equicorrelated model requires 'lambda'")
        return Equicorrelated(lam=data["lambda"])
    raise BadParameter(f"unknown correlation model kind {kind!r}")


@dataclass(frozen=True)
class EnsembleConfig:
    """Complete description of one finite ensemble experiment."""

    n: int
    rates: RatePair
    prior: Prior
    model: CorrelationModel = field(default_factory=Independent)

    def __post_init__(self) -> None:
        object.__setattr__(self, "n", _as_size(self.n, "n"))
        if not isinstance(self.rates, RatePair):
            raise BadParameter(f"rates must be a RatePair, got {self.rates!r}")
        if not isinstance(self.prior, Prior):
            raise BadParameter(f"prior must be a Prior, got {self.prior!r}")
        if not isinstance(self.model, CorrelationModel):
            raise BadParameter(
                f"model must be a CorrelationModel, got {self.model!r}"
            )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.rates.p,
            "q": self.rates.q,
            "pi": self.prior.pi,
            "model": self.model.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EnsembleConfig":
        required = {"n", "p", "q", "pi", "model"}
        missing = required - set(data)
        if missing:
            raise BadParameter(f"config missing keys: {sorted(missing)}")
        return cls(
            n=data["n"],
            rates=RatePair(p=data["p"], q=data["q"]),
            prior=Prior(pi=data["pi"]),
            model=model_from_dict(data["model"]),
        )


def validate_config(cfg: EnsembleConfig) -> EnsembleConfig:
    """Re-check every invariant of an existing config and return it.

    Constructors already validate, so this is a defensive re-validation
    for configs that crossed a serialization or FFI boundary.
    """
    if not isinstance(cfg, EnsembleConfig):
        raise BadParameter(f"expected EnsembleConfig, got {cfg!r}")
    EnsembleConfig.from_dict(cfg.to_dict())
    return cfg


ASYMPTOTIC = "asymptotic"

_GridSize = Union[int, str]


@dataclass(frozen=True)
class GridSpec:
    """Rectangular sweep over the (p, q) unit square.

    Axis values are generated with exact decimal index arithmetic from
    the endpoint reprs, so a 0.01-step axis contains 0.5 exactly rather
    than a float-accumulation neighbor of it.

    ``resolution`` is the number of points per axis, either one integer
    for both axes or a (p_axis, q_axis) pair. A resolution-1 axis is the
    degenerate single-point case and requires min == max. ``n`` is a
    positive ensemble size or the string ``"asymptotic"`` for the
    infinite-ensemble limit.
    """

    p_min: float
    p_max: float
    q_min: float
    q_max: float
    resolution: Union[int, tuple]
    n: _GridSize
    prior: Prior
    model: CorrelationModel = field(default_factory=Independent)

    def __post_init__(self) -> None:
        for name in ("p_min", "p_max", "q_min", "q_max"):
            object.__setattr__(
                self, name, _as_probability(getattr(self, name), name)
            )
        res = self.resolution
        if isinstance(res, int) and not isinstance(res, bool):
            res = (res, res)
        try:
            rp, rq = res
        except (TypeError, ValueError):
            raise BadSize(
                f"resolution must be an int or an (int, int) pair, got {self.resolution!r}"
            ) from None
        rp = _as_size(rp, "p-axis resolution")
        rq = _as_size(rq, "q-axis resolution")
        object.__setattr__(self, "resolution", (rp, rq))
        self._check_axis("p", self.p_min, self.p_max, rp)
        self._check_axis("q", self.q_min, self.q_max, rq)
        if self.n != ASYMPTOTIC:
            object.__setattr__(self, "n", _as_size(self.n, "n"))
        if not isinstance(self.prior, Prior):
            raise BadParameter(f"prior must be a Prior, got {self.prior!r}")
        if not isinstance(self.model, CorrelationModel):
            raise BadParameter(f"model must be a CorrelationModel, got {self.model!r}")

    @staticmethod
    def _check_axis(name: str, lo: float, hi: float, res: int) -> None:
        if res == 1:
            if lo != hi:
                raise BadParameter(
                    f"{name}-axis with resolution 1 requires min == max, "
                    f"got [{lo}, {hi}]"
                )
        elif not lo < hi:
            raise BadParameter(f"{name}-axis requires min < max, got [{lo}, {hi}]")

    @property
    def is_asymptotic(self) -> bool:
        return self.n == ASYMPTOTIC

    @staticmethod
    def _axis(lo: float, hi: float, res: int) -> list:
        if res == 1:
            return [lo]
        lo_d, hi_d = Decimal(repr(lo)), Decimal(repr(hi))
        step = (hi_d - lo_d) / (res - 1)
        return [float(lo_d + i * step) for i in range(res)]

    def p_values(self) -> list:
        return self._axis(self.p_min, self.p_max, self.resolution[0])

    def q_values(self) -> list:
        return self._axis(self.q_min, self.q_max, self.resolution[1])

    def points(self) -> Iterator[tuple]:
        """Row-major iteration: p outer, q inner."""
        qs = self.q_values()
        for p in self.p_values():
            for q in qs:
                yield p, q

    @classmethod
    def from_step(
        cls,
        p_min: float,
        p_max: float,
        q_min: float,
        q_max: float,
        step: float,
        n: _GridSize,
        prior: Prior,
        model: CorrelationModel = Independent(),
    ) -> "GridSpec":
        """Build a spec from a common axis step instead of a count.

        Each axis span must be an exact whole multiple of the step in
        decimal arithmetic; otherwise the grid would silently miss its
        stated endpoint.
        """
        step_d = Decimal(repr(_as_float(step, "step")))
        if step_d <= 0:
            raise BadParameter(f"step must be positive, got {step!r}")
        resolutions = []
        for name, lo, hi in (("p", p_min, p_max), ("q", q_min, q_max)):
            span = Decimal(repr(float(hi))) - Decimal(repr(float(lo)))
            count = span / step_d
            if count != count.to_integral_value() or count < 0:
                raise BadParameter(
                    f"{name}-axis span {span} is not a whole multiple of step {step_d}"
                )
            resolutions.append(int(count) + 1)
        return cls(
            p_min=p_min,
            p_max=p_max,
            q_min=q_min,
            q_max=q_max,
            resolution=tuple(resolutions),
            n=n,
            prior=prior,
            model=model,
        )

    def to_dict(self) -> dict:
        rp, rq = self.resolution
        return {
            "p_min": self.p_min,
            "p_max": self.p_max,
            "q_min": self.q_min,
            "q_max": self.q_max,
            "resolution": rp if rp == rq else [rp, rq],
            "n": self.n,
            "pi": self.prior.pi,
            "model": self.model.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GridSpec":
        required = {"p_min", "p_max", "q_min", "q_max", "resolution", "n", "pi", "model"}
        missing = required - set(data)
        if missing:
            raise BadParameter(f"grid spec missing keys: {sorted(missing)}")
        res = data["resolution"]
        if isinstance(res, list):
            res = tuple(res)
        return cls(
            p_min=data["p_min"],
            p_max=data["p_max"],
            q_min=data["q_min"],
            q_max=data["q_max"],
            resolution=res,
            n=data["n"],
            prior=Prior(pi=data["pi"]),
            model=model_from_dict(data["model"]),
        )
