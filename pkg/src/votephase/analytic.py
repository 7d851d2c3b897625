"""Closed-form error analysis of the majority vote.

With n members voting and a strict-majority rule (predict 1 iff the
vote sum g exceeds n/2, ties to class 0), the majority error rate is

    Err(n) = P(g <= n/2 | class 1) * pi + P(g > n/2 | class 0) * (1 - pi).

Applying a normal approximation to g conditioned on each class gives
the estimate

    ErrHat(n) = Phi((n/2 - n p) / s_p) * pi
              + (1 - Phi((n/2 - n q) / s_q)) * (1 - pi),

where s_r is the standard deviation of the vote sum at marginal rate r
under the chosen correlation model. The object of study is the gap

    delta(n) = ErrHat(n) - err,    err = (1 - p) pi + q (1 - pi),

between the estimated majority error and a single member's error. As
n -> inf the estimate converges to a step function of (p, q): each Phi
argument goes to -inf, 0, or +inf according to the side of 1/2 its rate
sits on, so the limiting gap delta(inf) is piecewise constant over nine
regions of the (p, q) square and jumps by pi/2 across p = 1/2 and by
(1 - pi)/2 across q = 1/2.

Under the equicorrelated model the per-vote variance diverges, so the
limit above does not describe the estimator. Plugging the quadratic
variance term into the normal formula anyway gives an n-free value

    Phi((1/2 - p) / sqrt(lam p (1 - p))) * pi
    + (1 - Phi((1/2 - q) / sqrt(lam q (1 - q)))) * (1 - pi),

identical to the independent-model estimate at effective size 1/lam.
This abuse of the normal limit is still exposed because it is the
number the plug-in formula actually produces; callers can detect it
via ``uses_abusive_variance``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .model import (
    BadParameter,
    CorrelationModel,
    EnsembleConfig,
    Equicorrelated,
    Geometric,
    Independent,
    Prior,
    RatePair,
    _as_probability,
    _as_size,
)

_SQRT2 = math.sqrt(2.0)

# Beyond this the double-precision tail is exactly 0 or 1 and erfc
# would underflow anyway.
_CDF_SATURATION = 40.0


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF via erfc, saturating for |x| > 40."""
    if x != x:
        raise BadParameter("std_normal_cdf is undefined at NaN")
    if x < -_CDF_SATURATION:
        return 0.0
    if x > _CDF_SATURATION:
        return 1.0
    return 0.5 * math.erfc(-x / _SQRT2)


def mean_individual_error(rates: RatePair, prior: Prior) -> float:
    """err = (1 - p) pi + q (1 - pi), one member's average error."""
    pi = prior.pi
    return (1.0 - rates.p) * pi + rates.q * (1.0 - pi)


def geometric_variance_factor(gamma: float, n: int) -> float:
    """Variance inflation of the vote sum under geometric correlation.

    Var(g) = n r (1 - r) * M(gamma, n) with

        M = 1 + 2 * sum_{j=1}^{n-1} (1 - j/n) gamma**j
          = 1 + 2 (gamma / (1 - gamma)) * (1 - (1 - gamma**n) / (n (1 - gamma)))

    The closed form follows from splitting the sum into a plain
    geometric series and a j-weighted one.
    """
    g = _as_probability(gamma, "gamma", BadParameter)
    n = _as_size(n, "n")
    one_minus = 1.0 - g
    # gamma**n underflows harmlessly to 0 for large n
    tail = (1.0 - g**n) / (n * one_minus)
    return 1.0 + 2.0 * (g / one_minus) * (1.0 - tail)


def geometric_variance_factor_direct(gamma: float, n: int) -> float:
    """O(n) reference sum for the factor above; kept for cross-checks."""
    g = _as_probability(gamma, "gamma", BadParameter)
    n = _as_size(n, "n")
    total = 1.0
    power = 1.0
    for j in range(1, n):
        power *= g
        total += 2.0 * (1.0 - j / n) * power
    return total


def sum_variance(model: CorrelationModel, n: int, rate: float) -> float:
    """Exact variance of the n-member vote sum at marginal rate r.

    Independent (with or without heterogeneity): n r (1 - r). The Beta
    heterogeneity leaves this unchanged because conditioning on the
    drawn rates and applying total variance collapses back to the
    Binomial value.
    Geometric: n r (1 - r) * M(gamma, n).
    Equicorrelated: n**2 lam r (1 - r) + n (1 - lam) r (1 - r).
    """
    r = _as_probability(rate, "rate")
    n = _as_size(n, "n")
    base = r * (1.0 - r)
    if isinstance(model, Independent):
        return n * base
    if isinstance(model, Geometric):
        return n * base * geometric_variance_factor(model.gamma, n)
    if isinstance(model, Equicorrelated):
        return n * n * model.lam * base + n * (1.0 - model.lam) * base
    raise BadParameter(f"unknown correlation model {model!r}")


@dataclass(frozen=True)
class SigmaSq:
    """Per-vote asymptotic variance lim Var(g)/n, possibly infinite."""

    value: float

    def __post_init__(self) -> None:
        v = float(self.value)
        if v != v or v <= 0.0:
            raise BadParameter(f"sigma^2 must be positive, got {v!r}")
        object.__setattr__(self, "value", v)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)


def asymptotic_sigma_sq(model: CorrelationModel, rate: float) -> SigmaSq:
    """lim_n Var(g)/n per model; infinite under equicorrelation.

    Independent: r (1 - r). Geometric: r (1 - r) (1 + gamma)/(1 - gamma),
    the n -> inf limit of the variance factor. Equicorrelated: the n**2
    term makes the per-vote variance diverge.
    """
    r = _as_probability(rate, "rate")
    base = r * (1.0 - r)
    if isinstance(model, Independent):
        return SigmaSq(base)
    if isinstance(model, Geometric):
        g = model.gamma
        return SigmaSq(base * (1.0 + g) / (1.0 - g))
    if isinstance(model, Equicorrelated):
        return SigmaSq(math.inf)
    raise BadParameter(f"unknown correlation model {model!r}")


def uses_abusive_variance(model: CorrelationModel) -> bool:
    """True when the normal plug-in formula is applied despite an
    infinite per-vote variance (equicorrelated model)."""
    return isinstance(model, Equicorrelated)


def _class_tail(n: int, rate: float, model: CorrelationModel, upper: bool) -> float:
    """Normal estimate of P(g <= n/2) or, mirrored, of P(g > n/2).

    The upper tail is evaluated as Phi((n r - n/2)/s) rather than
    1 - Phi((n/2 - n r)/s); the two are equal exactly, but the
    subtraction would cancel away the tail's relative precision
    whenever it is small.
    """
    s = math.sqrt(sum_variance(model, n, rate))
    half_gap = n / 2.0 - n * rate
    return std_normal_cdf((-half_gap if upper else half_gap) / s)


def estimated_error(cfg: EnsembleConfig) -> float:
    """Normal-approximation estimate of the majority error at finite n."""
    pi = cfg.prior.pi
    miss = _class_tail(cfg.n, cfg.rates.p, cfg.model, upper=False)
    false_alarm = _class_tail(cfg.n, cfg.rates.q, cfg.model, upper=True)
    return miss * pi + false_alarm * (1.0 - pi)


def estimated_error_asymptotic(
    rates: RatePair, prior: Prior, model: CorrelationModel
) -> float:
    """n -> inf value of the normal plug-in estimate.

    For finite per-vote variance this is the step-function limit
    ``limiting_error``. For the equicorrelated model the n's cancel
    inside the Phi arguments and the plug-in value is n-free:
    equivalent to an independent ensemble of effective size 1/lam.
    """
    if isinstance(model, Equicorrelated):
        lam = model.lam
        pi = prior.pi
        p, q = rates.p, rates.q
        miss = std_normal_cdf((0.5 - p) / math.sqrt(lam * p * (1.0 - p)))
        # upper tail mirrored to avoid 1 - Phi cancellation
        false_alarm = std_normal_cdf((q - 0.5) / math.sqrt(lam * q * (1.0 - q)))
        return miss * pi + false_alarm * (1.0 - pi)
    return limiting_error(rates, prior)


class Side(enum.Enum):
    """Position of a rate relative to the 1/2 phase boundary."""

    BELOW = "<1/2"
    ON = "=1/2"
    ABOVE = ">1/2"


def side_of(rate: float) -> Side:
    r = _as_probability(rate, "rate")
    if r < 0.5:
        return Side.BELOW
    if r > 0.5:
        return Side.ABOVE
    return Side.ON


class Phase(enum.Enum):
    """Sign of the limiting gap: does voting help, hurt, or neither."""

    BENEFICIAL = "-"
    HARMFUL = "+"
    NEUTRAL = "0"


def phase_of(delta_value: float) -> Phase:
    if delta_value != delta_value:
        raise BadParameter("phase is undefined at NaN")
    if delta_value < 0.0:
        return Phase.BENEFICIAL
    if delta_value > 0.0:
        return Phase.HARMFUL
    return Phase.NEUTRAL


def limiting_error(rates: RatePair, prior: Prior) -> float:
    """n -> inf limit of the estimated majority error.

    Each class tail Phi((n/2 - n r)/s_r) converges to 1, 1/2, or 0 as
    r sits below, on, or above 1/2, giving nine constant values over
    the (p, q) square:

        q > 1/2:   1            1 - pi/2      1 - pi
        q = 1/2:   (1+pi)/2     1/2           (1-pi)/2
        q < 1/2:   pi           pi/2          0

    (rows: q side, columns: p < 1/2, p = 1/2, p > 1/2). The cell
    expressions are evaluated literally so each value is the correctly
    rounded double of its closed form, not a re-rounded tail sum.
    """
    pi = prior.pi
    table = {
        (Side.BELOW, Side.ABOVE): 1.0,
        (Side.ON, Side.ABOVE): 1.0 - pi / 2.0,
        (Side.ABOVE, Side.ABOVE): 1.0 - pi,
        (Side.BELOW, Side.ON): (1.0 + pi) / 2.0,
        (Side.ON, Side.ON): 0.5,
        (Side.ABOVE, Side.ON): (1.0 - pi) / 2.0,
        (Side.BELOW, Side.BELOW): pi,
        (Side.ON, Side.BELOW): pi / 2.0,
        (Side.ABOVE, Side.BELOW): 0.0,
    }
    return table[(side_of(rates.p), side_of(rates.q))]


@dataclass(frozen=True)
class PhaseVerdict:
    """Limiting gap, its sign, and the (p, q) region it came from."""

    delta_inf: float
    phase: Phase
    p_side: Side
    q_side: Side

    @property
    def region(self) -> str:
        return f"p{self.p_side.value}, q{self.q_side.value}"


def limiting_delta(rates: RatePair, prior: Prior) -> PhaseVerdict:
    """delta(inf) = limiting_error - err with its phase classification.

    The value is piecewise constant in (p, q) with jump pi/2 across
    p = 1/2 and (1 - pi)/2 across q = 1/2; the sign partitions the
    square into regions where an infinite majority vote beats a single
    member (negative), loses to it (positive), or ties it (zero).
    """
    value = limiting_error(rates, prior) - mean_individual_error(rates, prior)
    return PhaseVerdict(
        delta_inf=value,
        phase=phase_of(value),
        p_side=side_of(rates.p),
        q_side=side_of(rates.q),
    )


def delta(cfg: EnsembleConfig) -> float:
    """delta(n) = estimated_error(cfg) - err, the finite-n gap."""
    return estimated_error(cfg) - mean_individual_error(cfg.rates, cfg.prior)


def delta_asymptotic(
    rates: RatePair, prior: Prior, model: CorrelationModel
) -> float:
    """n -> inf gap under the model's own asymptotic estimate.

    Finite-variance models reduce to ``limiting_delta(...).delta_inf``;
    the equicorrelated model uses its n-free plug-in value.
    """
    return estimated_error_asymptotic(rates, prior, model) - mean_individual_error(
        rates, prior
    )
