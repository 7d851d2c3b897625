"""Empirical diagnosis of a real prediction matrix.

Input is an N x m table of binary votes plus the true labels. The
output estimates the ensemble's average true/false positive rates, the
within-class dependence between members, the observed majority-vote
error, and the phase verdict the asymptotic theory assigns to the
estimated operating point: would an infinitely large ensemble of
members like these beat one typical member, lose to it, or tie.

The verdict is a plug-in of point estimates into a discontinuous
function, so the report attaches warnings whenever that is fragile:
rate estimates at the {0, 1} boundary (clamped before the verdict),
rate estimates within two standard errors of the 1/2 phase boundary,
and mean within-class correlation at or above 0.5, where the weak
dependence behind the asymptotic limit is no longer credible.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .analytic import PhaseVerdict, limiting_delta, mean_individual_error
from .model import (
    BadParameter,
    BadSize,
    Prior,
    RatePair,
    VotePhaseError,
)

# Verdict clamp for boundary estimates; the analysis excludes closed
# boundaries so exact 0/1 rates have no phase of their own.
RATE_CLAMP = 1e-9

HIGH_CORRELATION = 0.5


class SingleClassData(VotePhaseError, ValueError):
    """The label column contains only one class."""


class NonBinaryEntry(VotePhaseError, ValueError):
    """A label or vote entry was not 0 or 1."""


@dataclass(frozen=True)
class PredictionMatrix:
    """True labels and an N x m matrix of member votes."""

    labels: np.ndarray
    votes: np.ndarray

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels)
        votes = np.asarray(self.votes)
        if labels.ndim != 1 or votes.ndim != 2 or votes.shape[0] != labels.shape[0]:
            raise BadParameter(
                f"need labels (N,) and votes (N, m); got {labels.shape} and {votes.shape}"
            )
        if labels.shape[0] < 2:
            raise BadSize(f"need at least 2 samples, got {labels.shape[0]}")
        if votes.shape[1] < 1:
            raise BadSize("need at least 1 classifier column")
        if not np.isin(labels, (0, 1)).all():
            raise NonBinaryEntry("labels must be 0 or 1")
        if not np.isin(votes, (0, 1)).all():
            raise NonBinaryEntry("votes must be 0 or 1")
        labels = labels.astype(np.uint8)
        votes = votes.astype(np.uint8)
        for cls in (0, 1):
            if not np.any(labels == cls):
                raise SingleClassData(f"no samples of class {cls}")
        labels.flags.writeable = False
        votes.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "votes", votes)

    @property
    def n_samples(self) -> int:
        return int(self.labels.shape[0])

    @property
    def n_classifiers(self) -> int:
        return int(self.votes.shape[1])


@dataclass(frozen=True)
class DiagnosisReport:
    """Everything diagnose() can say about one prediction matrix."""

    n_samples: int
    n_classifiers: int
    p_hat: float
    q_hat: float
    p_hat_i: np.ndarray
    q_hat_i: np.ndarray
    p_std_error: float
    q_std_error: float
    corr_class1: float
    corr_class0: float
    pi_used: float
    pi_source: str
    err_hat_individual: float
    err_majority: float
    verdict: PhaseVerdict
    warnings: list = field(default_factory=list)
    lag_means_class1: Union[np.ndarray, None] = None
    lag_means_class0: Union[np.ndarray, None] = None

    def to_dict(self) -> dict:
        out = {
            "n_samples": self.n_samples,
            "n_classifiers": self.n_classifiers,
            "p_hat": self.p_hat,
            "q_hat": self.q_hat,
            "p_hat_i": [float(v) for v in self.p_hat_i],
            "q_hat_i": [float(v) for v in self.q_hat_i],
            "p_std_error": self.p_std_error,
            "q_std_error": self.q_std_error,
            "corr_class1": self.corr_class1,
            "corr_class0": self.corr_class0,
            "pi_used": self.pi_used,
            "pi_source": self.pi_source,
            "err_hat_individual": self.err_hat_individual,
            "err_majority": self.err_majority,
            "verdict": {
                "delta_inf": self.verdict.delta_inf,
                "phase": self.verdict.phase.name.lower(),
                "sign": self.verdict.phase.value,
                "p_side": self.verdict.p_side.value,
                "q_side": self.verdict.q_side.value,
                "region": self.verdict.region,
            },
            "warnings": list(self.warnings),
        }
        for name in ("lag_means_class1", "lag_means_class0"):
            lags = getattr(self, name)
            if lags is not None:
                out[name] = [float(v) for v in lags]
        return out


def _mean_pairwise_correlation(block: np.ndarray) -> tuple:
    """Mean off-diagonal Pearson correlation, nan-skipping.

    Constant columns have no defined correlation; their pairs are
    excluded and reported back for a warning. Returns (mean, corr
    matrix, list of constant column indices); mean is nan when no
    valid pair exists.
    """
    m = block.shape[1]
    if block.shape[0] < 2 or m < 2:
        return float("nan"), None, []
    data = block.astype(np.float64)
    constant = np.flatnonzero(data.std(axis=0) == 0.0).tolist()
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.corrcoef(data, rowvar=False)
    off = corr[~np.eye(m, dtype=bool)]
    valid = off[~np.isnan(off)]
    mean = float(valid.mean()) if valid.size else float("nan")
    return mean, corr, constant


def _ensemble_mean_std_error(block: np.ndarray) -> float:
    """SE of the class's pooled rate estimate.

    The estimate is the mean over samples of the per-sample ensemble
    vote average; the per-sample averages are i.i.d., so their sample
    standard deviation over sqrt(N) is an SE that honors within-row
    correlation without modeling it.
    """
    row_means = block.mean(axis=1)
    if row_means.shape[0] < 2:
        return float("nan")
    return float(row_means.std(ddof=1) / np.sqrt(row_means.shape[0]))


def _lag_means(corr: Union[np.ndarray, None]) -> Union[np.ndarray, None]:
    if corr is None:
        return None
    m = corr.shape[0]
    with np.errstate(invalid="ignore"):
        return np.array([float(np.nanmean(np.diag(corr, k))) for k in range(1, m)])


def diagnose(
    matrix: PredictionMatrix,
    prior_override: Union[Prior, None] = None,
    assume_ordered: bool = False,
) -> DiagnosisReport:
    """Estimate rates, dependence, and the asymptotic phase verdict.

    ``prior_override`` replaces the empirical class-1 fraction in the
    error formulas and verdict (use it when the sample is not drawn
    from the deployment class balance). ``assume_ordered`` asserts that
    classifier columns have a meaningful order, unlocking per-lag mean
    correlations for comparison against a gamma**k profile.
    """
    votes = matrix.votes
    labels = matrix.labels
    warnings: list = []

    class1 = votes[labels == 1]
    class0 = votes[labels == 0]
    p_hat_i = class1.mean(axis=0)
    q_hat_i = class0.mean(axis=0)
    p_hat = float(p_hat_i.mean())
    q_hat = float(q_hat_i.mean())
    p_se = _ensemble_mean_std_error(class1)
    q_se = _ensemble_mean_std_error(class0)

    if prior_override is not None:
        pi_used, pi_source = prior_override.pi, "override"
    else:
        pi_used, pi_source = float(labels.mean()), "estimated"

    corr1, corr1_matrix, constant1 = _mean_pairwise_correlation(class1)
    corr0, corr0_matrix, constant0 = _mean_pairwise_correlation(class0)
    for cls, constant in ((1, constant1), (0, constant0)):
        if constant:
            warnings.append(
                f"class {cls}: classifiers {constant} vote constantly within the "
                "class; their pairs are excluded from correlation averages"
            )

    clamped = {}
    for name, value in (("p", p_hat), ("q", q_hat)):
        clamped[name] = min(max(value, RATE_CLAMP), 1.0 - RATE_CLAMP)
        if clamped[name] != value:
            warnings.append(
                f"{name}_hat = {value:g} sits on the {{0,1}} boundary; verdict "
                f"computed after clamping into [{RATE_CLAMP:g}, 1 - {RATE_CLAMP:g}] "
                "(the asymptotic analysis excludes closed boundaries)"
            )
    verdict_prior = Prior(pi=pi_used)
    verdict = limiting_delta(RatePair(p=clamped["p"], q=clamped["q"]), verdict_prior)

    for name, value, se in (("p", p_hat, p_se), ("q", q_hat, q_se)):
        if np.isfinite(se) and abs(value - 0.5) <= 2.0 * se and value != 0.5:
            warnings.append(
                f"{name}_hat = {value:.4f} is within 2 standard errors "
                f"({se:.4f}) of the 1/2 boundary; phase indeterminate"
            )
        elif value == 0.5:
            warnings.append(
                f"{name}_hat sits exactly on the 1/2 boundary; phase taken "
                "from the boundary row/column"
            )

    for cls, value in ((1, corr1), (0, corr0)):
        if np.isfinite(value) and value >= HIGH_CORRELATION:
            warnings.append(
                f"class {cls}: mean within-class correlation {value:.3f} >= "
                f"{HIGH_CORRELATION}; the asymptotic verdict assumes weak "
                "dependence and is unreliable here"
            )

    err_hat_individual = mean_individual_error_from_estimates(p_hat, q_hat, pi_used)
    majority_one = 2 * votes.sum(axis=1, dtype=np.int64) > matrix.n_classifiers
    err_majority = float((majority_one != (labels == 1)).mean())

    return DiagnosisReport(
        n_samples=matrix.n_samples,
        n_classifiers=matrix.n_classifiers,
        p_hat=p_hat,
        q_hat=q_hat,
        p_hat_i=p_hat_i,
        q_hat_i=q_hat_i,
        p_std_error=p_se,
        q_std_error=q_se,
        corr_class1=corr1,
        corr_class0=corr0,
        pi_used=pi_used,
        pi_source=pi_source,
        err_hat_individual=err_hat_individual,
        err_majority=err_majority,
        verdict=verdict,
        warnings=warnings,
        lag_means_class1=_lag_means(corr1_matrix) if assume_ordered else None,
        lag_means_class0=_lag_means(corr0_matrix) if assume_ordered else None,
    )


def mean_individual_error_from_estimates(p: float, q: float, pi: float) -> float:
    """(1 - p) pi + q (1 - pi) on raw estimates, boundaries included."""
    return (1.0 - p) * pi + q * (1.0 - pi)


def read_prediction_csv(source: Union[str, io.TextIOBase]) -> PredictionMatrix:
    """Parse the ``y,f1,...,fm`` CSV schema into a PredictionMatrix."""
    if isinstance(source, (str, bytes)):
        with open(source, newline="") as fh:
            return _parse_csv(fh)
    return _parse_csv(source)


def _parse_csv(fh) -> PredictionMatrix:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise BadParameter("empty CSV: expected header y,f1,...,fm") from None
    header = [h.strip() for h in header]
    if not header or header[0] != "y" or len(header) < 2:
        raise BadParameter(
            f"CSV header must be y,f1,...,fm with m >= 1, got {header!r}"
        )
    width = len(header)
    labels = []
    votes = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != width:
            raise BadParameter(
                f"line {lineno}: expected {width} fields, got {len(row)}"
            )
        values = []
        for col, cell in zip(header, row):
            cell = cell.strip()
            if cell not in ("0", "1"):
                raise NonBinaryEntry(
                    f"line {lineno}, column {col!r}: entry {cell!r} is not 0 or 1"
                )
            values.append(int(cell))
        labels.append(values[0])
        votes.append(values[1:])
    if not labels:
        raise BadSize("CSV contains a header but no data rows")
    return PredictionMatrix(labels=np.array(labels), votes=np.array(votes))


def format_report(report: DiagnosisReport) -> str:
    """Human-readable rendering of a DiagnosisReport."""
    v = report.verdict
    phase_word = {"-": "beneficial", "+": "harmful", "0": "neutral"}[v.phase.value]
    lines = [
        f"samples: {report.n_samples}   classifiers: {report.n_classifiers}",
        f"p_hat = {report.p_hat:.6f} (se {report.p_std_error:.6f})   "
        f"q_hat = {report.q_hat:.6f} (se {report.q_std_error:.6f})",
        f"pi = {report.pi_used:.6f} ({report.pi_source})",
        f"mean within-class correlation: class1 {report.corr_class1:.4f}, "
        f"class0 {report.corr_class0:.4f}",
        f"individual error (estimate): {report.err_hat_individual:.6f}",
        f"observed majority-vote error: {report.err_majority:.6f}",
        f"asymptotic verdict: {phase_word} (delta_inf = {v.delta_inf:.6f}, "
        f"region {v.region})",
    ]
    if report.lag_means_class1 is not None:
        lead = ", ".join(f"{x:.4f}" for x in report.lag_means_class1[:5])
        lines.append(f"lag means (class 1, first 5): {lead}")
    if report.lag_means_class0 is not None:
        lead = ", ".join(f"{x:.4f}" for x in report.lag_means_class0[:5])
        lines.append(f"lag means (class 0, first 5): {lead}")
    for w in report.warnings:
        lines.append(f"warning: {w}")
    return "\n".join(lines)
