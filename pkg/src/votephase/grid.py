"""Sweeps of the (p, q) unit square for phase-diagram data.

Every row is computed with closed-form operations only, no sampling.
Axis values come from decimal-exact index arithmetic (see GridSpec), so
fine grids hit landmarks like 0.5 exactly instead of drifting past
them; boundary values appear only when the spec's endpoints and step
actually generate them.

``delta_inf`` in each row is the model's own n -> inf plug-in value:
the nine-region limit for finite-variance models, the n-free abusive
value for the equicorrelated model (flagged by ``abusive``). ``phase``
classifies its sign.
"""

from __future__ import annotations

from dataclasses import dataclass

from .analytic import (
    Phase,
    delta_asymptotic,
    estimated_error,
    estimated_error_asymptotic,
    mean_individual_error,
    phase_of,
    uses_abusive_variance,
)
from .model import EnsembleConfig, GridSpec, RatePair


@dataclass(frozen=True)
class GridRow:
    """One grid point with its error estimates and phase label."""

    p: float
    q: float
    err: float
    err_hat: float
    delta_n: float
    delta_inf: float
    phase: Phase
    abusive: bool


@dataclass(frozen=True)
class Improvement:
    """Best-case majority benefit over a grid: max of -delta with argmax."""

    value: float
    at: tuple


def _row(spec: GridSpec, p: float, q: float) -> GridRow:
    rates = RatePair(p=p, q=q)
    err = mean_individual_error(rates, spec.prior)
    if spec.is_asymptotic:
        err_hat = estimated_error_asymptotic(rates, spec.prior, spec.model)
    else:
        cfg = EnsembleConfig(n=spec.n, rates=rates, prior=spec.prior, model=spec.model)
        err_hat = estimated_error(cfg)
    delta_inf = delta_asymptotic(rates, spec.prior, spec.model)
    return GridRow(
        p=p,
        q=q,
        err=err,
        err_hat=err_hat,
        delta_n=err_hat - err,
        delta_inf=delta_inf,
        phase=phase_of(delta_inf),
        abusive=uses_abusive_variance(spec.model),
    )


def sweep(spec: GridSpec) -> list:
    """All grid rows in row-major order: p outer, q inner."""
    return [_row(spec, p, q) for p, q in spec.points()]


def max_improvement(spec: GridSpec) -> Improvement:
    """Maximum of -delta_n over the grid, first argmax in row-major order."""
    best = None
    for row in sweep(spec):
        if best is None or -row.delta_n > -best.delta_n:
            best = row
    return Improvement(value=-best.delta_n, at=(best.p, best.q))
