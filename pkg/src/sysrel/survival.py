"""Product-limit (Kaplan-Meier) estimation from right-censored samples.

The fitted curve is a right-continuous, non-increasing step function that
starts at 1 and drops only at distinct uncensored times.  Greenwood's
formula supplies the finite-sample variance of the estimate at each step
(the per-estimate variance, without any sqrt(n) scaling, which is what the
downstream risk formulas combine with squared bias).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class CensoredSample:
    """Right-censored observations: times with 1 = event, 0 = censored."""

    times: np.ndarray
    events: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        events = np.asarray(self.events)
        if times.ndim != 1 or times.size == 0:
            raise DataError("sample must be a non-empty 1-d array of times")
        if times.shape != events.shape:
            raise DataError("times and events must have equal length")
        if not np.all(np.isfinite(times)) or np.any(times < 0):
            raise DataError("times must be finite and nonnegative")
        if not np.isin(events, (0, 1)).all():
            raise DataError("event flags must be 0 or 1")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "events", events.astype(np.int8))

    @property
    def n(self) -> int:
        return self.times.size


def _step_values(
    times: np.ndarray, levels: np.ndarray, t, left_value: float
) -> float | np.ndarray:
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DataError("evaluation time must be nonnegative")
    idx = np.searchsorted(times, t_arr, side="right")
    table = np.concatenate(([left_value], levels))
    out = table[idx]
    return float(out) if t_arr.ndim == 0 else out


@dataclass(frozen=True)
class SurvivalCurve:
    """A fitted product-limit curve.

    times
        Distinct uncensored (jump) times, ascending.
    survival, variance
        Curve value and Greenwood variance immediately after each jump.
    at_risk, deaths
        Risk-set size just before each jump and number of events at it.
        Units censored at a jump time still count as at risk there
        (deaths are processed before censorings at ties).
    n
        Original sample size.
    last_observed
        Largest observation of any status; the curve is carried flat
        beyond it.
    """

    times: np.ndarray
    survival: np.ndarray
    variance: np.ndarray
    at_risk: np.ndarray
    deaths: np.ndarray
    n: int
    last_observed: float

    def evaluate(self, t):
        """Right-continuous curve value at ``t`` (scalar or array)."""
        return _step_values(self.times, self.survival, t, 1.0)

    def variance_at(self, t):
        """Greenwood variance of the estimate at ``t``; 0 before the first jump."""
        return _step_values(self.times, self.variance, t, 0.0)

    def cumulative_hazard(self, t):
        """-log of the curve value; +inf where the curve has reached 0."""
        value = self.evaluate(t)
        with np.errstate(divide="ignore"):
            out = -np.log(value)
        return float(out) if np.isscalar(value) else out

    @property
    def log_floor(self) -> float:
        """Continuity-correction floor 1/(2n) used inside powers and logs."""
        return 1.0 / (2.0 * self.n)


def km_fit(sample: CensoredSample) -> SurvivalCurve:
    """Fit the product-limit estimator to a censored sample.

    At each distinct uncensored time t the curve drops by the factor
    (1 - d/n) where d counts events at t and n counts units still at
    risk just before t.  Tied events aggregate into a single jump; a
    jump with d = n sends the curve to exactly 0.
    """
    times, events = sample.times, sample.events
    event_times, deaths = np.unique(times[events == 1], return_counts=True)
    order = np.sort(times)
    at_risk = sample.n - np.searchsorted(order, event_times, side="left")

    with np.errstate(invalid="ignore"):
        survival = np.cumprod(1.0 - deaths / at_risk)
    # Greenwood terms blow up when d = n; the curve is 0 from there on and
    # its variance is reported as 0.
    open_risk = at_risk - deaths
    terms = np.where(open_risk > 0, deaths / (at_risk * np.maximum(open_risk, 1)), 0.0)
    variance = survival**2 * np.cumsum(terms)

    return SurvivalCurve(
        times=event_times,
        survival=survival,
        variance=variance,
        at_risk=at_risk.astype(np.int64),
        deaths=deaths.astype(np.int64),
        n=sample.n,
        last_observed=float(order[-1]),
    )


def greenwood_var(curve: SurvivalCurve, t) -> float:
    """Greenwood variance of the product-limit estimate at time ``t``."""
    out = curve.variance_at(t)
    return float(out) if np.isscalar(out) or np.ndim(out) == 0 else out


def cumulative_hazard(curve: SurvivalCurve, t):
    """Cumulative hazard -log R(t); +inf once the curve reaches 0."""
    out = curve.cumulative_hazard(t)
    if np.isscalar(out) and math.isinf(out):
        return math.inf
    return out
