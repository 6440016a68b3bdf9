"""Weighted Cramer-von Mises loss and the shrinkage risk approximation.

The loss between a reference reliability curve R and an estimate is

    L = integral of [R(t) - Rhat(t)]^2 / (R(t)(1 - R(t))) dF(t),

taken against the reference failure-time distribution F = 1 - R.  Against
a step reference the integral is the exact sum over its jumps; against a
known continuous reference it is computed by the midpoint rule after the
change of variable u = F(t).  The weight is singular at both ends, so the
u-range is clamped and near-zero denominators are skipped; comparisons
between estimators should therefore rely on orderings, not on absolute
loss values.

The empirical risk approximation combines, per component, the Greenwood
variance of the powered curve with its powering bias:

    Risk(c) ~ sum over grid t of dFhat(t)/[Rhat(1-Rhat)] *
        ( sum_j I_j^2 c^2 Rhat_j^{2c-2} Vhat_j
          + [sum_j I_j (Rhat_j^c - Rhat_j)]^2 )

where I_j is the reliability importance of component j at the estimated
component reliabilities, and the weighting measure dFhat comes from the
c = 1 plug-in estimate.  Expanding around c = 1 gives the cubic

    Risk(c) ~ A c^2 + 2B c^2 (c - 1) + D (c - 1)^2

whose interior minimizer has a closed form in (A, B, D).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .datagen import TrueSystemCurve
from .errors import DataError, NumericError
from .estimators import SystemCurveEstimate
from .structure import StructureTree
from .survival import SurvivalCurve

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class LossConfig:
    """Numerical conventions for the loss and risk integrals."""

    denominator_floor: float = 1e-8
    panels: int = 2000
    u_lo: float = 1e-6
    u_hi: float = 1.0 - 1e-3

    def __post_init__(self):
        if not 0.0 < self.u_lo < self.u_hi < 1.0:
            raise DataError("need 0 < u_lo < u_hi < 1")
        if self.panels < 10:
            raise DataError("need at least 10 quadrature panels")
        if self.denominator_floor <= 0.0:
            raise DataError("denominator floor must be positive")


@dataclass(frozen=True)
class QuadCoefficients:
    """Coefficients of the local risk polynomial A c^2 + 2B c^2(c-1) + D(c-1)^2."""

    a: float
    b: float
    d: float

    def __post_init__(self):
        if self.a < 0 or self.d < 0 or self.b > 0:
            raise DataError(
                f"coefficient signs violated: A={self.a!r} B={self.b!r} D={self.d!r}"
            )

    def polynomial(self, c):
        c = np.asarray(c, dtype=float)
        out = self.a * c**2 + 2.0 * self.b * c**2 * (c - 1.0) + self.d * (c - 1.0) ** 2
        return float(out) if c.ndim == 0 else out


class TrueRiskEvaluator:
    """Loss against a known continuous reference, reusable across estimates.

    Caches the quantile grid of the reference so that evaluating many
    estimates (e.g. across Monte Carlo replications) costs one step-curve
    lookup each.
    """

    def __init__(self, truth: TrueSystemCurve, cfg: LossConfig = LossConfig()):
        self.cfg = cfg
        du = (cfg.u_hi - cfg.u_lo) / cfg.panels
        u = cfg.u_lo + (np.arange(cfg.panels) + 0.5) * du
        self.u = u
        self.t = truth.quantile(u)
        self.reference = 1.0 - u
        self.weights = du / (u * (1.0 - u))

    def loss(self, estimate) -> float:
        values = estimate.evaluate(self.t)
        return float(np.sum(self.weights * (self.reference - values) ** 2))


def _step_loss(
    ref: SystemCurveEstimate, est, cfg: LossConfig
) -> float:
    values = ref.values
    previous = np.concatenate(([1.0], values[:-1]))
    jump_mass = previous - values
    denom = values * (1.0 - values)
    keep = denom >= cfg.denominator_floor
    if not np.any(keep):
        return 0.0
    est_values = est.evaluate(ref.times[keep])
    diff = values[keep] - est_values
    return float(np.sum(jump_mass[keep] * diff**2 / denom[keep]))


def cvm_loss(ref, est, cfg: LossConfig = LossConfig()) -> float:
    """Weighted Cramer-von Mises loss of ``est`` against reference ``ref``.

    ``ref`` may be a step estimate (exact jump sum, bootstrap use) or a
    :class:`TrueSystemCurve` (midpoint quadrature on the clamped u-range).
    Always nonnegative.
    """
    if isinstance(ref, TrueSystemCurve):
        return TrueRiskEvaluator(ref, cfg).loss(est)
    return _step_loss(ref, est, cfg)


@dataclass(frozen=True)
class RiskGrid:
    """Empirical integrand pieces on the weighting grid, shared by the
    risk evaluation and the A/B/D coefficients."""

    weights: np.ndarray  # dFhat / (Rhat(1-Rhat)), zero where skipped; (M,)
    values: np.ndarray  # raw component values, (K, M)
    floored: np.ndarray  # values floored at 1/(2n), (K, M)
    variances: np.ndarray  # Greenwood variances, (K, M)
    importances: np.ndarray  # (K, M)
    log_floored: np.ndarray  # (K, M)


def build_risk_grid(
    curves: Sequence[SurvivalCurve],
    tree: StructureTree,
    weight_curve: SystemCurveEstimate,
    cfg: LossConfig = LossConfig(),
) -> RiskGrid:
    """Evaluate every risk ingredient on the weight curve's jump grid."""
    if len(curves) != tree.k:
        raise DataError(
            f"{len(curves)} component curves for a {tree.k}-component structure"
        )
    grid = weight_curve.times
    w_values = weight_curve.values
    previous = np.concatenate(([1.0], w_values[:-1]))
    jump_mass = previous - w_values
    denom = w_values * (1.0 - w_values)
    with np.errstate(divide="ignore", invalid="ignore"):
        weights = np.where(denom >= cfg.denominator_floor, jump_mass / denom, 0.0)

    values = np.vstack([curve.evaluate(grid) for curve in curves])
    floors = np.array([curve.log_floor for curve in curves])
    floored = np.maximum(values, floors[:, None])
    variances = np.vstack([curve.variance_at(grid) for curve in curves])
    importances = np.vstack(
        [tree.importance(list(values), j) for j in range(1, tree.k + 1)]
    )
    return RiskGrid(
        weights=weights,
        values=values,
        floored=floored,
        variances=variances,
        importances=importances,
        log_floored=np.log(floored),
    )


def risk_on_grid(grid: RiskGrid, c):
    """Empirical risk approximation at coefficient(s) ``c``; vectorized."""
    c_arr = np.atleast_1d(np.asarray(c, dtype=float))
    if np.any(c_arr <= 0):
        raise DataError("shrinkage coefficient must be positive")
    exponent = c_arr[None, :, None]  # K x C x M broadcast
    floored = grid.floored[:, None, :]
    powered = floored**exponent
    var_term = (
        (c_arr**2)[None, :, None] * floored ** (2.0 * exponent - 2.0)
        * grid.variances[:, None, :]
    )
    bias = powered - floored
    imp = grid.importances[:, None, :]
    integrand = (imp**2 * var_term).sum(axis=0) + ((imp * bias).sum(axis=0)) ** 2
    out = (integrand * grid.weights[None, :]).sum(axis=1)
    return float(out[0]) if np.ndim(c) == 0 else out


def analytic_risk(
    c,
    curves: Sequence[SurvivalCurve],
    tree: StructureTree,
    weight_curve: SystemCurveEstimate,
    cfg: LossConfig = LossConfig(),
):
    """Empirical plug-in of the risk approximation at coefficient ``c``."""
    return risk_on_grid(build_risk_grid(curves, tree, weight_curve, cfg), c)


def coefficients_on_grid(grid: RiskGrid) -> QuadCoefficients:
    imp2_var = grid.importances**2 * grid.variances
    a = float(np.sum(grid.weights * imp2_var.sum(axis=0)))
    b = float(np.sum(grid.weights * (imp2_var * grid.log_floored).sum(axis=0)))
    d_inner = (grid.importances * grid.values * grid.log_floored).sum(axis=0)
    d = float(np.sum(grid.weights * d_inner**2))
    # clip float dust so the sign contract holds exactly
    return QuadCoefficients(a=max(a, 0.0), b=min(b, 0.0), d=max(d, 0.0))


def quad_coefficients(
    curves: Sequence[SurvivalCurve],
    tree: StructureTree,
    weight_curve: SystemCurveEstimate,
    cfg: LossConfig = LossConfig(),
) -> QuadCoefficients:
    """A, B, D of the local risk polynomial from empirical curves.

    A and B carry the Greenwood variances (B with an extra log factor),
    D the pure powering bias; log arguments are floored at 1/(2n).
    """
    return coefficients_on_grid(build_risk_grid(curves, tree, weight_curve, cfg))


def cstar_closed_form(
    q: QuadCoefficients, bounds: tuple[float, float] | None = None
) -> float | None:
    """Interior minimizer of the risk polynomial, or None when it has none.

    Returns the limit D/(A+D) when B is negligible (1 when A = D = 0) and
    None when the discriminant is negative, in which case the caller
    should minimize the full empirical risk numerically.  With ``bounds``
    given, the result is clamped into them.
    """
    a, b, d = q.a, q.b, q.d
    if abs(b) < 1e-12 * (a + d + 1.0):
        c = 1.0 if a + d == 0.0 else d / (a + d)
    else:
        shifted = 2.0 * b - a - d
        disc = shifted**2 + 12.0 * b * d
        if disc < 0.0:
            return None
        c = (shifted + math.sqrt(disc)) / (6.0 * b)
    if bounds is not None:
        c = min(max(c, bounds[0]), bounds[1])
    return c


def minimize_scalar(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-5
) -> float:
    """Coarse grid scan followed by golden-section refinement.

    Evaluates ``f`` on a 50-point grid over [lo, hi], then shrinks the
    bracket formed by the neighbors of the grid minimum to width tol.
    Non-finite values are treated as +inf; if every grid value is
    non-finite the minimization fails.
    """
    if not lo < hi:
        raise DataError("need lo < hi")
    if tol <= 0:
        raise DataError("tolerance must be positive")

    def safe(c: float) -> float:
        v = f(c)
        return float(v) if np.isfinite(v) else math.inf

    grid = np.linspace(lo, hi, 50)
    values = np.array([safe(c) for c in grid])
    if not np.any(np.isfinite(values)):
        raise NumericError("objective is non-finite over the whole search grid")
    i = int(np.argmin(values))
    best_c, best_v = float(grid[i]), float(values[i])

    a = float(grid[max(i - 1, 0)])
    b = float(grid[min(i + 1, grid.size - 1)])
    refined_c, refined_v = golden_section(safe, a, b, tol)
    if refined_v < best_v:
        return refined_c
    return best_c


def golden_section(
    f: Callable[[float], float], a: float, b: float, tol: float
) -> tuple[float, float]:
    """Golden-section search on [a, b]; returns (argmin, value)."""
    if b - a <= tol:
        mid = 0.5 * (a + b)
        return mid, f(mid)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)
