"""Selection of the shrinkage coefficient from an autopsy dataset.

Two selectors are provided.  The analytic one plugs Greenwood variances
and estimated component curves into the local risk polynomial and takes
its closed-form minimizer, falling back to a numeric minimization of the
full empirical risk when the polynomial degenerates.  The bootstrap one
resamples whole systems, rebuilds the plug-in estimate on each resample
over a grid of coefficients, and picks the grid value (golden-section
refined) whose mean loss against the original-data plug-in curve is
smallest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datagen import AutopsyDataset
from .errors import DataError, NumericError
from .estimators import fit_component_curves, plugin_curve
from .risk import (
    LossConfig,
    QuadCoefficients,
    build_risk_grid,
    coefficients_on_grid,
    cstar_closed_form,
    golden_section,
    minimize_scalar,
    risk_on_grid,
)
from .structure import StructureTree
from .survival import km_fit

ANALYTIC = "analytic"
BOOTSTRAP = "bootstrap"

DEFAULT_BOUNDS = (0.2, 5.0)
DEFAULT_GRID = (0.5, 2.0, 0.01)


def default_grid() -> np.ndarray:
    lo, hi, step = DEFAULT_GRID
    return grid_values(lo, hi, step)


def grid_values(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive arithmetic grid lo, lo+step, ..., hi."""
    if lo <= 0 or hi < lo or step <= 0:
        raise DataError(f"bad coefficient grid {lo}:{hi}:{step}")
    count = int(round((hi - lo) / step)) + 1
    return lo + step * np.arange(count)


@dataclass(frozen=True)
class CStarResult:
    """A selected shrinkage coefficient plus diagnostics.

    ``profile_c``/``profile_risk`` sample the estimated risk as a
    function of c (the bootstrap profile is the per-grid-point mean
    loss).  ``coefficients`` holds (A, B, D) when the analytic closed
    form was used; ``used_fallback`` marks the numeric path.
    """

    c_star: float
    method: str
    bounds: tuple[float, float]
    profile_c: np.ndarray
    profile_risk: np.ndarray
    coefficients: QuadCoefficients | None = None
    used_fallback: bool = False
    resamples: int | None = None
    skipped_resamples: int = 0


def _checked_curves(data: AutopsyDataset, tree: StructureTree):
    if data.k != tree.k:
        raise DataError(
            f"dataset has {data.k} components but structure needs {tree.k}"
        )
    curves = fit_component_curves(data)
    if all(curve.times.size == 0 for curve in curves):
        raise DataError(
            "every component is fully censored; no information to select c"
        )
    return curves


def cstar_analytic(
    data: AutopsyDataset,
    tree: StructureTree,
    cfg: LossConfig = LossConfig(),
    bounds: tuple[float, float] = DEFAULT_BOUNDS,
    tol: float = 1e-4,
    profile_points: int = 33,
    minimizer: str = "numeric",
) -> CStarResult:
    """Analytic shrinkage coefficient from the empirical risk approximation.

    The default minimizes the full empirical risk numerically over
    ``bounds``; ``minimizer="closed-form"`` instead takes the local
    polynomial's closed-form minimizer, falling back to the numeric
    path when the polynomial has no interior minimum or the closed form
    leaves the bounds.  The polynomial coefficients are reported either
    way.  Components without a single uncensored observation contribute
    nothing (their curve stays at 1) and do not block estimation; only
    a dataset with no events at all is rejected.
    """
    if minimizer not in ("numeric", "closed-form"):
        raise DataError(f"unknown minimizer {minimizer!r}")
    curves = _checked_curves(data, tree)
    weight = plugin_curve(tree, curves, 1.0)
    grid = build_risk_grid(curves, tree, weight, cfg)
    coeffs = coefficients_on_grid(grid)
    lo, hi = bounds
    fallback = False
    if minimizer == "closed-form":
        closed = cstar_closed_form(coeffs)
        if closed is not None and lo <= closed <= hi:
            c_star = closed
        else:
            c_star = minimize_scalar(lambda c: risk_on_grid(grid, c), lo, hi, tol)
            fallback = True
    else:
        c_star = minimize_scalar(lambda c: risk_on_grid(grid, c), lo, hi, tol)
    profile_c = np.linspace(lo, hi, profile_points)
    profile_risk = risk_on_grid(grid, profile_c)
    return CStarResult(
        c_star=float(c_star),
        method=ANALYTIC,
        bounds=bounds,
        profile_c=profile_c,
        profile_risk=profile_risk,
        coefficients=coeffs,
        used_fallback=fallback,
    )


class _BootstrapLoss:
    """Mean step-reference loss over cached resampled component curves."""

    def __init__(self, tree, stack, weights, ref_values):
        self.tree = tree
        self.stack = stack  # (K, B, M) component values at the ref jumps
        self.weights = weights  # (M,) jump mass over denominator, 0 where skipped
        self.ref_values = ref_values  # (M,)

    def mean_loss(self, c) -> np.ndarray:
        c_arr = np.atleast_1d(np.asarray(c, dtype=float))
        out = np.empty(c_arr.size)
        for start in range(0, c_arr.size, 16):  # chunked to bound memory
            chunk = c_arr[start : start + 16]
            powered = self.stack[:, :, None, :] ** chunk[None, None, :, None]
            est = self.tree.reliability(list(powered))  # (B, C, M)
            diff = self.ref_values[None, None, :] - est
            losses = (diff**2 * self.weights[None, None, :]).sum(axis=2)
            out[start : start + 16] = losses.mean(axis=0)
        return float(out[0]) if np.ndim(c) == 0 else out


def cstar_bootstrap(
    data: AutopsyDataset,
    tree: StructureTree,
    resamples: int = 200,
    grid: np.ndarray | None = None,
    cfg: LossConfig = LossConfig(),
    rng: np.random.Generator | None = None,
    tol: float = 1e-4,
) -> CStarResult:
    """Bootstrap shrinkage coefficient by empirical risk minimization.

    Whole systems are resampled with replacement so that the coupled
    within-system censoring moves as a unit.  Resamples in which no
    component has any event carry no curve information and are skipped;
    more than half skipped is an error.
    """
    if resamples < 1:
        raise DataError("need at least one bootstrap resample")
    if rng is None:
        rng = np.random.default_rng()
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0):
        raise DataError("coefficient grid must be non-empty and positive")
    grid = np.unique(grid)

    curves = _checked_curves(data, tree)
    ref = plugin_curve(tree, curves, 1.0)
    previous = np.concatenate(([1.0], ref.values[:-1]))
    denom = ref.values * (1.0 - ref.values)
    keep = denom >= cfg.denominator_floor
    weights = np.zeros_like(denom)
    np.divide(previous - ref.values, denom, out=weights, where=keep)
    weights[~keep] = 0.0

    kept = []
    skipped = 0
    for _ in range(resamples):
        rows = rng.integers(0, data.n, data.n)
        sub = data.resample(rows)
        if not sub.events.any():
            skipped += 1
            continue
        sub_curves = [km_fit(sub.component_sample(j)) for j in range(1, sub.k + 1)]
        kept.append(np.vstack([c.evaluate(ref.times) for c in sub_curves]))
    if skipped > resamples // 2:
        raise NumericError(
            f"{skipped} of {resamples} bootstrap resamples were degenerate"
        )
    stack = np.stack(kept, axis=1)  # (K, B_kept, M)
    engine = _BootstrapLoss(tree, stack, weights, ref.values)

    mean_losses = engine.mean_loss(grid)
    i = int(np.argmin(mean_losses))
    c_star = float(grid[i])
    if grid.size > 1:
        lo = float(grid[max(i - 1, 0)])
        hi = float(grid[min(i + 1, grid.size - 1)])
        refined, refined_loss = golden_section(
            lambda c: engine.mean_loss(float(c)), lo, hi, tol
        )
        if refined_loss < mean_losses[i]:
            c_star = float(refined)
    return CStarResult(
        c_star=c_star,
        method=BOOTSTRAP,
        bounds=(float(grid[0]), float(grid[-1])),
        profile_c=grid,
        profile_risk=mean_losses,
        resamples=resamples,
        skipped_resamples=skipped,
    )
