"""System reliability estimates: system-level PLE, plug-in, and shrinkage.

The plug-in family raises every component product-limit curve to a common
power c before composing through the structure:

    R_S(t; c) = h(R_1(t)^c, ..., R_K(t)^c)

c = 1 is the ordinary plug-in; other values rescale every estimated
cumulative hazard by c.  The composed curve is a step function that can
only change at component jump times, so it is stored exactly on that grid.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .datagen import AutopsyDataset, SystemDataset
from .errors import DataError
from .structure import StructureTree
from .survival import SurvivalCurve, km_fit

SYSTEM_PLE = "system-ple"
PLUGIN = "plugin"
SHRINK = "shrink"


@dataclass(frozen=True)
class SystemCurveEstimate:
    """An estimated system reliability curve on its exact jump grid.

    ``times`` always starts at 0 with value 1 (unless the data jump at 0);
    ``values`` hold the right-continuous value at and after each grid
    point.  Plug-in style estimates retain the structure and component
    curves so the shrinkage exponent can be changed later; the system PLE
    additionally carries Greenwood variances.
    """

    times: np.ndarray
    values: np.ndarray
    method: str
    coefficient: float = 1.0
    tree: StructureTree | None = None
    component_curves: tuple[SurvivalCurve, ...] | None = None
    variance: np.ndarray | None = None

    def evaluate(self, t):
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0):
            raise DataError("evaluation time must be nonnegative")
        idx = np.searchsorted(self.times, t_arr, side="right")
        table = np.concatenate(([1.0], self.values))
        out = table[idx]
        return float(out) if t_arr.ndim == 0 else out


def fit_component_curves(data: AutopsyDataset) -> tuple[SurvivalCurve, ...]:
    """Product-limit fit of every component column of an autopsy dataset."""
    return tuple(km_fit(data.component_sample(j)) for j in range(1, data.k + 1))


def system_ple(data: SystemDataset) -> SystemCurveEstimate:
    """Product-limit estimate from system-level lifetimes alone."""
    curve = km_fit(data.sample())
    times = curve.times
    values = curve.survival
    variance = curve.variance
    if times.size == 0 or times[0] > 0.0:
        times = np.concatenate(([0.0], times))
        values = np.concatenate(([1.0], values))
        variance = np.concatenate(([0.0], variance))
    return SystemCurveEstimate(
        times=times, values=values, method=SYSTEM_PLE, variance=variance
    )


def _merged_grid(curves: tuple[SurvivalCurve, ...]) -> np.ndarray:
    jumps = [c.times for c in curves if c.times.size]
    if not jumps:
        return np.zeros(1)
    return np.unique(np.concatenate([np.zeros(1)] + jumps))


def compose_powered(
    tree: StructureTree, component_values: np.ndarray, c
) -> np.ndarray:
    """h applied to componentwise powers R_j^c.

    ``component_values`` has the K component curves along axis 0;
    ``c`` may be a scalar or an array broadcastable against the
    remaining axes.  0^c is 0 for the (required) positive c.
    """
    powered = component_values ** np.asarray(c, dtype=float)
    return tree.reliability(list(powered))


def plugin_curve(
    tree: StructureTree, curves: tuple[SurvivalCurve, ...], c: float = 1.0
) -> SystemCurveEstimate:
    """Plug-in system estimate with shrinkage exponent ``c``.

    Component curves enter through their values on the merged jump grid,
    so the result is exact: between grid points nothing changes.
    """
    if c <= 0:
        raise DataError(f"shrinkage coefficient must be positive, got {c!r}")
    if len(curves) != tree.k:
        raise DataError(
            f"{len(curves)} component curves for a {tree.k}-component structure"
        )
    grid = _merged_grid(curves)
    component_values = np.vstack([curve.evaluate(grid) for curve in curves])
    values = compose_powered(tree, component_values, float(c))
    method = PLUGIN if c == 1.0 else SHRINK
    return SystemCurveEstimate(
        times=grid,
        values=np.asarray(values, dtype=float),
        method=method,
        coefficient=float(c),
        tree=tree,
        component_curves=tuple(curves),
    )


def shrink(estimate: SystemCurveEstimate, c_star: float) -> SystemCurveEstimate:
    """Re-evaluate a plug-in estimate at a new shrinkage coefficient."""
    if estimate.component_curves is None or estimate.tree is None:
        raise DataError("shrink needs an estimate that retains its component curves")
    if c_star <= 0:
        raise DataError(f"shrinkage coefficient must be positive, got {c_star!r}")
    refit = plugin_curve(estimate.tree, estimate.component_curves, c_star)
    return replace(refit, method=SHRINK, coefficient=float(c_star))
