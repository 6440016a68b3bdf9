"""Coherent-system reliability estimation from censored lifetime data.

Builds nonparametric system reliability estimates from system-level or
component-level (autopsy) observations and improves the component
plug-in estimator by raising every component curve to a data-selected
power before composing through the structure function.
"""

__version__ = "0.1.0"

from .cstar import CStarResult, cstar_analytic, cstar_bootstrap
from .datagen import (
    AutopsyDataset,
    CensoringSpec,
    SystemDataset,
    TrueSystemCurve,
    WeibullSpec,
    generate,
)
from .errors import DataError, NumericError, StructureError, SysrelError, UsageError
from .estimators import (
    SystemCurveEstimate,
    fit_component_curves,
    plugin_curve,
    shrink,
    system_ple,
)
from .experiments import (
    ScenarioConfig,
    ScenarioResult,
    run_replication,
    run_scenario,
    run_sweep,
)
from .risk import (
    LossConfig,
    QuadCoefficients,
    analytic_risk,
    cstar_closed_form,
    cvm_loss,
    minimize_scalar,
    quad_coefficients,
)
from .structure import StructureTree, parse_structure
from .survival import CensoredSample, SurvivalCurve, km_fit

__all__ = [
    "AutopsyDataset",
    "CStarResult",
    "CensoredSample",
    "CensoringSpec",
    "DataError",
    "LossConfig",
    "NumericError",
    "QuadCoefficients",
    "ScenarioConfig",
    "ScenarioResult",
    "StructureError",
    "StructureTree",
    "SurvivalCurve",
    "SysrelError",
    "SystemCurveEstimate",
    "SystemDataset",
    "TrueSystemCurve",
    "UsageError",
    "WeibullSpec",
    "analytic_risk",
    "cstar_analytic",
    "cstar_bootstrap",
    "cstar_closed_form",
    "cvm_loss",
    "fit_component_curves",
    "generate",
    "km_fit",
    "minimize_scalar",
    "parse_structure",
    "plugin_curve",
    "quad_coefficients",
    "run_replication",
    "run_scenario",
    "run_sweep",
    "shrink",
    "system_ple",
]
