"""Monte Carlo harness: scenarios, replication runs, and sweeps.

Every replication draws its own generator stream from (scenario seed,
purpose, replication index), so results are bit-identical however the
replications are scheduled, including across process pools.  Risks are
evaluated against the analytically known system reliability of the
scenario; replications whose estimators fail on degenerate data are
excluded from the aggregates and counted.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .cstar import cstar_analytic, cstar_bootstrap, grid_values
from .datagen import CensoringSpec, TrueSystemCurve, WeibullSpec, generate
from .errors import DataError, NumericError, StructureError
from .estimators import (
    PLUGIN,
    SYSTEM_PLE,
    fit_component_curves,
    plugin_curve,
    system_ple,
)
from .risk import LossConfig, TrueRiskEvaluator
from .structure import Composite, StructureTree, homogeneous_tree, parse_structure

SHRINK_ANALYTIC = "shrink-analytic"
SHRINK_BOOTSTRAP = "shrink-bootstrap"
ALL_METHODS = (SYSTEM_PLE, PLUGIN, SHRINK_ANALYTIC, SHRINK_BOOTSTRAP)

_PURPOSE_GENERATE = 101
_PURPOSE_BOOTSTRAP = 202
_AXIS_CODES = {"n": 1, "eta": 2, "K": 3}


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Deterministic generator for (seed, keys...), order-independent of use."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


def derive_seed(seed: int, axis: str, value) -> int:
    """Stable per-sweep-point seed; adding points never perturbs others."""
    if isinstance(value, (int, np.integer)):
        value_key = int(value)
    else:
        value_key = int(np.float64(value).view(np.uint64))
    seq = np.random.SeedSequence([int(seed), _AXIS_CODES[axis], value_key])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one simulation scenario."""

    structure: str
    components: tuple[WeibullSpec, ...]
    eta: float
    n_systems: int
    replications: int
    seed: int
    methods: tuple[str, ...] = ALL_METHODS
    bootstrap_samples: int = 200
    bootstrap_grid: tuple[float, float, float] = (0.5, 2.0, 0.01)
    c_bounds: tuple[float, float] = (0.2, 5.0)
    tol: float = 1e-4
    loss: LossConfig = field(default_factory=LossConfig)
    label: str = "scenario"

    def __post_init__(self):
        tree = parse_structure(self.structure)
        if len(self.components) != tree.k:
            raise StructureError(
                f"{len(self.components)} component specs for a "
                f"{tree.k}-component structure"
            )
        if self.n_systems < 2:
            raise DataError("need at least two systems per replication")
        if self.replications < 1:
            raise DataError("need at least one replication")
        unknown = set(self.methods) - set(ALL_METHODS)
        if unknown:
            raise DataError(f"unknown methods: {sorted(unknown)}")
        if not self.methods:
            raise DataError("no methods requested")

    def tree(self) -> StructureTree:
        return parse_structure(self.structure)

    def grid(self) -> np.ndarray:
        return grid_values(*self.bootstrap_grid)


@dataclass
class ReplicationOutcome:
    risks: dict[str, float]
    cstars: dict[str, float]
    system_completeness: float
    component_completeness: np.ndarray
    failed: bool = False
    error: str = ""


@dataclass(frozen=True)
class MethodStats:
    mean_risk: float
    sd_risk: float
    mean_cstar: float | None = None
    sd_cstar: float | None = None
    risk_efficiency_pct: float | None = None


@dataclass(frozen=True)
class ScenarioResult:
    config: ScenarioConfig
    methods: dict[str, MethodStats]
    completeness_system: float
    completeness_components: np.ndarray
    included: int
    excluded: int
    elapsed_seconds: float
    replications: list[ReplicationOutcome] | None = None

    @property
    def label(self) -> str:
        return self.config.label


def run_replication(
    cfg: ScenarioConfig, rep: int, evaluator: TrueRiskEvaluator | None = None
) -> ReplicationOutcome:
    """One dataset draw plus every requested estimator's true risk."""
    tree = cfg.tree()
    if evaluator is None:
        evaluator = TrueRiskEvaluator(TrueSystemCurve(tree, cfg.components), cfg.loss)
    rng = substream(cfg.seed, _PURPOSE_GENERATE, rep)
    autopsy, system, _ = generate(
        tree, cfg.components, CensoringSpec(cfg.eta), cfg.n_systems, rng
    )
    outcome = ReplicationOutcome(
        risks={},
        cstars={},
        system_completeness=system.completeness(),
        component_completeness=autopsy.completeness(),
    )
    try:
        needs_curves = set(cfg.methods) - {SYSTEM_PLE}
        curves = fit_component_curves(autopsy) if needs_curves else None
        plug = plugin_curve(tree, curves, 1.0) if needs_curves else None
        for method in cfg.methods:
            if method == SYSTEM_PLE:
                estimate = system_ple(system)
            elif method == PLUGIN:
                estimate = plug
            elif method == SHRINK_ANALYTIC:
                selected = cstar_analytic(
                    autopsy, tree, cfg.loss, cfg.c_bounds, cfg.tol
                )
                outcome.cstars[method] = selected.c_star
                estimate = plugin_curve(tree, curves, selected.c_star)
            else:  # SHRINK_BOOTSTRAP
                boot_rng = substream(cfg.seed, _PURPOSE_BOOTSTRAP, rep)
                selected = cstar_bootstrap(
                    autopsy,
                    tree,
                    resamples=cfg.bootstrap_samples,
                    grid=cfg.grid(),
                    cfg=cfg.loss,
                    rng=boot_rng,
                    tol=cfg.tol,
                )
                outcome.cstars[method] = selected.c_star
                estimate = plugin_curve(tree, curves, selected.c_star)
            outcome.risks[method] = evaluator.loss(estimate)
    except (DataError, NumericError) as exc:
        outcome.failed = True
        outcome.error = str(exc)
    return outcome


def _replication_batch(args) -> list[ReplicationOutcome]:
    cfg, reps, evaluator = args
    return [run_replication(cfg, rep, evaluator) for rep in reps]


def run_scenario(
    cfg: ScenarioConfig, threads: int = 1, keep_replications: bool = False
) -> ScenarioResult:
    """Run all replications and aggregate per-method risk and c* statistics.

    With ``keep_replications`` the per-replication outcomes are retained
    on the result for replication-level comparisons.
    """
    started = time.perf_counter()
    tree = cfg.tree()
    evaluator = TrueRiskEvaluator(TrueSystemCurve(tree, cfg.components), cfg.loss)
    reps = list(range(cfg.replications))

    if threads > 1 and cfg.replications > 1:
        chunk = max(1, cfg.replications // (4 * threads))
        batches = [
            (cfg, reps[i : i + chunk], evaluator) for i in range(0, len(reps), chunk)
        ]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = [o for batch in pool.map(_replication_batch, batches) for o in batch]
    else:
        outcomes = [run_replication(cfg, rep, evaluator) for rep in reps]

    included = [o for o in outcomes if not o.failed]
    if not included:
        raise NumericError(
            f"all {cfg.replications} replications failed; last error: "
            f"{outcomes[-1].error}"
        )

    def _sd(values: np.ndarray) -> float:
        return float(np.std(values, ddof=1)) if values.size > 1 else 0.0

    plugin_mean = None
    if PLUGIN in cfg.methods:
        plugin_mean = float(np.mean([o.risks[PLUGIN] for o in included]))

    stats: dict[str, MethodStats] = {}
    for method in cfg.methods:
        risks = np.array([o.risks[method] for o in included])
        mean_risk = float(np.mean(risks))
        mean_c = sd_c = None
        efficiency = None
        if method in (SHRINK_ANALYTIC, SHRINK_BOOTSTRAP):
            cs = np.array([o.cstars[method] for o in included])
            mean_c, sd_c = float(np.mean(cs)), _sd(cs)
            if plugin_mean:
                efficiency = 100.0 * (plugin_mean - mean_risk) / plugin_mean
        stats[method] = MethodStats(
            mean_risk=mean_risk,
            sd_risk=_sd(risks),
            mean_cstar=mean_c,
            sd_cstar=sd_c,
            risk_efficiency_pct=efficiency,
        )

    return ScenarioResult(
        config=cfg,
        methods=stats,
        completeness_system=float(
            np.mean([o.system_completeness for o in included])
        ),
        completeness_components=np.mean(
            [o.component_completeness for o in included], axis=0
        ),
        included=len(included),
        excluded=len(outcomes) - len(included),
        elapsed_seconds=time.perf_counter() - started,
        replications=outcomes if keep_replications else None,
    )


def _homogeneous_kind(cfg: ScenarioConfig) -> str:
    tree = cfg.tree()
    root = tree.root
    if not isinstance(root, Composite) or any(
        isinstance(ch, Composite) for ch in root.children
    ):
        raise DataError("K sweep needs a flat series(...) or parallel(...) structure")
    if len(set(cfg.components)) != 1:
        raise DataError("K sweep needs identical component specs")
    return root.kind


def sweep_point(cfg: ScenarioConfig, axis: str, value) -> ScenarioConfig:
    """The scenario at one sweep point, with its derived seed and label."""
    if axis not in _AXIS_CODES:
        raise DataError(f"unknown sweep axis {axis!r}")
    seed = derive_seed(cfg.seed, axis, value)
    if axis == "n":
        n = int(value)
        return replace(cfg, n_systems=n, seed=seed, label=f"n={n}")
    if axis == "eta":
        eta = float(value)
        if eta < 0:
            raise DataError("eta must be nonnegative")
        return replace(cfg, eta=eta, seed=seed, label=f"eta={eta:g}")
    kind = _homogeneous_kind(cfg)
    k = int(value)
    tree = homogeneous_tree(kind, k)
    return replace(
        cfg,
        structure=tree.expression,
        components=(cfg.components[0],) * k,
        seed=seed,
        label=f"K={k}",
    )


def run_sweep(
    cfg: ScenarioConfig, axis: str, values, threads: int = 1
) -> list[ScenarioResult]:
    """One scenario run per sweep value along axis 'n', 'eta', or 'K'."""
    values = list(values)
    if not values:
        raise DataError("sweep needs at least one value")
    return [run_scenario(sweep_point(cfg, axis, v), threads=threads) for v in values]
