"""File formats: dataset CSVs, curve/profile CSVs, bench tables, JSON configs.

Floats are serialized with 17 significant digits so a write/read round
trip reproduces every binary64 value exactly; the decimal separator is
always '.' regardless of locale.  Writes go through a temp file and a
rename so readers never observe a partial file.
"""

from __future__ import annotations

import csv
import io as _io
import json
import os
from pathlib import Path

import numpy as np

from .datagen import AutopsyDataset, SystemDataset, WeibullSpec
from .errors import DataError
from .experiments import ALL_METHODS, ScenarioConfig, ScenarioResult
from .risk import LossConfig


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_rows(path: str | Path, header: list[str], rows, comments=()) -> None:
    buf = _io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    atomic_write_text(path, buf.getvalue())


def _read_rows(path: str | Path, expected_header: list[str]) -> list[list[str]]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows or rows[0] != expected_header:
        raise DataError(
            f"{path}: expected header {','.join(expected_header)!r}"
        )
    return rows[1:]


def write_autopsy_csv(path: str | Path, data: AutopsyDataset) -> None:
    rows = [
        [i + 1, j + 1, fmt(data.times[i, j]), int(data.events[i, j])]
        for i in range(data.n)
        for j in range(data.k)
    ]
    _write_rows(path, ["system", "component", "time", "event"], rows)


def read_autopsy_csv(path: str | Path) -> AutopsyDataset:
    records: dict[int, dict[int, tuple[float, int]]] = {}
    for lineno, row in enumerate(
        _read_rows(path, ["system", "component", "time", "event"]), start=2
    ):
        try:
            system, component = int(row[0]), int(row[1])
            time_, event = float(row[2]), int(row[3])
        except (IndexError, ValueError) as exc:
            raise DataError(f"{path}: bad row {lineno}: {exc}") from exc
        if system < 1 or component < 1:
            raise DataError(f"{path}: row {lineno}: ids must be positive")
        if component in records.setdefault(system, {}):
            raise DataError(
                f"{path}: row {lineno}: duplicate (system, component) pair"
            )
        records[system][component] = (time_, event)
    if not records:
        raise DataError(f"{path}: no data rows")
    k = max(max(comps) for comps in records.values())
    times = np.empty((len(records), k))
    events = np.empty((len(records), k), dtype=np.int8)
    for i, system in enumerate(sorted(records)):
        comps = records[system]
        if sorted(comps) != list(range(1, k + 1)):
            raise DataError(
                f"{path}: system {system} must have components 1..{k} exactly once"
            )
        for j in range(1, k + 1):
            times[i, j - 1], events[i, j - 1] = comps[j]
    return AutopsyDataset(times, events)


def write_system_csv(path: str | Path, data: SystemDataset) -> None:
    rows = [
        [i + 1, fmt(data.times[i]), int(data.events[i])] for i in range(data.n)
    ]
    _write_rows(path, ["system", "time", "event"], rows)


def read_system_csv(path: str | Path) -> SystemDataset:
    times, events, seen = [], [], set()
    for lineno, row in enumerate(_read_rows(path, ["system", "time", "event"]), 2):
        try:
            system, time_, event = int(row[0]), float(row[1]), int(row[2])
        except (IndexError, ValueError) as exc:
            raise DataError(f"{path}: bad row {lineno}: {exc}") from exc
        if system in seen:
            raise DataError(f"{path}: row {lineno}: duplicate system id {system}")
        seen.add(system)
        times.append(time_)
        events.append(event)
    if not times:
        raise DataError(f"{path}: no data rows")
    return SystemDataset(np.array(times), np.array(events))


def write_curve_csv(path: str | Path, estimate, comments=()) -> None:
    """t,value(,variance) rows for a step curve, first row t=0, value=1."""
    times = estimate.times
    values = estimate.values
    variance = getattr(estimate, "variance", None)
    if times.size == 0 or times[0] > 0.0:
        times = np.concatenate(([0.0], times))
        values = np.concatenate(([1.0], values))
        if variance is not None:
            variance = np.concatenate(([0.0], variance))
    if variance is not None:
        header = ["t", "value", "variance"]
        rows = [[fmt(t), fmt(v), fmt(g)] for t, v, g in zip(times, values, variance)]
    else:
        header = ["t", "value"]
        rows = [[fmt(t), fmt(v)] for t, v in zip(times, values)]
    _write_rows(path, header, rows, comments)


def read_curve_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    path = Path(path)
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows or rows[0][:2] != ["t", "value"]:
        raise DataError(f"{path}: expected a t,value curve file")
    t = np.array([float(r[0]) for r in rows[1:]])
    v = np.array([float(r[1]) for r in rows[1:]])
    return t, v


def write_truth_csv(path: str | Path, truth, t_grid: np.ndarray) -> None:
    rows = [[fmt(t), fmt(v)] for t, v in zip(t_grid, truth.survival(t_grid))]
    _write_rows(path, ["t", "value"], rows)


def write_profile_csv(path: str | Path, cs, risks, comments=()) -> None:
    rows = [[fmt(c), fmt(r)] for c, r in zip(cs, risks)]
    _write_rows(path, ["c", "estimated_risk"], rows, comments)


def bench_header(max_k: int) -> list[str]:
    return (
        ["scenario", "method", "mean_risk", "sd_risk", "mean_cstar", "sd_cstar"]
        + ["pct_complete_system"]
        + [f"pct_complete_c{j}" for j in range(1, max_k + 1)]
        + ["risk_efficiency_pct", "excluded_reps"]
    )


def write_bench_csv(path: str | Path, results: list[ScenarioResult]) -> None:
    """One row per (scenario, method); component columns sized to the
    largest K so sweep blocks share a single header."""
    max_k = max(r.completeness_components.size for r in results)
    rows = []
    for result in results:
        comp = [fmt(p) for p in result.completeness_components]
        comp += [""] * (max_k - len(comp))
        for method, stats in result.methods.items():
            rows.append(
                [
                    result.label,
                    method,
                    fmt(stats.mean_risk),
                    fmt(stats.sd_risk),
                    fmt(stats.mean_cstar) if stats.mean_cstar is not None else "",
                    fmt(stats.sd_cstar) if stats.sd_cstar is not None else "",
                    fmt(result.completeness_system),
                    *comp,
                    fmt(stats.risk_efficiency_pct)
                    if stats.risk_efficiency_pct is not None
                    else "",
                    result.excluded,
                ]
            )
    _write_rows(path, bench_header(max_k), rows)


_CONFIG_KEYS = {
    "structure",
    "components",
    "eta",
    "n",
    "reps",
    "seed",
    "methods",
    "bootstrap",
    "c_bounds",
    "tol",
    "loss",
    "label",
    "sweep",
}


def load_config(path: str | Path) -> tuple[ScenarioConfig, dict | None]:
    """Parse a scenario JSON file; returns (config, sweep spec or None)."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise DataError(f"{path}: config must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise DataError(f"{path}: unknown config keys: {sorted(unknown)}")
    try:
        components = tuple(
            WeibullSpec(float(c["shape"]), float(c["scale"]))
            for c in raw["components"]
        )
        boot = raw.get("bootstrap", {})
        loss_raw = dict(raw.get("loss", {}))
        loss = LossConfig(
            denominator_floor=float(loss_raw.pop("denominator_floor", 1e-8)),
            panels=int(loss_raw.pop("panels", 2000)),
            u_lo=float(loss_raw.pop("u_lo", 1e-6)),
            u_hi=float(loss_raw.pop("u_hi", 1.0 - 1e-3)),
        )
        if loss_raw:
            raise DataError(f"unknown loss keys: {sorted(loss_raw)}")
        cfg = ScenarioConfig(
            structure=str(raw["structure"]),
            components=components,
            eta=float(raw.get("eta", 0.0)),
            n_systems=int(raw["n"]),
            replications=int(raw.get("reps", 1)),
            seed=int(raw.get("seed", 0)),
            methods=tuple(raw.get("methods", ALL_METHODS)),
            bootstrap_samples=int(boot.get("B", 200)),
            bootstrap_grid=tuple(boot.get("grid", (0.5, 2.0, 0.01))),
            c_bounds=tuple(raw.get("c_bounds", (0.2, 5.0))),
            tol=float(raw.get("tol", 1e-4)),
            loss=loss,
            label=str(raw.get("label", "scenario")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DataError):
            raise
        raise DataError(f"{path}: bad config: {exc}") from exc
    sweep = raw.get("sweep")
    if sweep is not None:
        if (
            not isinstance(sweep, dict)
            or set(sweep) != {"axis", "values"}
            or not isinstance(sweep["values"], list)
        ):
            raise DataError(f"{path}: sweep must be {{'axis': ..., 'values': [...]}}")
    return cfg, sweep


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """JSON-ready echo of a resolved config, as written to manifests."""
    return {
        "structure": cfg.structure,
        "components": [
            {"shape": spec.shape, "scale": spec.scale} for spec in cfg.components
        ],
        "eta": cfg.eta,
        "n": cfg.n_systems,
        "reps": cfg.replications,
        "seed": cfg.seed,
        "methods": list(cfg.methods),
        "bootstrap": {"B": cfg.bootstrap_samples, "grid": list(cfg.bootstrap_grid)},
        "c_bounds": list(cfg.c_bounds),
        "tol": cfg.tol,
        "loss": {
            "denominator_floor": cfg.loss.denominator_floor,
            "panels": cfg.loss.panels,
            "u_lo": cfg.loss.u_lo,
            "u_hi": cfg.loss.u_hi,
        },
        "label": cfg.label,
    }
