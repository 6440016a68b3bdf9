"""Simulation of component lifetimes and censored system/autopsy datasets.

Component lifetimes are Weibull with survival R(t) = exp(-(t/scale)^shape),
drawn by inverse-CDF from the supplied generator so that a fixed stream
state reproduces datasets bit for bit.  Each system carries one
exponential monitoring time; every component record is right-censored at
the earlier of the monitoring time and the system failure time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, StructureError
from .structure import StructureTree
from .survival import CensoredSample


@dataclass(frozen=True)
class WeibullSpec:
    """Weibull lifetime with shape kappa and time-scale lambda."""

    shape: float
    scale: float

    def __post_init__(self):
        for name, v in (("shape", self.shape), ("scale", self.scale)):
            if not (math.isfinite(v) and v > 0):
                raise DataError(f"Weibull {name} must be finite and positive, got {v!r}")

    def survival(self, t):
        t = np.asarray(t, dtype=float)
        out = np.exp(-((t / self.scale) ** self.shape))
        return float(out) if t.ndim == 0 else out

    def quantile(self, u):
        """Inverse CDF: time by which a fraction ``u`` has failed."""
        u = np.asarray(u, dtype=float)
        out = self.scale * (-np.log1p(-u)) ** (1.0 / self.shape)
        return float(out) if u.ndim == 0 else out

    def mean(self) -> float:
        return self.scale * math.gamma(1.0 + 1.0 / self.shape)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if n < 1:
            raise DataError("sample size must be at least 1")
        return self.quantile(rng.random(n))


def sample_weibull(spec: WeibullSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. Weibull lifetimes via inverse-CDF from a uniform stream."""
    return spec.sample(rng, n)


@dataclass(frozen=True)
class CensoringSpec:
    """Exponential monitoring-time rate; 0 disables monitoring censoring."""

    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate >= 0):
            raise DataError(f"censoring rate must be finite and >= 0, got {self.rate!r}")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.rate == 0.0:
            return np.full(n, np.inf)
        return -np.log1p(-rng.random(n)) / self.rate


@dataclass(frozen=True)
class SystemDataset:
    """Observed system lifetimes (Z_i, delta_i), one row per system."""

    times: np.ndarray
    events: np.ndarray

    def __post_init__(self):
        sample = CensoredSample(self.times, self.events)  # reuse validation
        object.__setattr__(self, "times", sample.times)
        object.__setattr__(self, "events", sample.events)

    @property
    def n(self) -> int:
        return self.times.size

    def sample(self) -> CensoredSample:
        return CensoredSample(self.times, self.events)

    def completeness(self) -> float:
        """Percentage of uncensored system lifetimes."""
        return 100.0 * float(np.mean(self.events))


@dataclass(frozen=True)
class AutopsyDataset:
    """Per-component observations (Z_ij, delta_ij), systems in rows."""

    times: np.ndarray
    events: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        events = np.asarray(self.events)
        if times.ndim != 2 or times.size == 0:
            raise DataError("autopsy data must be a non-empty (n, K) array")
        if times.shape != events.shape:
            raise DataError("times and events must have equal shape")
        if not np.all(np.isfinite(times)) or np.any(times < 0):
            raise DataError("times must be finite and nonnegative")
        if not np.isin(events, (0, 1)).all():
            raise DataError("event flags must be 0 or 1")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "events", events.astype(np.int8))

    @property
    def n(self) -> int:
        return self.times.shape[0]

    @property
    def k(self) -> int:
        return self.times.shape[1]

    def component_sample(self, j: int) -> CensoredSample:
        """Censored sample for component ``j`` (1-based, grammar labels)."""
        if not 1 <= j <= self.k:
            raise DataError(f"component index {j} outside 1..{self.k}")
        return CensoredSample(self.times[:, j - 1], self.events[:, j - 1])

    def completeness(self) -> np.ndarray:
        """Per-component percentage of uncensored records."""
        return 100.0 * self.events.mean(axis=0)

    def resample(self, rows: np.ndarray) -> "AutopsyDataset":
        """New dataset from the given system rows (with repeats allowed)."""
        return AutopsyDataset(self.times[rows], self.events[rows])


@dataclass(frozen=True)
class SimulatedTruth:
    """Raw draws behind a generated dataset, kept for diagnostics."""

    component_lifetimes: np.ndarray  # (n, K)
    monitor_times: np.ndarray  # (n,)
    system_lifetimes: np.ndarray  # (n,)


def censor(
    tree: StructureTree, lifetimes: np.ndarray, monitor_times: np.ndarray
) -> tuple[AutopsyDataset, SystemDataset, SimulatedTruth]:
    """Apply the autopsy censoring scheme to raw draws.

    Component j of system i is observed at Z_ij = min(T_ij, min(C_i, S_i))
    with delta_ij = 1 exactly when the true lifetime was reached; the
    system record is (min(S_i, C_i), 1{S_i <= C_i}).
    """
    lifetimes = np.asarray(lifetimes, dtype=float)
    monitor_times = np.asarray(monitor_times, dtype=float)
    if lifetimes.ndim != 2 or lifetimes.shape[1] != tree.k:
        raise StructureError(
            f"lifetime matrix must have {tree.k} columns for this structure"
        )
    s = tree.lifetime(lifetimes)
    cutoff = np.minimum(monitor_times, s)
    z = np.minimum(lifetimes, cutoff[:, None])
    delta = (lifetimes <= cutoff[:, None]).astype(np.int8)
    sys_times = np.minimum(s, monitor_times)
    sys_events = (s <= monitor_times).astype(np.int8)
    autopsy = AutopsyDataset(z, delta)
    system = SystemDataset(sys_times, sys_events)
    return autopsy, system, SimulatedTruth(lifetimes, monitor_times, s)


def generate(
    tree: StructureTree,
    specs: tuple[WeibullSpec, ...],
    censoring: CensoringSpec,
    n: int,
    rng: np.random.Generator,
) -> tuple[AutopsyDataset, SystemDataset, SimulatedTruth]:
    """Draw ``n`` systems and return (autopsy data, system data, raw truth).

    Component columns are drawn in component order, then the monitoring
    times, so a given generator state always yields the same datasets.
    """
    if len(specs) != tree.k:
        raise StructureError(
            f"{len(specs)} component specs for a {tree.k}-component structure"
        )
    if n < 1:
        raise DataError("need at least one system")
    lifetimes = np.column_stack([spec.sample(rng, n) for spec in specs])
    monitor = censoring.sample(rng, n)
    return censor(tree, lifetimes, monitor)


def completeness(data) -> float | np.ndarray:
    """Percentage of uncensored records, per component for autopsy data."""
    return data.completeness()


class TrueSystemCurve:
    """Exact system reliability for a structure with Weibull components.

    Exposes the survival function R_S, the CDF F_S, and the quantile
    F_S^{-1} (by monotone bisection), which the risk integrals use as
    the change of variable.
    """

    def __init__(self, tree: StructureTree, specs: tuple[WeibullSpec, ...]):
        if len(specs) != tree.k:
            raise StructureError(
                f"{len(specs)} component specs for a {tree.k}-component structure"
            )
        self.tree = tree
        self.specs = tuple(specs)

    def survival(self, t):
        t = np.asarray(t, dtype=float)
        return self.tree.reliability([spec.survival(t) for spec in self.specs])

    def cdf(self, t):
        return 1.0 - self.survival(t)

    def quantile(self, u, iterations: int = 100):
        """Failure-time quantile by bisection; vectorized over ``u``."""
        u = np.asarray(u, dtype=float)
        if np.any(u < 0) or np.any(u >= 1):
            raise DataError("quantile levels must lie in [0, 1)")
        hi = max(spec.scale for spec in self.specs)
        u_max = float(np.max(u)) if u.size else 0.0
        while self.cdf(hi) < u_max:
            hi *= 2.0
        lo_arr = np.zeros_like(u, dtype=float)
        hi_arr = np.full_like(u, hi, dtype=float)
        for _ in range(iterations):
            mid = 0.5 * (lo_arr + hi_arr)
            below = self.cdf(mid) < u
            lo_arr = np.where(below, mid, lo_arr)
            hi_arr = np.where(below, hi_arr, mid)
        out = 0.5 * (lo_arr + hi_arr)
        return float(out) if u.ndim == 0 else out


def true_system_curve(
    tree: StructureTree, specs: tuple[WeibullSpec, ...]
) -> TrueSystemCurve:
    """Convenience constructor for :class:`TrueSystemCurve`."""
    return TrueSystemCurve(tree, specs)
