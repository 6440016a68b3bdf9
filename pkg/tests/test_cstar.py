import numpy as np
import pytest

import sysrel.cstar as cstar_mod
from sysrel.cstar import (
    cstar_analytic,
    cstar_bootstrap,
    default_grid,
    grid_values,
)
from sysrel.datagen import AutopsyDataset, CensoringSpec, WeibullSpec, generate
from sysrel.errors import DataError, NumericError
from sysrel.estimators import fit_component_curves
from sysrel.risk import cstar_closed_form
from sysrel.structure import parse_structure
from sysrel.survival import SurvivalCurve

SERPAR = parse_structure("series(c1,parallel(c2,c3))")
SERPAR_SPECS = (WeibullSpec(2, 2.5), WeibullSpec(2, 1), WeibullSpec(2, 1))


def serpar_data(seed, n=15):
    rng = np.random.default_rng(seed)
    autopsy, _, _ = generate(SERPAR, SERPAR_SPECS, CensoringSpec(0.05), n, rng)
    return autopsy


class TestGrid:
    def test_default_grid_span(self):
        grid = default_grid()
        assert grid[0] == pytest.approx(0.5)
        assert grid[-1] == pytest.approx(2.0)
        assert grid.size == 151

    def test_bad_grid(self):
        with pytest.raises(DataError):
            grid_values(0.0, 1.0, 0.1)


class TestAnalytic:
    def test_serpar_result_shape(self):
        result = cstar_analytic(serpar_data(1), SERPAR)
        assert result.method == "analytic"
        assert result.bounds[0] <= result.c_star <= result.bounds[1]
        assert result.profile_c.size == result.profile_risk.size > 0
        q = result.coefficients
        assert q.a >= 0 and q.b <= 0 and q.d >= 0
        assert 0.9 < result.c_star < 1.1

    def test_closed_form_mode_agrees_with_formula(self):
        data = serpar_data(2)
        result = cstar_analytic(data, SERPAR, minimizer="closed-form")
        if not result.used_fallback:
            assert result.c_star == pytest.approx(
                cstar_closed_form(result.coefficients)
            )

    def test_deterministic(self):
        data = serpar_data(3)
        a = cstar_analytic(data, SERPAR)
        b = cstar_analytic(data, SERPAR)
        assert a.c_star == b.c_star

    def test_zero_variance_selects_one(self, monkeypatch):
        # bias-only risk is minimized at exactly c = 1
        data = serpar_data(4)
        real_fit = cstar_mod.fit_component_curves

        def flat_variance(d):
            return tuple(
                SurvivalCurve(
                    times=c.times,
                    survival=c.survival,
                    variance=np.zeros_like(c.variance),
                    at_risk=c.at_risk,
                    deaths=c.deaths,
                    n=c.n,
                    last_observed=c.last_observed,
                )
                for c in real_fit(d)
            )

        monkeypatch.setattr(cstar_mod, "fit_component_curves", flat_variance)
        tol = 1e-5
        result = cstar_analytic(data, SERPAR, tol=tol)
        assert result.c_star == pytest.approx(1.0, abs=10 * tol)
        assert result.coefficients.a == 0.0
        assert result.coefficients.b == 0.0

    def test_all_censored_rejected(self):
        data = AutopsyDataset(np.full((5, 3), 2.0), np.zeros((5, 3), dtype=int))
        with pytest.raises(DataError):
            cstar_analytic(data, SERPAR)

    def test_one_dead_component_tolerated(self):
        base = serpar_data(5)
        events = base.events.copy()
        events[:, 0] = 0  # component 1 fully censored
        data = AutopsyDataset(base.times, events)
        result = cstar_analytic(data, SERPAR)
        assert np.isfinite(result.c_star)

    def test_k_mismatch(self):
        data = serpar_data(6)
        with pytest.raises(DataError):
            cstar_analytic(data, parse_structure("series(c1,c2)"))

    def test_bad_minimizer_name(self):
        with pytest.raises(DataError):
            cstar_analytic(serpar_data(7), SERPAR, minimizer="nelder")


class _FixedRows:
    """Stub generator returning preset resample rows."""

    def __init__(self, rows):
        self.rows = np.asarray(rows)

    def integers(self, low, high, size):
        return self.rows


class TestBootstrap:
    def test_serpar_plausible(self):
        data = serpar_data(8)
        result = cstar_bootstrap(
            data, SERPAR, resamples=100, rng=np.random.default_rng(0)
        )
        assert result.method == "bootstrap"
        assert 0.9 < result.c_star < 1.1
        assert result.profile_risk.size == result.profile_c.size == 151

    def test_singleton_grid(self):
        data = serpar_data(9)
        result = cstar_bootstrap(
            data,
            SERPAR,
            resamples=10,
            grid=np.array([1.0]),
            rng=np.random.default_rng(1),
        )
        assert result.c_star == 1.0

    def test_deterministic_for_seed(self):
        data = serpar_data(10)
        r1 = cstar_bootstrap(data, SERPAR, resamples=50, rng=np.random.default_rng(7))
        r2 = cstar_bootstrap(data, SERPAR, resamples=50, rng=np.random.default_rng(7))
        assert r1.c_star == r2.c_star
        assert np.array_equal(r1.profile_risk, r2.profile_risk)

    def test_requires_resamples(self):
        with pytest.raises(DataError):
            cstar_bootstrap(serpar_data(11), SERPAR, resamples=0)

    def test_empty_grid_rejected(self):
        with pytest.raises(DataError):
            cstar_bootstrap(
                serpar_data(12), SERPAR, grid=np.array([]), rng=np.random.default_rng(0)
            )

    def test_degenerate_resamples_skipped_and_counted(self):
        # 2 systems, only the first has any event; resampling row 1 twice
        # yields a fully censored resample
        times = np.array([[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]])
        events = np.array([[0, 1, 1], [0, 0, 0]])
        data = AutopsyDataset(times, events)
        result = cstar_bootstrap(
            data,
            SERPAR,
            resamples=200,
            rng=np.random.default_rng(3),
            grid=np.linspace(0.5, 2.0, 16),
        )
        assert 0 < result.skipped_resamples < 100

    def test_all_degenerate_raises(self):
        times = np.array([[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]])
        events = np.array([[0, 1, 1], [0, 0, 0]])
        data = AutopsyDataset(times, events)
        with pytest.raises(NumericError):
            cstar_bootstrap(data, SERPAR, resamples=4, rng=_FixedRows([1, 1]))

    def test_matches_manual_grid_scan(self):
        # reproduce the mean loss by hand for a tiny case
        data = serpar_data(13, n=8)
        grid = np.array([0.8, 1.0, 1.25])
        rows_rng = np.random.default_rng(5)
        result = cstar_bootstrap(data, SERPAR, resamples=20, grid=grid, rng=rows_rng)

        from sysrel.estimators import plugin_curve
        from sysrel.risk import cvm_loss
        from sysrel.survival import km_fit

        ref = plugin_curve(SERPAR, fit_component_curves(data), 1.0)
        check_rng = np.random.default_rng(5)
        losses = np.zeros(grid.size)
        used = 0
        for _ in range(20):
            rows = check_rng.integers(0, data.n, data.n)
            sub = data.resample(rows)
            if not sub.events.any():
                continue
            used += 1
            curves = tuple(km_fit(sub.component_sample(j)) for j in (1, 2, 3))
            for i, c in enumerate(grid):
                losses[i] += cvm_loss(ref, plugin_curve(SERPAR, curves, float(c)))
        assert used > 0
        assert np.allclose(result.profile_risk, losses / used, atol=1e-12)
