import math

import numpy as np
import pytest

from sysrel.datagen import CensoringSpec, TrueSystemCurve, WeibullSpec, generate
from sysrel.errors import DataError, NumericError
from sysrel.estimators import SystemCurveEstimate, fit_component_curves, plugin_curve
from sysrel.risk import (
    LossConfig,
    QuadCoefficients,
    analytic_risk,
    build_risk_grid,
    cstar_closed_form,
    cvm_loss,
    minimize_scalar,
    quad_coefficients,
    risk_on_grid,
)
from sysrel.structure import parse_structure
from sysrel.survival import SurvivalCurve

SERPAR = parse_structure("series(c1,parallel(c2,c3))")
SERPAR_SPECS = (WeibullSpec(2, 2.5), WeibullSpec(2, 1), WeibullSpec(2, 1))


def constant_estimate(value):
    return SystemCurveEstimate(
        times=np.array([0.0]), values=np.array([float(value)]), method="plugin"
    )


def serpar_fit(seed, n=15, eta=0.05):
    rng = np.random.default_rng(seed)
    autopsy, _, _ = generate(SERPAR, SERPAR_SPECS, CensoringSpec(eta), n, rng)
    curves = fit_component_curves(autopsy)
    weight = plugin_curve(SERPAR, curves, 1.0)
    return curves, weight


def zero_variance(curves):
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
        for c in curves
    )


class TestLossConfig:
    def test_defaults_valid(self):
        cfg = LossConfig()
        assert cfg.u_lo < cfg.u_hi

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"u_lo": 0.0},
            {"u_lo": 0.9, "u_hi": 0.5},
            {"u_hi": 1.0},
            {"panels": 5},
            {"denominator_floor": 0.0},
        ],
    )
    def test_rejects_bad_configs(self, kwargs):
        with pytest.raises(DataError):
            LossConfig(**kwargs)


class TestStepLoss:
    def test_zero_when_curves_agree(self):
        _, weight = serpar_fit(1)
        assert cvm_loss(weight, weight) == 0.0

    def test_positive_when_apart(self):
        _, weight = serpar_fit(2)
        assert cvm_loss(weight, constant_estimate(1.0)) > 0.0

    def test_skips_tiny_denominators(self):
        ref = SystemCurveEstimate(
            times=np.array([0.0, 1.0, 2.0]),
            values=np.array([1.0, 0.5, 0.0]),
            method="plugin",
        )
        loss = cvm_loss(ref, constant_estimate(1.0))
        # only the t=1 jump contributes: mass 0.5, diff 0.5, denom 0.25
        assert loss == pytest.approx(0.5 * 0.25 / 0.25)


class TestContinuousLoss:
    def test_quadrature_matches_closed_form(self):
        # est == 1 against R(t) = exp(-t): integrand u/(1-u) in the u variable
        truth = TrueSystemCurve(parse_structure("c1"), (WeibullSpec(1, 1),))
        cfg = LossConfig()
        exact = (-math.log(1.0 - cfg.u_hi) - cfg.u_hi) - (
            -math.log(1.0 - cfg.u_lo) - cfg.u_lo
        )
        loss = cvm_loss(truth, constant_estimate(1.0), cfg)
        assert loss == pytest.approx(exact, rel=0.01)
        assert exact == pytest.approx(5.9088, abs=5e-4)

    def test_zero_against_itself(self):
        truth = TrueSystemCurve(SERPAR, SERPAR_SPECS)

        class Exact:
            def evaluate(self, t):
                return truth.survival(t)

        assert cvm_loss(truth, Exact()) == pytest.approx(0.0, abs=1e-12)

    def test_doubling_panels_changes_little(self):
        truth = TrueSystemCurve(SERPAR, SERPAR_SPECS)
        _, weight = serpar_fit(3)
        base = cvm_loss(truth, weight, LossConfig(panels=2000))
        fine = cvm_loss(truth, weight, LossConfig(panels=4000))
        assert abs(fine - base) < 0.005 * base


class TestAnalyticRisk:
    def test_zero_at_c_one_without_variance(self):
        curves, weight = serpar_fit(4)
        risk = analytic_risk(1.0, zero_variance(curves), SERPAR, weight)
        assert risk == 0.0

    def test_bias_only_minimized_at_one(self):
        curves, weight = serpar_fit(5)
        flat = zero_variance(curves)
        grid = build_risk_grid(flat, SERPAR, weight)
        cs = np.linspace(0.5, 2.0, 61)
        risks = risk_on_grid(grid, cs)
        assert cs[np.argmin(risks)] == pytest.approx(1.0, abs=0.03)
        assert risk_on_grid(grid, 1.0) <= risks.min() + 1e-15

    def test_diverges_away_from_optimum(self):
        curves, weight = serpar_fit(6)
        grid = build_risk_grid(curves, SERPAR, weight)
        from sysrel.risk import coefficients_on_grid

        c_star = cstar_closed_form(coefficients_on_grid(grid))
        at_star = risk_on_grid(grid, c_star)
        assert risk_on_grid(grid, 0.05) > at_star
        assert risk_on_grid(grid, 10.0) > at_star

    def test_nonnegative_and_finite(self):
        for seed in range(10):
            curves, weight = serpar_fit(seed)
            risks = analytic_risk(
                np.array([0.2, 0.7, 1.0, 1.5, 5.0]), curves, SERPAR, weight
            )
            assert np.all(np.isfinite(risks))
            assert np.all(risks >= 0)

    def test_rejects_nonpositive_c(self):
        curves, weight = serpar_fit(7)
        with pytest.raises(DataError):
            analytic_risk(0.0, curves, SERPAR, weight)


class TestQuadCoefficients:
    def test_zero_variance_kills_a_and_b(self):
        curves, weight = serpar_fit(8)
        q = quad_coefficients(zero_variance(curves), SERPAR, weight)
        assert q.a == 0.0 and q.b == 0.0 and q.d >= 0.0

    def test_signs_on_random_datasets(self):
        rng = np.random.default_rng(77)
        trees = [SERPAR, parse_structure("parallel(c1,c2,c3)"),
                 parse_structure("series(c1,c2)")]
        specs3 = SERPAR_SPECS
        specs2 = (WeibullSpec(2, 1), WeibullSpec(1.5, 2))
        for i in range(1000):
            tree = trees[i % 3]
            specs = specs2 if tree.k == 2 else specs3
            autopsy, _, _ = generate(tree, specs, CensoringSpec(0.1), 10, rng)
            curves = fit_component_curves(autopsy)
            if all(c.times.size == 0 for c in curves):
                continue
            weight = plugin_curve(tree, curves, 1.0)
            q = quad_coefficients(curves, tree, weight)
            assert q.a >= 0.0 and q.b <= 0.0 and q.d >= 0.0

    def test_sign_contract_enforced(self):
        with pytest.raises(DataError):
            QuadCoefficients(a=-1.0, b=0.0, d=0.0)
        with pytest.raises(DataError):
            QuadCoefficients(a=1.0, b=0.5, d=0.0)

    def test_taylor_consistency_near_one(self):
        # the polynomial tracks the full risk to second order around c = 1
        for seed in (11, 22, 33, 44, 55):
            curves, weight = serpar_fit(seed)
            grid = build_risk_grid(curves, SERPAR, weight)
            from sysrel.risk import coefficients_on_grid

            q = coefficients_on_grid(grid)
            def gap(c):
                return abs(risk_on_grid(grid, c) - q.polynomial(c))

            near = max(gap(0.95), gap(1.05))
            far = max(gap(0.8), gap(1.2))
            if far < 1e-18:
                continue
            assert near <= 0.25 * far


class TestClosedForm:
    def test_reference_value(self):
        c = cstar_closed_form(QuadCoefficients(1.0, -0.1, 1.0))
        assert c == pytest.approx(0.4868693286, abs=1e-9)

    def test_symmetric_limit_without_b(self):
        assert cstar_closed_form(QuadCoefficients(1.0, -1e-300, 1.0)) == 0.5
        assert cstar_closed_form(QuadCoefficients(1.0, 0.0, 1.0)) == 0.5

    def test_degenerate_all_zero(self):
        assert cstar_closed_form(QuadCoefficients(0.0, 0.0, 0.0)) == 1.0

    def test_negative_discriminant_signals_fallback(self):
        # (2B - A - D)^2 + 12BD < 0 for these values
        q = QuadCoefficients(0.05, -0.2, 0.5)
        assert (2 * q.b - q.a - q.d) ** 2 + 12 * q.b * q.d < 0
        assert cstar_closed_form(q) is None

    def test_bounds_clamp(self):
        q = QuadCoefficients(10.0, -1e-300, 0.1)
        assert cstar_closed_form(q) == pytest.approx(0.1 / 10.1)
        assert cstar_closed_form(q, bounds=(0.2, 5.0)) == 0.2

    def test_matches_grid_minimizer(self):
        # draws kept in the regime where the interior minimum is the global
        # one on the grid range (see the draw bounds below)
        rng = np.random.default_rng(31337)
        grid = np.linspace(0.02, 3.0, 100_000)
        for _ in range(1000):
            a = rng.uniform(0.1, 1.0)
            d = rng.uniform(0.1, 1.0)
            b = -rng.uniform(0.0, 0.1) * (a + d)
            q = QuadCoefficients(a, b, d)
            c = cstar_closed_form(q)
            assert c is not None
            values = q.polynomial(grid)
            i = int(np.argmin(values))
            assert 0 < i < grid.size - 1, "grid argmin must be interior"
            assert abs(c - grid[i]) <= 1e-3

    def test_sign_of_a_plus_b_sets_direction(self):
        # |B| <= 0.13 (A + D) keeps the discriminant nonnegative and the
        # stationary pair on the far side of 1, where the claim holds
        rng = np.random.default_rng(424242)
        checked = 0
        while checked < 500:
            a = rng.uniform(0.01, 1.0)
            d = rng.uniform(0.01, 1.0)
            b = -rng.uniform(0.0, 0.13) * (a + d)
            if abs(a + b) < 1e-3:
                continue
            c = cstar_closed_form(QuadCoefficients(a, b, d))
            assert c is not None
            if a + b > 0:
                assert c < 1.0
            else:
                assert c > 1.0
            checked += 1

    def test_risk_slope_at_one(self):
        # numeric derivative of the polynomial at c=1 is 2(A + B)
        rng = np.random.default_rng(5150)
        h = 1e-6
        for _ in range(200):
            a = rng.uniform(0.0, 1.0)
            d = rng.uniform(0.0, 1.0)
            b = -rng.uniform(0.0, 1.0)
            q = QuadCoefficients(a, b, d)
            slope = (q.polynomial(1.0 + h) - q.polynomial(1.0 - h)) / (2 * h)
            assert slope == pytest.approx(2 * (a + b), abs=1e-5)
            if abs(a + b) > 1e-3:
                assert math.copysign(1, slope) == math.copysign(1, a + b)


class TestMinimizeScalar:
    def test_quadratic(self):
        c = minimize_scalar(lambda x: (x - 0.9) ** 2, 0.2, 5.0, 1e-5)
        assert c == pytest.approx(0.9, abs=1e-5)

    def test_quartic(self):
        c = minimize_scalar(
            lambda x: (x - 1) ** 4 + 0.1 * (x - 1) ** 2, 0.2, 5.0, 1e-5
        )
        assert c == pytest.approx(1.0, abs=1e-4)

    def test_matches_exhaustive_scan_on_risk(self):
        curves, weight = serpar_fit(9)
        grid = build_risk_grid(curves, SERPAR, weight)
        tol = 1e-5
        c = minimize_scalar(lambda x: risk_on_grid(grid, x), 0.2, 5.0, tol)
        scan = np.linspace(0.2, 5.0, 10_000)
        best = scan[np.argmin(risk_on_grid(grid, scan))]
        assert abs(c - best) <= max(2 * tol, scan[1] - scan[0])

    def test_all_non_finite_raises(self):
        with pytest.raises(NumericError):
            minimize_scalar(lambda x: math.nan, 0.0, 1.0, 1e-4)

    def test_bad_bracket(self):
        with pytest.raises(DataError):
            minimize_scalar(lambda x: x, 1.0, 1.0, 1e-4)
