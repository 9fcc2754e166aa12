import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heatlab import errors
from heatlab import expr as ex
from heatlab.asymptotics import (expansion_powers, fit_expansion,
                                 geometric_content_coefficients,
                                 geometric_trace_coefficients)
from heatlab.heat import (evaluate_on_grid, geometric_t_grid,
                          spec_content_series, spec_trace_series)
from heatlab.manifolds import (AbstractFiber, Circle, FlatTorus, Interval,
                               Product, WarpedProduct)

SQPI = math.sqrt(math.pi)


def warped_hand_coefficients(f, a, b, fiber_circumference=2 * math.pi):
    """Hand-evaluated expansion coefficients for [a,b] warped over a circle.

    With h = exp(f): gauss = -(f'' + f'^2), boundary trace of L is
    -h'/h = -f' at x=a and +f' at x=b (inward normal convention), boundary
    measure is exp(f) times the fiber circumference, tau = 2 gauss, and the
    contractions R_amma = gauss, R_amam = -gauss.
    """
    from scipy.integrate import quad

    fp = f.diff(1)
    fpp = f.diff(2)

    def gauss(x):
        return -(fpp.evaluate(x) + fp.evaluate(x) ** 2)

    def vol_density(x):
        return math.exp(f.evaluate(x)) * fiber_circumference

    vol = quad(vol_density, a, b, epsabs=1e-13, epsrel=1e-13)[0]
    data = {}
    for x0, sign in ((a, -1.0), (b, 1.0)):
        data[x0] = {
            "measure": math.exp(f.evaluate(x0)) * fiber_circumference,
            "l": sign * fp.evaluate(x0),
            "gauss": gauss(x0),
            "tau_m": (1.0 if x0 == a else -1.0)
                     * (-2 * f.diff(3).evaluate(x0)
                        - 4 * fp.evaluate(x0) * fpp.evaluate(x0)),
        }
    bdy_vol = sum(d["measure"] for d in data.values())

    a_coef = np.zeros(5)
    b_coef = np.zeros(5)
    a_coef[0] = vol / (4 * math.pi)
    a_coef[1] = -0.25 * (4 * math.pi) ** (-0.5) * bdy_vol
    tau_int = quad(lambda x: 2 * gauss(x) * vol_density(x), a, b,
                   epsabs=1e-13, epsrel=1e-13)[0]
    a_coef[2] = (1 / 6.0) / (4 * math.pi) * (
        tau_int + 2 * sum(d["l"] * d["measure"] for d in data.values()))
    a_coef[3] = -(1 / 384.0) * (4 * math.pi) ** (-0.5) * sum(
        (16 * 2 * d["gauss"] + 8 * (-d["gauss"]) + 7 * d["l"] ** 2
         - 10 * d["l"] ** 2) * d["measure"] for d in data.values())
    # interior: tau_kk integrates against the weighted measure; for a
    # surface 5 tau^2 - 2|ricci|^2 + 2|riemann|^2 = 20K^2 - 4K^2 + 8K^2
    tau_kk_int = quad(
        lambda x: 12 * _tau_kk(f, x) * vol_density(x), a, b,
        epsabs=1e-12, epsrel=1e-12)[0]
    k2_int = quad(lambda x: 24 * gauss(x) ** 2 * vol_density(x), a, b,
                  epsabs=1e-12, epsrel=1e-12)[0]
    a_coef[4] = (1 / 360.0) / (4 * math.pi) * (tau_kk_int + k2_int) \
        + (1 / 360.0) / (4 * math.pi) * sum(
            (-18 * d["tau_m"] + 20 * 2 * d["gauss"] * d["l"]
             + 4 * (-d["gauss"]) * d["l"] - 12 * (-d["gauss"]) * d["l"]
             + (40 / 21.0 - 88 / 7.0 + 320 / 21.0) * d["l"] ** 3)
            * d["measure"] for d in data.values())

    b_coef[0] = vol
    b_coef[1] = -2 / SQPI * bdy_vol
    b_coef[2] = 0.5 * sum(d["l"] * d["measure"] for d in data.values())
    b_coef[3] = -2 / SQPI * sum(
        ((1 / 12.0) * d["l"] ** 2 - (1 / 6.0) * d["l"] ** 2
         - (1 / 6.0) * d["gauss"]) * d["measure"] for d in data.values())
    b_coef[4] = sum(
        (-(1 / 16.0) * d["l"] ** 3 + (1 / 8.0) * d["l"] ** 3
         - (1 / 16.0) * (-d["gauss"]) * d["l"]
         + (1 / 32.0) * d["tau_m"]) * d["measure"] for d in data.values())
    return a_coef, b_coef


def _tau_kk(f, x):
    # tau(x) = -2(f'' + f'^2); tau_kk = tau'' + f' tau' on the warped surface
    fp, fpp, f3, f4 = (f.diff(k).evaluate(x) for k in (1, 2, 3, 4))
    tau_p = -2 * f3 - 4 * fp * fpp
    tau_pp = -2 * f4 - 4 * fpp ** 2 - 4 * fp * f3
    return tau_pp + fp * tau_p


class TestGeometricCoefficients:
    def test_interval(self):
        a = geometric_trace_coefficients(Interval(0.0, math.pi))
        np.testing.assert_allclose(
            a, [SQPI / 2, -0.5, 0.0, 0.0, 0.0], atol=1e-14)
        b = geometric_content_coefficients(Interval(0.0, math.pi))
        np.testing.assert_allclose(
            b, [math.pi, -4 / SQPI, 0.0, 0.0, 0.0], atol=1e-14)

    def test_flat_cylinder(self):
        spec = Product((Interval(0.0, math.pi), Circle(1.0)))
        a = geometric_trace_coefficients(spec)
        np.testing.assert_allclose(
            a, [math.pi / 2, -SQPI / 2, 0.0, 0.0, 0.0], atol=1e-13)
        b = geometric_content_coefficients(spec)
        np.testing.assert_allclose(
            b, [2 * math.pi ** 2, -8 * SQPI, 0.0, 0.0, 0.0], atol=1e-12)

    def test_closed_torus(self):
        spec = FlatTorus([[4.0, 1.0], [1.0, 9.0]])
        a = geometric_trace_coefficients(spec)
        vol = math.sqrt(35.0)
        np.testing.assert_allclose(a, [vol / (4 * math.pi), 0, 0, 0, 0],
                                   atol=1e-14)
        b = geometric_content_coefficients(spec)
        np.testing.assert_allclose(b, [vol, 0, 0, 0, 0], atol=1e-13)

    @pytest.mark.parametrize("fexpr", [
        lambda x: 0.2 * x * (1.0 - x),
        lambda x: 0.1 * x ** 3 - 0.15 * x ** 2 + 0.2 * x,
        lambda x: 0.25 * ex.sin(x),
    ])
    def test_warped_against_hand_formulas(self, fexpr):
        x = ex.var()
        f = fexpr(x)
        spec = WarpedProduct(Interval(0.0, 1.0), f, Circle(1.0))
        a = geometric_trace_coefficients(spec)
        b = geometric_content_coefficients(spec)
        a_hand, b_hand = warped_hand_coefficients(f, 0.0, 1.0)
        np.testing.assert_allclose(a, a_hand, rtol=1e-9, atol=1e-11)
        np.testing.assert_allclose(b, b_hand, rtol=1e-9, atol=1e-11)

    def test_constant_warp_matches_rescaled_product(self):
        c = 0.4
        spec1 = WarpedProduct(Interval(0.0, 1.0), ex.const(c), Circle(1.0))
        spec2 = Product((Interval(0.0, 1.0), Circle(math.exp(c))))
        np.testing.assert_allclose(geometric_trace_coefficients(spec1),
                                   geometric_trace_coefficients(spec2),
                                   atol=1e-12)
        np.testing.assert_allclose(geometric_content_coefficients(spec1),
                                   geometric_content_coefficients(spec2),
                                   atol=1e-12)

    def test_unsupported_geometry(self):
        fib = AbstractFiber(2, 1.0, [0.0], cutoff=1.0)
        with pytest.raises(errors.UnsupportedGeometry):
            geometric_trace_coefficients(WarpedProduct(Interval(0, 1),
                                                       ex.const(0.0), fib))
        with pytest.raises(errors.UnsupportedGeometry):
            geometric_content_coefficients(Product((Interval(0, 1), fib)))


class TestFitExpansion:
    def test_recovers_synthetic_series(self):
        rng = np.random.default_rng(3)
        coef = np.array([0.7, -1.3, 0.25, 0.05, -0.002])
        ts = geometric_t_grid(1e-4, 1e-1)
        powers = expansion_powers("trace", 1, 4)
        vals = sum(c * ts ** p for c, p in zip(coef, powers))
        fit = fit_expansion(ts, vals, 1, "trace", orders=4, residual_tol=1e-8)
        np.testing.assert_allclose(fit.coefficients, coef, atol=1e-10)

    def test_interval_trace_closed_form(self):
        series = spec_trace_series(Interval(0.0, math.pi), 40.0 / 1e-4 + 10)
        ts = geometric_t_grid(1e-4, 1e-1)
        vals, _ = evaluate_on_grid(series, ts)
        fit = fit_expansion(ts, vals, 1, "trace", orders=4, residual_tol=1e-8)
        assert fit.coefficients[0] == pytest.approx(0.8862269255, abs=1e-8)
        assert fit.coefficients[1] == pytest.approx(-0.5, abs=1e-8)

    def test_interval_content_closed_form(self):
        series = spec_content_series(Interval(0.0, math.pi), 40.0 / 1e-4 + 10)
        ts = geometric_t_grid(1e-4, 1e-1)
        vals, _ = evaluate_on_grid(series, ts)
        fit = fit_expansion(ts, vals, 1, "content", orders=4, residual_tol=1e-8)
        assert fit.coefficients[0] == pytest.approx(math.pi, abs=1e-8)
        assert fit.coefficients[1] == pytest.approx(-2.2567583, abs=1e-7)

    @given(st.floats(min_value=-5.0, max_value=5.0).filter(lambda k: abs(k) > 1e-3))
    @settings(max_examples=20, deadline=None)
    def test_scaling_covariance(self, k):
        ts = geometric_t_grid(1e-3, 1e-1, per_decade=20)
        powers = expansion_powers("content", 2, 3)
        coef = np.array([2.0, -0.5, 0.1, 0.03])
        vals = sum(c * ts ** p for c, p in zip(coef, powers))
        f1 = fit_expansion(ts, vals, 2, "content", orders=3, residual_tol=1e-6)
        f2 = fit_expansion(ts, k * vals, 2, "content", orders=3,
                           residual_tol=1e-6)
        np.testing.assert_allclose(f2.coefficients, k * f1.coefficients,
                                   rtol=1e-9, atol=1e-12)

    def test_needs_enough_samples(self):
        with pytest.raises(errors.AcceptanceFailed):
            fit_expansion([0.1, 0.2, 0.3], [1.0, 2.0, 3.0], 1, "trace",
                          orders=4)

    def test_residual_threshold_enforced(self):
        ts = geometric_t_grid(1e-3, 1e-1)
        vals = np.sin(ts * 50.0) + 2.0  # not an expansion of this form
        with pytest.raises(errors.AcceptanceFailed):
            fit_expansion(ts, vals, 1, "content", orders=2, residual_tol=1e-10)

    def test_orders_capped(self):
        ts = geometric_t_grid(1e-3, 1e-1)
        with pytest.raises(errors.AcceptanceFailed):
            fit_expansion(ts, np.ones_like(ts), 1, "trace", orders=7)

    def test_dimension_readable_from_trace_but_not_content(self):
        # the leading trace power carries the dimension; content starts at
        # order zero for every dimension, and equal-volume fiber swaps leave
        # every content coefficient unchanged
        assert expansion_powers("trace", 1, 2)[0] == -0.5
        assert expansion_powers("trace", 2, 2)[0] == -1.0
        assert expansion_powers("content", 1, 2)[0] == 0.0
        assert expansion_powers("content", 2, 2)[0] == 0.0
        x = ex.var()
        f = 0.2 * ex.sin(x)
        base = Interval(0.0, math.pi)
        s1 = spec_content_series(WarpedProduct(base, f, Circle(1.0)), 830.0)
        fib = AbstractFiber(3, 2 * math.pi, [0.0, 5.0], cutoff=5.0)
        s2 = spec_content_series(WarpedProduct(base, f, fib), 830.0)
        ts = geometric_t_grid(0.05, 0.5, per_decade=12)
        v1, _ = evaluate_on_grid(s1, ts)
        v2, _ = evaluate_on_grid(s2, ts)
        np.testing.assert_allclose(v1, v2, rtol=0, atol=1e-13)


class TestCoveringScaling:
    def test_coefficients_scale_with_cover_order(self):
        base = Interval(0.0, math.pi)
        for k in (2, 3):
            big = Product((base, Circle(float(k))))
            small = Product((base, Circle(1.0)))
            np.testing.assert_allclose(
                geometric_trace_coefficients(big),
                k * geometric_trace_coefficients(small), atol=1e-12)
            np.testing.assert_allclose(
                geometric_content_coefficients(big),
                k * geometric_content_coefficients(small), atol=1e-11)


class TestConditioning:
    def test_ill_conditioned_window_rejected(self):
        ts = np.linspace(1e-4, 1.02e-4, 40)
        vals = 1.0 + np.sqrt(ts)
        with pytest.raises(errors.IllConditioned):
            fit_expansion(ts, vals, 1, "content", orders=6, residual_tol=1.0)


class TestFittedCoveringScaling:
    def test_fitted_coefficients_double_under_double_cover(self):
        # both the geometric and the fitted low-order coefficients scale
        # with the cover order
        base = Interval(0.0, math.pi)
        cutoff = 40.0 / 1e-4 + 10.0
        ts = geometric_t_grid(1e-4, 1e-1)
        fits = {}
        for r in (1.0, 2.0):
            spec = Product((base, Circle(r)))
            tr, _ = evaluate_on_grid(spec_trace_series(spec, cutoff), ts)
            ct, _ = evaluate_on_grid(spec_content_series(spec, cutoff), ts)
            fits[r] = (
                fit_expansion(ts, tr, 2, "trace", orders=4,
                              residual_tol=1e-8).coefficients,
                fit_expansion(ts, ct, 2, "content", orders=4,
                              residual_tol=1e-8).coefficients,
            )
        for kind in (0, 1):
            np.testing.assert_allclose(fits[2.0][kind][:3],
                                       2.0 * fits[1.0][kind][:3],
                                       rtol=1e-7, atol=1e-7)
