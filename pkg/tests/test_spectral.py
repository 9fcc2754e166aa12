import math

import numpy as np
import pytest

from heatlab import errors
from heatlab import expr as ex
from heatlab.manifolds import (AbstractFiber, Circle, FlatTorus, Interval,
                               Product, WarpedProduct)
from heatlab.spectral import (circle_spectrum,
                              combine_product, fd2d_warped_spectrum,
                              interval_spectrum, multiset_mismatch,
                              product_spectrum, schrodinger_dirichlet_spectrum,
                              sector_operator, sector_spectrum,
                              spectral_resolution, spectrum_csv, spectrum_json,
                              torus_spectrum, warped_product_spectrum)

from fd_oracles import brute_force_torus_eigenvalues, fd_schrodinger_eigenvalues


class TestIntervalSpectrum:
    def test_pi_interval(self):
        res = interval_spectrum(math.pi, 3)
        np.testing.assert_allclose(res.values, [1.0, 4.0, 9.0], rtol=1e-15)

    def test_empty_request(self):
        assert len(interval_spectrum(math.pi, 0)) == 0

    def test_unit_interval_vs_fd_oracle(self):
        res = interval_spectrum(1.0, 2)
        np.testing.assert_allclose(res.values, [math.pi ** 2, 4 * math.pi ** 2],
                                   rtol=1e-15)
        oracle = fd_schrodinger_eigenvalues(lambda x: 0.0, 0.0, 1.0, 2)
        np.testing.assert_allclose(res.values, oracle, rtol=1e-6)

    def test_mass_closed_form(self):
        res = interval_spectrum(math.pi, 6)
        k = np.arange(1, 7)
        expected = np.where(k % 2 == 1, 2 * math.sqrt(2 / math.pi) / k, 0.0)
        np.testing.assert_allclose(res.mass, expected, rtol=1e-14)


class TestCircleSpectrum:
    def test_unit_circle(self):
        res = circle_spectrum(1.0, 5.0)
        np.testing.assert_allclose(res.values, [0, 1, 1, 4, 4], rtol=0)

    def test_radius_two(self):
        res = circle_spectrum(2.0, 1.1)
        np.testing.assert_allclose(res.values, [0, 0.25, 0.25, 1, 1], rtol=1e-15)

    def test_only_constant(self):
        res = circle_spectrum(1.0, 0.0)
        np.testing.assert_allclose(res.values, [0.0])
        assert res.mass[0] == pytest.approx(math.sqrt(2 * math.pi), rel=1e-15)


class TestTorusSpectrum:
    def test_matches_circle(self):
        tor = torus_spectrum([[(2 * math.pi) ** 2]], 5.0)
        circ = circle_spectrum(1.0, 5.0)
        assert multiset_mismatch(tor.values, circ.values) is None

    def test_square_lattice_brute_force(self):
        G = np.eye(2) * (2 * math.pi) ** 2
        res = torus_spectrum(G, 2.5)
        expected = [0.0] + [1.0] * 4 + [2.0] * 4
        np.testing.assert_allclose(res.values, expected, atol=1e-12)
        oracle = brute_force_torus_eigenvalues(G, 2.5)
        np.testing.assert_allclose(res.values, oracle, atol=1e-12)

    def test_skew_lattice_brute_force(self):
        G = np.array([[4.0, 1.5], [1.5, 7.0]])
        res = torus_spectrum(G, 40.0)
        oracle = brute_force_torus_eigenvalues(G, 40.0)
        np.testing.assert_allclose(res.values, oracle, rtol=1e-12)

    @pytest.mark.parametrize("u", [[[1, 1], [0, 1]], [[2, 1], [1, 1]],
                                   [[1, 0], [-3, 1]]])
    def test_unimodular_invariance_exact_multiset(self, u):
        G = np.array([[4.0, 1.0], [1.0, 9.0]])
        U = np.array(u, dtype=float)
        G2 = U.T @ G @ U
        a = torus_spectrum(G, 30.0)
        b = torus_spectrum(G2, 30.0)
        assert len(a) == len(b)
        np.testing.assert_allclose(np.sort(a.values), np.sort(b.values),
                                   rtol=1e-12)

    def test_budget_cap(self):
        with pytest.raises(errors.CutoffTooLarge):
            torus_spectrum([[1.0]], 1e9, budget=100)


class TestSchrodinger:
    def test_free_matches_interval_form(self):
        res = schrodinger_dirichlet_spectrum(ex.const(0.0), (0.0, math.pi), 10.0)
        np.testing.assert_allclose(res.values, [1.0, 4.0, 9.0], rtol=1e-10)

    def test_constant_shift(self):
        c = 2.5
        res = schrodinger_dirichlet_spectrum(ex.const(c), (0.0, math.pi), 12.0)
        np.testing.assert_allclose(res.values, np.array([1.0, 4.0, 9.0]) + c,
                                   rtol=1e-12)

    def test_gaussian_well_vs_fd(self):
        x = ex.var()
        q = ex.exp(-2.0 * x * (1.0 - x))
        res = schrodinger_dirichlet_spectrum(q, (0.0, 1.0), 260.0,
                                             want_samples=False)
        oracle = fd_schrodinger_eigenvalues(q.compiled(), 0.0, 1.0, 5)
        np.testing.assert_allclose(res.values[:5], oracle, rtol=1e-6)


class TestSectorOperator:
    def test_zero_warp_conventions_agree(self):
        base = Interval(0.0, math.pi)
        for conv in ("drift", "paper_literal"):
            op = sector_operator(base, ex.const(0.0), 1, 4.0, conv)
            xs = np.linspace(0, math.pi, 7)
            np.testing.assert_allclose(op.potential.evaluate(xs), 4.0)

    def test_linear_warp_drift_potential(self):
        x = ex.var()
        op = sector_operator(Interval(0, 1), x, 1, 0.0, "drift")
        xs = np.linspace(0, 1, 7)
        np.testing.assert_allclose(op.potential.evaluate(xs), 0.25, rtol=1e-15)

    def test_linear_warp_literal_potential(self):
        x = ex.var()
        op = sector_operator(Interval(0, 1), x, 1, 0.0, "paper_literal")
        xs = np.linspace(0, 1, 7)
        np.testing.assert_allclose(op.potential.evaluate(xs), 0.0, atol=0)

    def test_mu_scaling_term(self):
        x = ex.var()
        f = 0.5 * x
        op = sector_operator(Interval(0, 1), f, 2, 3.0, "paper_literal")
        xs = np.linspace(0, 1, 5)
        np.testing.assert_allclose(op.potential.evaluate(xs),
                                   3.0 * np.exp(-xs * 0.5), rtol=1e-14)

    def test_sector_monotone_in_mu(self):
        # min-max: the potential grows pointwise with mu
        x = ex.var()
        f = 0.3 * x * (math.pi - x)
        base = Interval(0.0, math.pi)
        prev = None
        for mu in (0.0, 1.0, 4.0, 9.0):
            op = sector_operator(base, f, 1, mu, "drift")
            res = sector_spectrum(op, 60.0, want_samples=False)
            if prev is not None:
                n = min(len(prev), len(res))
                assert np.all(res.values[:n] >= prev.values[:n] - 1e-10)
            prev = res

    def test_drift_constant_warp_shift(self):
        # constant warp: sector spectrum is the base spectrum plus the
        # scaled fiber eigenvalue, under both conventions
        c, mu, m = 0.4, 9.0, 2
        base = Interval(0.0, math.pi)
        shift = mu * math.exp(-2 * c / m)
        for conv in ("drift", "paper_literal"):
            op = sector_operator(base, ex.const(c), m, mu, conv)
            res = sector_spectrum(op, 16.0 + shift, want_samples=False)
            expected = np.array([1.0, 4.0, 9.0, 16.0]) + shift
            np.testing.assert_allclose(res.values, expected, rtol=1e-12)

    def test_drift_gauge_normalization(self):
        # geometric eigenfunctions are normalized against exp(f) dx
        from heatlab.shooting import simpson_uniform

        x = ex.var()
        f = 0.3 * x * (math.pi - x)
        op = sector_operator(Interval(0.0, math.pi), f, 1, 0.0, "drift")
        res = sector_spectrum(op, 20.0)
        for u in res.samples:
            norm = simpson_uniform(u * u * res.weight, res.grid)
            assert norm == pytest.approx(1.0, abs=1e-8)


class TestWarpedSpectrum:
    def test_flat_warp_matches_product_closed_form(self):
        w = WarpedProduct(Interval(0.0, math.pi), ex.const(0.0), Circle(1.0))
        res = warped_product_spectrum(w, 5.0)
        # sums n^2 + k^2 <= 5: 1+0; 1+1 twice; 4+0; 1+4 twice and 4+1 twice
        expected = sorted(n * n + k * k for n in (1, 2, 3) for k in range(-3, 4)
                          if n * n + k * k <= 5)
        np.testing.assert_allclose(res.values, expected, rtol=1e-10)

    def test_fiber_replacement_invariance(self):
        x = ex.var()
        f = 0.2 * ex.sin(x)
        base = Interval(0.0, math.pi)
        w1 = WarpedProduct(base, f, Circle(1.0))
        res1 = warped_product_spectrum(w1, 30.0)
        clone = AbstractFiber(1, 2 * math.pi,
                              circle_spectrum(1.0, 400.0).values.tolist(),
                              cutoff=400.0)
        res2 = warped_product_spectrum(WarpedProduct(base, f, clone), 30.0)
        assert multiset_mismatch(res1.values, res2.values) is None

    def test_short_fiber_spectrum_rejected(self):
        x = ex.var()
        f = 0.3 * x * (math.pi - x)
        fib = AbstractFiber(1, 2 * math.pi, [0.0, 1.0, 1.0], cutoff=1.0)
        w = WarpedProduct(Interval(0.0, math.pi), f, fib)
        with pytest.raises(errors.FiberSpectrumTooShort):
            warped_product_spectrum(w, 30.0)

    def test_drift_union_matches_fd2d(self):
        x = ex.var()
        f = 0.3 * x * (math.pi - x)
        w = WarpedProduct(Interval(0.0, math.pi), f, Circle(1.0))
        res = warped_product_spectrum(w, 10.0, "drift")
        oracle = fd2d_warped_spectrum(Interval(0.0, math.pi), f, 1.0, (64, 64), 6)
        rel = np.abs(res.values[:6] - oracle.richardson) / oracle.richardson
        assert np.all(rel <= 3 * oracle.error_estimate / oracle.richardson + 1e-9)

    def test_sorted_and_certified(self):
        x = ex.var()
        w = WarpedProduct(Interval(0.0, math.pi), 0.1 * x, Circle(1.0))
        res = warped_product_spectrum(w, 20.0)
        assert np.all(np.diff(res.values) >= 0)
        assert np.all(res.values >= 0)
        assert res.certificate["method"] == "warped_sector_union"
        assert "skipped_sector_lower_bound" in res.certificate


class TestProductSpectrum:
    def test_cylinder_low_cutoff(self):
        res = product_spectrum([Interval(0.0, math.pi), Circle(1.0)], 3.0)
        np.testing.assert_allclose(res.values, [1.0, 2.0, 2.0], rtol=1e-14)

    def test_point_fiber_identity(self):
        point = AbstractFiber(1, 1.0, [0.0], cutoff=1e6)
        res = product_spectrum([Interval(0.0, math.pi), point], 30.0)
        expected = interval_spectrum(math.pi, 5).values
        np.testing.assert_allclose(res.values, expected, rtol=1e-14)

    def test_radius_two_cylinder(self):
        res = product_spectrum([Interval(0.0, math.pi), Circle(2.0)], 1.3)
        np.testing.assert_allclose(res.values, [1.0, 1.25, 1.25], rtol=1e-14)

    def test_three_factor_product(self):
        res = product_spectrum([Interval(0.0, math.pi), Circle(1.0), Circle(1.0)],
                               3.0)
        expected = sorted(n * n + j * j + k * k
                          for n in (1,) for j in range(-1, 2) for k in range(-1, 2)
                          if n * n + j * j + k * k <= 3)
        np.testing.assert_allclose(res.values, expected, rtol=1e-14)

    def test_insufficient_factor_cutoff(self):
        r1 = interval_spectrum(math.pi, 2)
        r2 = circle_spectrum(1.0, 1.0)
        with pytest.raises(errors.FactorCutoffInsufficient):
            combine_product(r1, r2, 100.0)

    def test_mass_factorizes(self):
        res = product_spectrum([Interval(0.0, math.pi), Circle(1.0)], 3.0)
        sigma_1 = 2 * math.sqrt(2 / math.pi)
        np.testing.assert_allclose(res.mass,
                                   [sigma_1 * math.sqrt(2 * math.pi), 0.0, 0.0],
                                   rtol=1e-14)


class TestFd2d:
    def test_flat_product_closed_form(self):
        res = fd2d_warped_spectrum(Interval(0.0, math.pi), ex.const(0.0), 1.0,
                                   (64, 64), 4)
        np.testing.assert_allclose(res.richardson, [1.0, 2.0, 2.0, 4.0],
                                   atol=1e-2)

    def test_flat_radius_two(self):
        res = fd2d_warped_spectrum(Interval(0.0, math.pi), ex.const(0.0), 2.0,
                                   (64, 64), 3)
        np.testing.assert_allclose(res.richardson, [1.0, 1.25, 1.25], atol=1e-2)

    def test_constant_warp_rescales_fiber(self):
        c = 0.4
        res_warp = fd2d_warped_spectrum(Interval(0.0, math.pi), ex.const(c), 1.0,
                                        (48, 48), 4)
        res_flat = fd2d_warped_spectrum(Interval(0.0, math.pi), ex.const(0.0),
                                        math.exp(c), (48, 48), 4)
        np.testing.assert_allclose(res_warp.fine, res_flat.fine, rtol=1e-12)

    def test_grid_minimum(self):
        with pytest.raises(errors.SpecValidationError):
            fd2d_warped_spectrum(Interval(0.0, 1.0), ex.const(0.0), 1.0,
                                 (8, 64), 2)


class TestResolutionInvariants:
    @pytest.mark.parametrize("spec,cutoff", [
        (Interval(0.0, math.pi), 30.0),
        (Circle(1.5), 20.0),
        (FlatTorus([[4.0, 1.0], [1.0, 9.0]]), 25.0),
        (Product((Interval(0.0, 2.0), Circle(1.0))), 15.0),
    ])
    def test_sorted_nonnegative(self, spec, cutoff):
        res = spectral_resolution(spec, cutoff)
        assert np.all(np.diff(res.values) >= 0)
        assert np.all(res.values >= 0)
        assert res.cutoff == cutoff

    def test_counting_function(self):
        res = spectral_resolution(Circle(1.0), 10.0)
        assert res.counting(0.5) == 1
        assert res.counting(1.0) == 3
        assert res.counting(9.5) == 7


class TestDumps:
    def test_csv_schema(self):
        res = interval_spectrum(math.pi, 3)
        text = spectrum_csv(res)
        lines = text.strip().split("\n")
        assert lines[0] == "index,eigenvalue,multiplicity,sector_mu,convention"
        assert lines[1] == "1,1,1,,"
        assert lines[3] == "3,9,1,,"

    def test_csv_groups_multiplicities(self):
        res = circle_spectrum(1.0, 5.0)
        lines = spectrum_csv(res).strip().split("\n")
        assert lines[1].startswith("1,0,1")
        assert lines[2].startswith("2,1,2")
        assert lines[3].startswith("3,4,2")

    def test_json_certificate_fields(self):
        import json

        res = circle_spectrum(1.0, 5.0)
        doc = json.loads(spectrum_json(res))
        assert doc["cutoff"] == 5.0
        assert doc["certificate"]["method"] == "closed_form_circle"
        assert doc["eigenvalues"][1]["multiplicity"] == 2


class TestFd2dConvergenceOrder:
    def test_second_order_in_grid(self):
        # flat product has the closed form n^2 + k^2; halving h divides the
        # error by about four
        exact = np.array([1.0, 2.0, 2.0, 4.0])
        res = fd2d_warped_spectrum(Interval(0.0, math.pi), ex.const(0.0), 1.0,
                                   (32, 32), 4)
        err_coarse = np.abs(res.coarse - exact)
        err_fine = np.abs(res.fine - exact)
        ratios = err_coarse / err_fine
        assert np.all(ratios > 3.3) and np.all(ratios < 4.7)
        assert np.max(np.abs(res.richardson - exact)) < np.max(err_fine) / 5


class TestTorusFiberWarped:
    def test_flat_warp_over_torus_fiber_matches_product(self):
        # zero warp over a 2-D torus fiber must reproduce the product sums
        G = [[(2 * math.pi) ** 2, 0.0], [0.0, (2 * math.pi) ** 2]]
        w = WarpedProduct(Interval(0.0, math.pi), ex.const(0.0), FlatTorus(G))
        res = warped_product_spectrum(w, 6.0)
        expected = sorted(n * n + j * j + k * k
                          for n in range(1, 4) for j in range(-3, 4)
                          for k in range(-3, 4) if n * n + j * j + k * k <= 6)
        np.testing.assert_allclose(res.values, expected, rtol=1e-10)

    def test_nonconstant_warp_sector_mu_labels(self):
        x = ex.var()
        f = 0.2 * ex.sin(x)
        G = [[(2 * math.pi) ** 2, 0.0], [0.0, (2 * math.pi) ** 2]]
        w = WarpedProduct(Interval(0.0, math.pi), f, FlatTorus(G))
        res = warped_product_spectrum(w, 8.0)
        assert res.sector_mu is not None
        # the scaling exponent uses the fiber dimension: exp(-2f/2) = exp(-f)
        assert set(np.round(np.unique(res.sector_mu), 10)) <= {0.0, 1.0, 2.0, 4.0, 5.0, 8.0}
