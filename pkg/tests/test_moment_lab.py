"""Moment-side machinery: smoothed moment, main terms, fits, error-term
statistics, sandwich check, residual bound.
"""

import math

import numpy as np
import pytest

from offcrit.core_numerics import DomainError
from offcrit.lambda_kernel import GaussianWeight
from offcrit.moment_lab import (
    MomentParameters,
    MomentSample,
    SecondaryCoefficients,
    _lead_terms,
    error_moment_integral,
    error_term_E2,
    fit_secondary_coefficients,
    growth_exponent,
    main_term,
    main_term_threequarters,
    residual_term_bound,
    sign_change_scan,
    smoothing_sandwich_check,
    weighted_moment_I2,
)
from offcrit.zeta_engine import DEFAULT_ZETA_CONFIG, abs_zeta_pow4_batch, zeta

SIGMA = 0.6
FLAT = SecondaryCoefficients(
    a0=0.0, a1=0.0, a2=0.0, fit_window=(0.0, 0.0), fit_residual=0.0
)


class TestMomentParameters:
    def test_window(self):
        MomentParameters(sigma=0.6, T=1000.0, G=100.0)
        with pytest.raises(DomainError):
            MomentParameters(sigma=0.6, T=1000.0, G=5.0)
        with pytest.raises(DomainError):
            MomentParameters(sigma=0.6, T=1000.0, G=999.0)
        with pytest.raises(DomainError):
            MomentParameters(sigma=0.4, T=1000.0, G=100.0)


class TestWeightedMomentI2:
    def test_positive(self):
        p = MomentParameters(sigma=0.7, T=300.0, G=40.0)
        assert weighted_moment_I2(p, 1e-6) > 0.0

    def test_fine_grid_oracle(self):
        p = MomentParameters(sigma=0.6, T=800.0, G=80.0)
        value = weighted_moment_I2(p, 1e-8)
        ts = np.linspace(p.T - 8 * p.G, p.T + 8 * p.G, 800_001)
        vals = abs_zeta_pow4_batch(p.sigma, np.abs(ts))
        oracle = np.trapezoid(vals * np.exp(-(((ts - p.T) / p.G) ** 2)), ts) / (
            math.sqrt(math.pi) * p.G
        )
        assert abs(value - oracle) < 1e-6 * oracle

    def test_smoothing_consistency_with_sharp_differences(self):
        # Gaussian-weighted average of the sharp moment's increments
        from offcrit.zeta_engine import sharp_fourth_moment_prefix

        p = MomentParameters(sigma=0.6, T=500.0, G=60.0)
        value = weighted_moment_I2(p, 1e-8)
        grid = np.arange(p.T - 7 * p.G, p.T + 7 * p.G + 0.5, 1.0)
        prefix = sharp_fourth_moment_prefix(p.sigma, grid, 1e-8)
        mids = 0.5 * (grid[:-1] + grid[1:])
        density = np.diff(prefix)
        approx = float(
            np.sum(density * np.exp(-(((mids - p.T) / p.G) ** 2)))
            / (math.sqrt(math.pi) * p.G)
        )
        assert abs(value - approx) < 2e-3 * value


class TestMainTerm:
    def test_three_quarters_guard(self):
        with pytest.raises(DomainError):
            main_term(100.0, 0.7501, FLAT)

    def test_direct_substitution_at_T1(self):
        sigma = 0.62
        z = lambda x: zeta(complex(x, 0.0)).real
        manual = z(2 * sigma) ** 4 / z(4 * sigma) + (2 * math.pi) ** (
            4 * sigma - 2.0
        ) * z(2 - 2 * sigma) ** 4 / ((3 - 4 * sigma) * z(4 - 4 * sigma))
        assert abs(main_term(1.0, sigma, FLAT) - manual) < 1e-10 * abs(manual)

    def test_continuity_in_sigma(self):
        # the log-derivative in sigma is ~ 8/(2 sigma - 1) from the
        # zeta^4(2-2 sigma) factor: steep but finite away from 3/4
        for sigma in (0.55, 0.6, 0.7):
            base = main_term(1000.0, sigma, FLAT)
            shifted = main_term(1000.0, sigma + 1e-4, FLAT)
            assert abs(shifted - base) <= (10.0 / (2 * sigma - 1)) * 1e-4 * abs(base)

    def test_threequarters_slope(self):
        z32 = zeta(complex(1.5, 0.0)).real
        z3 = zeta(complex(3.0, 0.0)).real
        T = 700.0
        assert abs(main_term_threequarters(T, (0, 0, 0)) - z32**4 / z3 * T) < 1e-10 * T

    def test_threequarters_zero(self):
        assert main_term_threequarters(0.0, (1.0, 2.0, 3.0)) == 0.0


class TestFit:
    def _synthetic(self, coeffs, noise=None, n=25, t_lo=200.0, t_hi=1000.0):
        ts = np.linspace(t_lo, t_hi, n)
        logs = np.log(ts)
        poly = coeffs[0] + coeffs[1] * logs + coeffs[2] * logs**2
        vals = np.asarray(
            [_lead_terms(t, SIGMA, DEFAULT_ZETA_CONFIG) for t in ts]
        ) + ts ** (2 - 2 * SIGMA) * poly
        if noise is not None:
            vals = vals + noise
        return list(zip(ts, vals))

    def test_exact_recovery(self):
        fit = fit_secondary_coefficients(self._synthetic((1.0, -2.0, 0.5)), SIGMA)
        assert abs(fit.a0 - 1.0) < 1e-9
        assert abs(fit.a1 + 2.0) < 1e-9
        assert abs(fit.a2 - 0.5) < 1e-9
        assert fit.fit_residual < 1e-8

    def test_contaminated_recovery(self):
        rng = np.random.default_rng(77)
        ts = np.linspace(200.0, 1000.0, 40)
        noise = ts**0.3 * np.sin(13.78 * np.log(ts) + rng.uniform(0, 2 * np.pi))
        samples = self._synthetic((1.0, -2.0, 0.5), noise=noise, n=40)
        fit = fit_secondary_coefficients(samples, SIGMA)
        for got, want, se in zip((fit.a0, fit.a1, fit.a2), (1.0, -2.0, 0.5), fit.std_errors):
            assert abs(got - want) < 3.0 * se + 1e-9

    def test_preconditions(self):
        with pytest.raises(DomainError):
            fit_secondary_coefficients(self._synthetic((1, 1, 1), n=8), SIGMA)
        with pytest.raises(DomainError):
            fit_secondary_coefficients(
                self._synthetic((1, 1, 1), t_lo=500.0, t_hi=900.0), SIGMA
            )

    def test_refit_stability_on_synthetic(self):
        # same underlying coefficients on two overlapping windows: each
        # fitted a_j moves by less than 3 standard errors
        rng = np.random.default_rng(78)

        def window(t_lo, t_hi):
            ts = np.linspace(t_lo, t_hi, 36)
            logs = np.log(ts)
            vals = (
                np.asarray([_lead_terms(t, SIGMA, DEFAULT_ZETA_CONFIG) for t in ts])
                + ts ** (2 - 2 * SIGMA) * (1.0 - 2.0 * logs + 0.5 * logs**2)
                + 3.0 * rng.standard_normal(ts.size)
            )
            return fit_secondary_coefficients(list(zip(ts, vals)), SIGMA)

        f1 = window(300.0, 900.0)
        f2 = window(400.0, 1200.0)
        for a, b, s1, s2 in zip(f1.as_tuple(), f2.as_tuple(), f1.std_errors, f2.std_errors):
            assert abs(a - b) < 3.0 * (s1 + s2)


class TestErrorTerm:
    def test_identity(self):
        sample = error_term_E2(150.0, SIGMA, FLAT, tol=1e-7)
        assert sample.E2 == sample.sharp_moment - sample.main_term

    def test_identity_enforced(self):
        with pytest.raises(ValueError):
            MomentSample(T=1.0, sigma=0.6, sharp_moment=2.0, main_term=1.0, E2=0.5)


class TestGrowthExponent:
    def test_exact_power_law(self):
        samples = [(t, t**0.3) for t in np.linspace(100.0, 1600.0, 40)]
        slope, half = growth_exponent(samples)
        assert abs(slope - 0.3) < 1e-9

    def test_modulated_power_law(self):
        ts = np.linspace(100.0, 1600.0, 400)
        samples = [(t, t**0.3 * abs(math.sin(math.log(t)))) for t in ts]
        slope, _ = growth_exponent(samples)
        # running max of a modulated power law on four octaves reads slightly
        # below the underlying exponent (plateaus between envelope touches)
        assert 0.2 <= slope <= 0.4

    def test_degenerate(self):
        with pytest.raises(DomainError):
            growth_exponent([(t, 0.0) for t in np.linspace(100, 1600, 20)])


class TestSignChangeScan:
    def test_constant_sign(self):
        rep = sign_change_scan([(t, 1.0) for t in np.arange(10.0, 50.0)])
        assert rep.intervals == []

    def test_sin_log(self):
        ts = np.arange(100.0, 4000.0, 1.0)
        rep = sign_change_scan([(t, math.sin(math.log(t))) for t in ts])
        # sin(log t) vanishes once in the range, at t = e^(2 pi)
        assert len(rep.intervals) == 1
        assert rep.intervals[0][0] <= math.exp(2 * math.pi) <= rep.intervals[0][1]

    def test_spacing_guard(self):
        with pytest.raises(DomainError):
            sign_change_scan([(0.0, 1.0), (5.0, -1.0)])


class TestErrorMomentIntegral:
    def test_constant(self):
        samples = [(t, 1.0) for t in np.arange(0.0, 101.0)]
        assert abs(error_moment_integral(samples, 2.0) - 100.0) < 1e-12

    def test_monotone_in_range_end(self):
        ts = np.arange(0.0, 101.0)
        vals = np.sin(ts * 0.7)
        full = error_moment_integral(list(zip(ts, vals)), 2.4)
        part = error_moment_integral(list(zip(ts[:60], vals[:60])), 2.4)
        assert full >= part

    def test_exponent_guard(self):
        with pytest.raises(DomainError):
            error_moment_integral([(0.0, 1.0), (1.0, 1.0)], 0.5)


class TestSandwich:
    def test_single_point(self):
        p = MomentParameters(sigma=0.6, T=600.0, G=35.0)
        rep = smoothing_sandwich_check(600.0, p, tol=1e-7)
        scale = max(rep.sharp, 1.0)
        assert rep.slack_outer >= -1e-6 * scale
        assert rep.slack_inner >= -1e-6 * scale
        assert not rep.inner_window_empty
        assert 1.0 - 1e-8 <= rep.inner_mass_min <= 1.0 + 1e-12

    def test_small_G_tightens(self):
        p1 = MomentParameters(sigma=0.6, T=400.0, G=50.0)
        p2 = MomentParameters(sigma=0.6, T=400.0, G=25.0)
        r1 = smoothing_sandwich_check(400.0, p1, tol=1e-7)
        r2 = smoothing_sandwich_check(400.0, p2, tol=1e-7)
        assert r2.slack_outer < r1.slack_outer

    def test_inverted_inner_window(self):
        p = MomentParameters(sigma=0.6, T=300.0, G=100.0)
        rep = smoothing_sandwich_check(300.0, p, tol=1e-7)
        assert rep.inner_window_empty
        assert rep.slack_inner == rep.sharp


class TestResidualTermBound:
    def test_example_scale(self):
        b = residual_term_bound(GaussianWeight(1000.0, 100.0), 0.6)
        assert 0.0 < b < 1e-40  # e^{-100} scale times moderate factors

    def test_monotone_decay(self):
        values = [
            residual_term_bound(GaussianWeight(T, 100.0), 0.6)
            for T in (500.0, 1000.0, 2000.0)
        ]
        assert values[0] > values[1] > values[2]

    def test_log_derivative_finite(self):
        for sigma in (0.55, 0.6, 0.7, 0.9):
            assert math.isfinite(residual_term_bound(GaussianWeight(800.0, 60.0), sigma))
