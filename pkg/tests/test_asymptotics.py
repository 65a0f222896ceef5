import math

import numpy as np
import pytest

from volterra_lab import (
    estimate_schatten_order,
    fit_power_law,
    fit_slowly_varying_log,
    limit_diagnostics,
    log_power,
)
from volterra_lab.errors import InsufficientData, InvalidParameter, ZeroInWindow


def power_seq(n_top, a=1.0, alpha=1.0):
    n = np.arange(1, n_top + 1, dtype=float)
    return a * n ** (-alpha)


def log_seq(n_top, a=1.0, beta=-1.0):
    n = np.arange(1, n_top + 1, dtype=float)
    out = np.empty(n_top)
    out[0] = a  # rank 1 is never inside a valid window
    out[1:] = a * np.log(n[1:]) ** beta
    return out


class TestFitPowerLaw:
    def test_exact_law_recovered(self):
        fit = fit_power_law(power_seq(2000, a=2.0, alpha=1.5), (100, 2000))
        assert 1.499 <= fit.alpha <= 1.501
        assert 1.99 <= fit.a <= 2.01
        assert fit.residual < 1e-12

    def test_mild_correction(self):
        n = np.arange(1, 2001, dtype=float)
        fit = fit_power_law(n ** -1.0 * (1 + 0.1 / n), (200, 2000))
        assert abs(fit.alpha - 1.0) < 0.01

    def test_constant_sequence(self):
        fit = fit_power_law(np.ones(100), (10, 100))
        assert abs(fit.alpha) < 1e-6
        assert fit.a == pytest.approx(1.0, abs=1e-9)

    def test_zero_in_window(self):
        s = power_seq(100)
        s[49] = 0.0
        with pytest.raises(ZeroInWindow):
            fit_power_law(s, (10, 100))

    def test_window_too_small(self):
        with pytest.raises(InsufficientData):
            fit_power_law(power_seq(100), (10, 16))

    def test_window_out_of_range(self):
        with pytest.raises(InvalidParameter):
            fit_power_law(power_seq(100), (10, 101))

    def test_scale_equivariance(self):
        s = power_seq(500, a=1.0, alpha=0.7)
        base = fit_power_law(s, (20, 500))
        scaled = fit_power_law(3.5 * s, (20, 500))
        assert abs(scaled.a - 3.5 * base.a) < 1e-6 * 3.5 * base.a
        assert abs(scaled.alpha - base.alpha) < 1e-9


class TestFitSlowlyVaryingLog:
    def test_exact_log_law(self):
        fit = fit_slowly_varying_log(log_seq(5000, a=3.0, beta=-2.0), (50, 5000))
        assert -2.05 <= fit.beta <= -1.95
        assert 2.9 <= fit.a <= 3.1

    def test_increasing_log_sequence(self):
        # raw array input: an increasing sequence is not an s-number sequence
        fit = fit_slowly_varying_log(log_seq(3000, a=1.0, beta=1.0), (10, 3000))
        assert abs(fit.beta - 1.0) < 0.05

    def test_model_selection_against_power_law(self):
        s = power_seq(2000, alpha=1.0)
        window = (100, 2000)
        assert fit_slowly_varying_log(s, window).residual > fit_power_law(s, window).residual

    def test_requires_n_min_3(self):
        with pytest.raises(InvalidParameter):
            fit_slowly_varying_log(log_seq(100), (2, 100))


class TestSchattenOrder:
    def test_alpha_two(self):
        rho = estimate_schatten_order(power_seq(2000, alpha=2.0), (50, 2000))
        assert abs(rho - 0.5) < 0.02

    def test_alpha_one(self):
        rho = estimate_schatten_order(power_seq(2000, alpha=1.0), (50, 2000))
        assert abs(rho - 1.0) < 0.02

    def test_log_decay_is_infinite_order(self):
        assert estimate_schatten_order(log_seq(5000, beta=-1.0), (100, 5000)) == math.inf

    def test_log_square_decay_is_infinite_order(self):
        assert estimate_schatten_order(log_seq(5000, a=3.0, beta=-2.0), (100, 5000)) == math.inf

    def test_slow_power_law_stays_finite(self):
        rho = estimate_schatten_order(power_seq(5000, alpha=0.25), (100, 5000))
        assert abs(rho - 4.0) < 0.1


class TestLimitDiagnostics:
    def test_divergent_n2_with_limit(self):
        d = limit_diagnostics(power_seq(4000, alpha=1.0), 1.0)
        assert d.verdict_n2_divergent
        assert d.verdict_nalpha_limit == pytest.approx(1.0, rel=1e-6)

    def test_convergent_n2(self):
        d = limit_diagnostics(power_seq(4000, alpha=2.0), 1.0)
        assert not d.verdict_n2_divergent

    def test_limit_value(self):
        d = limit_diagnostics(power_seq(4000, a=0.25, alpha=1.0), 1.0)
        assert d.verdict_nalpha_limit == pytest.approx(0.25, rel=0.05)

    def test_no_limit_when_alpha_wrong(self):
        d = limit_diagnostics(power_seq(4000, alpha=2.0), 1.0)
        assert d.verdict_nalpha_limit is None

    def test_geometric_sampling(self):
        d = limit_diagnostics(power_seq(1000), 1.0)
        ns = [n for n, _ in d.n2_trend]
        assert ns == sorted(set(ns))
        ratios = np.diff(np.log(ns))
        assert ratios.max() < 10 * max(ratios.min(), 1e-9)

    def test_alpha_domain(self):
        for alpha in (0.0, 2.0, -1.0):
            with pytest.raises(InvalidParameter):
                limit_diagnostics(power_seq(100), alpha)


class TestSlowlyVaryingProperties:
    def test_scaling_limit_deviation_shrinks(self):
        # |L(2x)/L(x) - 1| -> 0; at x = 1e13 it is below 0.05 for |beta| <= 2
        for beta in (-2.0, -1.0, 1.0, 2.0):
            devs = [abs(log_power(2 * x, beta) / log_power(x, beta) - 1.0)
                    for x in (1e3, 1e6, 1e9, 1e13)]
            assert devs[-1] < 0.05
            assert all(b < a for a, b in zip(devs, devs[1:]))

    def test_shift_property(self):
        for beta in (-2.0, -1.0, 1.0, 2.0):
            dev = abs(log_power(1e6 + 10.0, beta) / log_power(1e6, beta) - 1.0)
            assert dev < 1e-4

    def test_log_power_domain(self):
        with pytest.raises(InvalidParameter):
            log_power(1.0, 2.0)
