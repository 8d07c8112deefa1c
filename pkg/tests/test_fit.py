import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from potselect.errors import ConvergenceError, DomainError, EmptyExcessError, InsufficientDataError
from potselect.fit import ExcessSet, GpdFit, excesses_over, fit_gpd, gpd_loglik, moment_start, sigma_star
from potselect.gpd import GpdParams, gpd_sample


def excess_set(y, u=0.0):
    y = np.asarray(y, dtype=float)
    return ExcessSet(threshold=u, excesses=y, total_count=y.size)


@pytest.fixture(scope="module")
def gpd_excesses():
    return excess_set(gpd_sample(GpdParams(0.2, 1.0), 5000, seed=7).values)


@pytest.fixture(scope="module")
def gpd_fit(gpd_excesses):
    return fit_gpd(gpd_excesses)


def profile_mle(y):
    """Direct maximisation in (xi, sigma): inner 1-D search over sigma for each xi."""

    def best_sigma(xi):
        lower = max(1e-9, -xi * y.max() * (1 + 1e-12)) if xi < 0 else 1e-9
        res = minimize_scalar(
            lambda s: -gpd_loglik(GpdParams(xi, s), y) if s > lower else np.inf,
            bounds=(lower, 50 * y.mean()),
            method="bounded",
            options={"xatol": 1e-12},
        )
        return res.x, -res.fun

    res = minimize_scalar(lambda xi: -best_sigma(xi)[1], bounds=(-0.9, 2.0), method="bounded", options={"xatol": 1e-10})
    return res.x, best_sigma(res.x)[0]


class TestExcesses:
    def test_subtraction(self):
        e = excesses_over(np.array([1, 2, 3, 4, 5.0]), 2.5)
        np.testing.assert_allclose(e.excesses, [0.5, 1.5, 2.5])
        assert e.zeta_u == pytest.approx(3 / 5)
        assert e.exceed_count == 3
        assert e.total_count == 5

    def test_all_exceed(self):
        x = np.array([3.0, 1.0, 2.0])
        e = excesses_over(x, x.min() - 1)
        np.testing.assert_allclose(e.excesses, x - (x.min() - 1))
        assert e.zeta_u == 1.0

    def test_max_threshold_is_empty(self):
        x = np.array([1.0, 2.0, 3.0])
        with pytest.raises(EmptyExcessError):
            excesses_over(x, 3.0)

    def test_empty_is_insufficient(self):
        assert issubclass(EmptyExcessError, InsufficientDataError)

    def test_order_preserved(self):
        e = excesses_over(np.array([5.0, 1.0, 4.0, 0.0, 3.0]), 2.0)
        np.testing.assert_allclose(e.excesses, [3.0, 2.0, 1.0])

    def test_invalid_excesses(self):
        with pytest.raises(DomainError):
            ExcessSet(0.0, np.array([1.0, -1.0]), 2)
        with pytest.raises(DomainError):
            ExcessSet(0.0, np.array([1.0, 2.0]), 1)


class TestLogLikelihood:
    def test_exponential(self):
        assert gpd_loglik(GpdParams(0.0, 1.0), excess_set([1, 2, 3])) == pytest.approx(-6.0)

    def test_infeasible(self):
        assert gpd_loglik(GpdParams(-1.0, 1.0), excess_set([2.0])) == -math.inf

    def test_empty(self):
        with pytest.raises(DomainError):
            gpd_loglik(GpdParams(0.1, 1.0), np.array([]))

    def test_term_by_term(self):
        y = gpd_sample(GpdParams(0.3, 2.0), 200, seed=19).values
        xi, s = 0.3, 2.0
        oracle = 0.0
        for yi in y.tolist():
            oracle += -math.log(s) - (1 / xi + 1) * math.log(1 + xi * yi / s)
        assert gpd_loglik(GpdParams(xi, s), y) == pytest.approx(oracle, rel=1e-12, abs=1e-12)


class TestFit:
    def test_recovers_heavy_tail(self, gpd_fit):
        assert 0.1 <= gpd_fit.xi <= 0.3
        assert 0.9 <= gpd_fit.sigma <= 1.1

    def test_recovers_exponential(self):
        rng = np.random.default_rng(31)
        f = fit_gpd(excess_set(rng.exponential(2.0, 5000)))
        assert -0.08 <= f.xi <= 0.08
        assert 1.85 <= f.sigma <= 2.15

    def test_gaussian_tail_matches_reported_range(self):
        # reported N(0,1) fits: xi -0.09..-0.18, sigma 0.53..0.60
        fits = [fit_gpd(excesses_over(np.random.default_rng(s).normal(0, 1, 10000), 1.1)) for s in range(10)]
        assert -0.18 <= np.median([f.xi for f in fits]) <= -0.09
        assert 0.53 <= np.median([f.sigma for f in fits]) <= 0.60

    def test_local_maximum(self, gpd_fit, gpd_excesses):
        ll = gpd_loglik(gpd_fit.params, gpd_excesses)
        for dxi, ds in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)]:
            p = GpdParams(gpd_fit.xi * (1 + 1e-4 * dxi), gpd_fit.sigma * (1 + 1e-4 * ds))
            assert gpd_loglik(p, gpd_excesses) <= ll + 1e-8

    def test_random_neighbours_do_not_beat_optimum(self, gpd_fit, gpd_excesses):
        rng = np.random.default_rng(0)
        ll = gpd_fit.log_likelihood
        for _ in range(100):
            p = GpdParams(gpd_fit.xi + rng.normal(0, 0.02), gpd_fit.sigma * math.exp(rng.normal(0, 0.02)))
            assert gpd_loglik(p, gpd_excesses) <= ll + 1e-8

    @pytest.mark.parametrize("xi,sigma,seed", [(0.2, 1.0, 1), (-0.2, 1.0, 2), (0.0, 3.0, 3), (0.5, 2.0, 4)])
    def test_agrees_with_profile_likelihood(self, xi, sigma, seed):
        y = gpd_sample(GpdParams(xi, sigma), 2000, seed=seed).values
        f = fit_gpd(excess_set(y))
        xi_d, sigma_d = profile_mle(y)
        assert f.xi == pytest.approx(xi_d, abs=1e-4)
        assert f.sigma == pytest.approx(sigma_d, abs=1e-4 * max(1.0, sigma_d))

    def test_permutation_invariant(self, gpd_excesses, gpd_fit):
        y = np.random.default_rng(1).permutation(gpd_excesses.excesses)
        f = fit_gpd(excess_set(y))
        assert f.xi == gpd_fit.xi
        assert f.sigma == gpd_fit.sigma

    @pytest.mark.parametrize("c", [0.01, 7.5, 300.0])
    def test_scale_equivariant(self, gpd_excesses, gpd_fit, c):
        f = fit_gpd(excess_set(c * gpd_excesses.excesses))
        assert f.xi == pytest.approx(gpd_fit.xi, abs=1e-4)
        assert f.sigma / c == pytest.approx(gpd_fit.sigma, rel=1e-4)

    def test_too_few(self):
        with pytest.raises(InsufficientDataError) as info:
            fit_gpd(excess_set(np.arange(1, 10, dtype=float)))
        assert info.value.count == 9

    def test_standard_errors_match_expected_information(self, gpd_fit):
        n, xi, s = gpd_fit.exceed_count, gpd_fit.xi, gpd_fit.sigma
        assert gpd_fit.se_xi == pytest.approx((1 + xi) / math.sqrt(n), rel=0.1)
        assert gpd_fit.se_sigma == pytest.approx(s * math.sqrt(2 * (1 + xi) / n), rel=0.1)

    def test_covariance_psd(self, gpd_fit):
        assert np.all(np.linalg.eigvalsh(gpd_fit.covariance) >= 0)
        assert math.isfinite(gpd_fit.log_likelihood)

    def test_support_constraint(self):
        y = gpd_sample(GpdParams(-0.4, 1.0), 1000, seed=12).values
        f = fit_gpd(excess_set(y))
        assert np.all(1 + f.xi * y / f.sigma > 0)

    def test_convergence_error_carries_best(self, monkeypatch):
        import potselect.fit as fitmod

        monkeypatch.setattr(fitmod, "MAX_ITER", 3)
        y = gpd_sample(GpdParams(0.2, 1.0), 200, seed=1).values
        with pytest.raises(ConvergenceError) as info:
            fitmod.fit_gpd(excess_set(y))
        assert isinstance(info.value.best, GpdParams)

    def test_moment_start_degenerate(self):
        assert moment_start(np.array([2.0, 2.0, 2.0])) == (0.0, 2.0)


class TestSigmaStar:
    def make(self, u, xi=0.1, sigma=1.5, se_xi=0.05, se_sigma=0.08, cov=-0.002):
        return GpdFit(GpdParams(xi, sigma), u, 100, 0.1, -10.0, se_xi, se_sigma, cov)

    def test_zero_threshold(self):
        f = self.make(0.0)
        assert sigma_star(f) == (f.sigma, pytest.approx(f.se_sigma))

    def test_zero_shape(self):
        f = self.make(3.0, xi=0.0)
        assert sigma_star(f)[0] == f.sigma

    def test_delta_expansion(self, gpd_fit):
        f = GpdFit(gpd_fit.params, 2.0, gpd_fit.exceed_count, 1.0, gpd_fit.log_likelihood,
                   gpd_fit.se_xi, gpd_fit.se_sigma, gpd_fit.cov_xi_sigma)
        value, se = sigma_star(f)
        grad = np.array([-2.0, 1.0])
        expected = math.sqrt(grad @ f.covariance @ grad)
        assert value == pytest.approx(f.sigma - 2.0 * f.xi, abs=1e-12)
        assert se == pytest.approx(expected, rel=1e-12)
