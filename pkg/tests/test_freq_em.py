"""EM for the count mixture: E-step posteriors, M-step identities, convergence."""

import numpy as np
import pytest
import scipy.stats

import claimstreams as cs
from claimstreams.freq_em import (
    _m_step_residuals,
    e_step_freq,
    m_step_freq,
    moment_init_freq,
    observed_loglik_freq,
    q_value_freq,
)

from conftest import DEMO_FREQ, random_freq_params


def scipy_mixture_logpmf(params, n):
    """Oracle: mixture log pmf straight from scipy's Negative Binomial."""
    q = params.beta / (1.0 + params.beta)
    lo = scipy.stats.nbinom.pmf(n, params.alpha1, q)
    hi = scipy.stats.nbinom.pmf(n, params.alpha1 + params.alpha2, q)
    return np.log(params.p * lo + (1.0 - params.p) * hi)


class TestEStep:
    def test_known_posterior_at_zero_count(self):
        # p NB(0;3) / [p NB(0;3) + (1-p) NB(0;4)] with beta = 1/2 gives
        # (0.6/27) / (0.6/27 + 0.4/81) = 9/11.
        sample = cs.CountSample(np.array([0, 5]))
        tau = e_step_freq(DEMO_FREQ, sample)
        assert tau[0] == pytest.approx(9.0 / 11.0, rel=1e-12)

    def test_matches_scipy_ratio(self):
        rng = np.random.default_rng(7)
        sample = cs.CountSample(rng.integers(0, 30, size=25))
        for seed in range(5):
            params = random_freq_params(np.random.default_rng(seed))
            q = params.beta / (1.0 + params.beta)
            lo = params.p * scipy.stats.nbinom.pmf(sample.counts, params.alpha1, q)
            hi = (1.0 - params.p) * scipy.stats.nbinom.pmf(
                sample.counts, params.alpha1 + params.alpha2, q
            )
            np.testing.assert_allclose(
                e_step_freq(params, sample), lo / (lo + hi), rtol=1e-10
            )

    def test_decreasing_in_count(self):
        # Larger counts favor the active-stream component.
        sample = cs.CountSample(np.arange(0, 40))
        tau = e_step_freq(DEMO_FREQ, sample)
        assert np.all(np.diff(tau) < 0.0)

    def test_degenerate_p_edges(self):
        sample = cs.CountSample(np.array([0, 3, 17]))
        np.testing.assert_array_equal(
            e_step_freq(cs.FreqParams(3.0, 1.0, 0.5, 1.0), sample), np.ones(3)
        )
        np.testing.assert_array_equal(
            e_step_freq(cs.FreqParams(3.0, 1.0, 0.5, 0.0), sample), np.zeros(3)
        )

    def test_huge_count_does_not_underflow(self):
        # The components share a rate, so the posterior decays like
        # n^(-alpha2): small at n = 5000 but nowhere near underflow.
        tau = e_step_freq(DEMO_FREQ, cs.CountSample(np.array([5000, 0])))
        assert np.isfinite(tau[0])
        assert 0.0 < tau[0] < 0.01


class TestQValue:
    def test_matches_complete_data_oracle(self):
        # Per-period form: tau (log p + log NB(n; a1)) +
        # (1-tau)(log(1-p) + log NB(n; a1+a2)), summed with scipy pmfs.
        rng = np.random.default_rng(3)
        sample = cs.CountSample(rng.integers(0, 25, size=12))
        tau = rng.uniform(0.05, 0.95, size=12)
        for seed in range(5):
            params = random_freq_params(np.random.default_rng(100 + seed))
            q = params.beta / (1.0 + params.beta)
            lo = scipy.stats.nbinom.logpmf(sample.counts, params.alpha1, q)
            hi = scipy.stats.nbinom.logpmf(
                sample.counts, params.alpha1 + params.alpha2, q
            )
            oracle = float(
                np.sum(
                    tau * (np.log(params.p) + lo)
                    + (1.0 - tau) * (np.log1p(-params.p) + hi)
                )
            )
            assert q_value_freq(params, sample, tau) == pytest.approx(oracle, rel=1e-12)

    def test_edge_weights_do_not_produce_nan(self):
        sample = cs.CountSample(np.array([1, 2]))
        tau = np.array([1.0, 1.0])
        value = q_value_freq(cs.FreqParams(3.0, 1.0, 0.5, 1.0), sample, tau)
        assert np.isfinite(value)

    def test_length_mismatch_raises(self):
        with pytest.raises(ValueError):
            q_value_freq(DEMO_FREQ, cs.CountSample(np.array([1, 2])), np.array([0.5]))


class TestMStep:
    @staticmethod
    def _fixture():
        sample = cs.CountSample(cs.sample_counts(DEMO_FREQ, 120, seed=9))
        params = cs.FreqParams(2.0, 2.0, 0.8, 0.5)
        tau = e_step_freq(params, sample)
        return sample, params, tau

    def test_p_update_is_mean_tau(self):
        sample, params, tau = self._fixture()
        new = m_step_freq(params, sample, tau)
        assert new.p == pytest.approx(float(tau.mean()), rel=1e-14)

    def test_rate_identity_holds_at_update(self):
        # Stationarity in beta rearranges to
        # alpha1 m + alpha2 sum(1-tau) = beta sum(n).
        sample, params, tau = self._fixture()
        new = m_step_freq(params, sample, tau)
        lhs = new.alpha1 * sample.m + new.alpha2 * float(np.sum(1.0 - tau))
        rhs = new.beta * float(sample.counts.sum())
        assert lhs == pytest.approx(rhs, rel=1e-7)

    def test_update_is_stationary_point(self):
        sample, params, tau = self._fixture()
        new = m_step_freq(params, sample, tau)
        res = _m_step_residuals(sample, tau)(
            np.log([new.alpha1, new.alpha2, new.beta])
        )
        assert np.linalg.norm(res) <= 1e-8

    def test_update_improves_q(self):
        sample, params, tau = self._fixture()
        new = m_step_freq(params, sample, tau)
        assert q_value_freq(new, sample, tau) > q_value_freq(params, sample, tau)

    def test_shapes_stay_positive(self):
        sample, params, tau = self._fixture()
        new = m_step_freq(params, sample, tau)
        assert new.alpha1 > 0.0 and new.alpha2 > 0.0 and new.beta > 0.0

    def test_all_dormant_weights_fit_single_component(self):
        sample, params, _ = self._fixture()
        new = m_step_freq(params, sample, np.ones(sample.m))
        assert new.p == 1.0
        assert new.alpha2 == params.alpha2  # dormant component carried over
        assert new.alpha1 > 0.0

    def test_all_active_weights_fit_total_shape(self):
        sample, params, _ = self._fixture()
        new = m_step_freq(params, sample, np.zeros(sample.m))
        assert new.p == 0.0
        assert new.alpha1 == params.alpha1
        assert new.alpha2 > 0.0

    def test_invalid_tau_rejected(self):
        sample, params, tau = self._fixture()
        with pytest.raises(ValueError):
            m_step_freq(params, sample, tau[:-1])
        bad = tau.copy()
        bad[0] = 1.5
        with pytest.raises(ValueError):
            m_step_freq(params, sample, bad)


class TestFitFreq:
    def test_loglik_monotone_and_matches_scipy(self):
        sample = cs.CountSample(cs.sample_counts(DEMO_FREQ, 200, seed=1))
        init = cs.FreqParams(2.0, 2.0, 1.0, 0.5)
        fit, trace = cs.fit_freq(sample, init)
        assert trace.converged
        path = np.array(trace.loglik_path)
        assert np.all(np.diff(path) >= -1e-9)
        assert observed_loglik_freq(fit, sample) == pytest.approx(
            float(scipy_mixture_logpmf(fit, sample.counts).sum()), rel=1e-12
        )

    def test_beats_initial_likelihood(self):
        sample = cs.CountSample(cs.sample_counts(DEMO_FREQ, 200, seed=2))
        init = cs.FreqParams(1.0, 5.0, 2.0, 0.3)
        fit, trace = cs.fit_freq(sample, init)
        assert trace.loglik_path[-1] > trace.loglik_path[0]

    def test_trace_lengths_agree(self):
        sample = cs.CountSample(cs.sample_counts(DEMO_FREQ, 100, seed=4))
        _, trace = cs.fit_freq(sample, cs.FreqParams(2.0, 2.0, 1.0, 0.5))
        assert len(trace.params_path) == trace.iterations + 1
        assert len(trace.loglik_path) == trace.iterations + 1

    def test_restart_from_fit_stops_immediately(self):
        sample = cs.CountSample(cs.sample_counts(DEMO_FREQ, 150, seed=6))
        fit, _ = cs.fit_freq(sample, cs.FreqParams(2.0, 2.0, 1.0, 0.5))
        refit, trace = cs.fit_freq(sample, fit)
        assert trace.converged
        assert trace.iterations == 1

    def test_fixed_point_is_stationary(self):
        # At a tightly converged fit the M-step equations are satisfied and
        # p equals the posterior mean almost exactly.
        sample = cs.CountSample(cs.sample_counts(DEMO_FREQ, 400, seed=5))
        fit, trace = cs.fit_freq(
            sample,
            moment_init_freq(sample),
            cs.EmOptions(tol=1e-9, loglik_tol=1e-14, max_iters=20000),
        )
        assert trace.converged
        tau = e_step_freq(fit, sample)
        res = _m_step_residuals(sample, tau)(
            np.log([fit.alpha1, fit.alpha2, fit.beta])
        )
        assert np.linalg.norm(res) <= 1e-6
        assert abs(fit.p - float(tau.mean())) <= 1e-7

    def test_ridge_prone_sample_recovers(self):
        # This draw pushes the first Newton M-step toward the Poisson ridge
        # (shapes and rate growing together); the fit must still converge
        # monotonically to an interior optimum.
        truth = cs.FreqParams(4.0, 6.0, 1.2, 0.55)
        sample = cs.CountSample(cs.sample_counts(truth, 150, seed=3))
        fit, trace = cs.fit_freq(sample, moment_init_freq(sample))
        assert trace.converged
        path = np.array(trace.loglik_path)
        assert np.all(np.diff(path) >= -1e-9)
        assert 0.3 < fit.p < 0.8
        assert np.isfinite(fit.alpha1) and np.isfinite(fit.beta)

    def test_constant_counts_flagged_not_raised(self):
        # Zero-variance counts have no interior optimum (the rate runs away);
        # the fit must hand back the last valid parameters with the flag off.
        sample = cs.CountSample(np.full(40, 3))
        params, trace = cs.fit_freq(
            sample, cs.FreqParams(2.0, 1.0, 1.0, 0.5), cs.EmOptions(max_iters=300)
        )
        assert not trace.converged
        assert np.isfinite(params.alpha1) and np.isfinite(params.beta)

    def test_max_iters_one_reports_non_convergence(self):
        sample = cs.CountSample(cs.sample_counts(DEMO_FREQ, 100, seed=8))
        _, trace = cs.fit_freq(
            sample, cs.FreqParams(1.0, 4.0, 2.0, 0.3), cs.EmOptions(max_iters=1)
        )
        assert not trace.converged
        assert trace.iterations == 1


class TestMomentInit:
    def test_two_cluster_sample_splits_evenly(self):
        lo = cs.sample_counts(cs.FreqParams(3.0, 1e-9, 0.5, 1.0), 200, seed=21)
        hi = cs.sample_counts(cs.FreqParams(30.0, 1e-9, 0.5, 1.0), 200, seed=22)
        sample = cs.CountSample(np.concatenate([lo, hi]))
        init = moment_init_freq(sample)
        assert init.p == pytest.approx(0.5, abs=0.1)
        assert init.alpha2 > 0.0
        assert 0.1 < init.beta < 2.0  # parts are NB with beta = 1/2

    def test_usable_as_em_start(self):
        sample = cs.CountSample(cs.sample_counts(DEMO_FREQ, 200, seed=13))
        fit, trace = cs.fit_freq(sample, moment_init_freq(sample))
        assert trace.converged
        assert trace.loglik_path[-1] >= trace.loglik_path[0]

    def test_underdispersed_counts_rejected(self):
        sample = cs.CountSample(np.array([2, 2, 2, 2, 3, 3, 3, 3]))
        with pytest.raises(ValueError, match="variance"):
            moment_init_freq(sample)

    def test_too_few_periods_rejected(self):
        with pytest.raises(ValueError, match="at least 4"):
            moment_init_freq(cs.CountSample(np.array([1, 5, 9])))
