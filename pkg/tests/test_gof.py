"""KS and chi-square tests of a count mixture against data."""

import numpy as np
import pytest
import scipy.stats

import claimstreams as cs

from conftest import DEMO_FREQ


def scipy_mixture_cdf(params, n):
    q = params.beta / (1.0 + params.beta)
    return params.p * scipy.stats.nbinom.cdf(n, params.alpha1, q) + (
        1.0 - params.p
    ) * scipy.stats.nbinom.cdf(n, params.alpha1 + params.alpha2, q)


class TestKsTest:
    def test_point_mass_distance_is_cdf_gap(self):
        # Identical counts: the empirical CDF is a step to 1 at 6, so the
        # distance is exactly 1 - F(6).
        sample = cs.CountSample(np.full(12, 6))
        d, p = cs.ks_test(DEMO_FREQ, sample)
        assert d == pytest.approx(1.0 - scipy_mixture_cdf(DEMO_FREQ, 6), rel=1e-12)
        assert 0.0 <= p < 0.05

    def test_permutation_invariant(self):
        counts = cs.sample_counts(DEMO_FREQ, 80, seed=19)
        shuffled = counts.copy()
        np.random.default_rng(0).shuffle(shuffled)
        assert cs.ks_test(DEMO_FREQ, cs.CountSample(counts)) == cs.ks_test(
            DEMO_FREQ, cs.CountSample(shuffled)
        )

    def test_model_sample_not_rejected(self):
        sample = cs.CountSample(cs.sample_counts(DEMO_FREQ, 200, seed=17))
        d, p = cs.ks_test(DEMO_FREQ, sample)
        assert p > 0.01
        assert 0.0 <= d <= 1.0

    def test_wrong_rate_rejected(self):
        # Doubling beta halves the model mean; 200 periods see it clearly.
        sample = cs.CountSample(cs.sample_counts(DEMO_FREQ, 200, seed=17))
        wrong = cs.FreqParams(3.0, 1.0, 1.0, 0.6)
        _, p = cs.ks_test(wrong, sample)
        assert p < 0.001

    def test_needs_ten_periods(self):
        with pytest.raises(ValueError, match="at least 10"):
            cs.ks_test(DEMO_FREQ, cs.CountSample(np.arange(9)))


class TestChisqTest:
    def test_statistic_nonnegative_with_valid_pvalue(self):
        sample = cs.CountSample(cs.sample_counts(DEMO_FREQ, 200, seed=17))
        stat, df, p = cs.chisq_test(DEMO_FREQ, sample)
        assert stat >= 0.0
        assert df >= 1
        assert 0.0 <= p <= 1.0

    def test_pvalue_matches_scipy_tail(self):
        sample = cs.CountSample(cs.sample_counts(DEMO_FREQ, 200, seed=17))
        stat, df, p = cs.chisq_test(DEMO_FREQ, sample)
        assert p == pytest.approx(scipy.stats.chi2.sf(stat, df), rel=1e-10)

    def test_model_sample_not_rejected(self):
        sample = cs.CountSample(cs.sample_counts(DEMO_FREQ, 200, seed=17))
        _, _, p = cs.chisq_test(DEMO_FREQ, sample)
        assert p > 0.01

    def test_wrong_rate_rejected(self):
        sample = cs.CountSample(cs.sample_counts(DEMO_FREQ, 200, seed=17))
        wrong = cs.FreqParams(3.0, 1.0, 1.0, 0.6)
        _, _, p = cs.chisq_test(wrong, sample)
        assert p < 0.001

    def test_fitted_param_count_reduces_df(self):
        sample = cs.CountSample(cs.sample_counts(DEMO_FREQ, 200, seed=17))
        _, df0, _ = cs.chisq_test(DEMO_FREQ, sample, fitted_param_count=0)
        _, df4, _ = cs.chisq_test(DEMO_FREQ, sample, fitted_param_count=4)
        assert df4 == df0 - 4

    def test_exhausted_df_rejected(self):
        sample = cs.CountSample(cs.sample_counts(DEMO_FREQ, 200, seed=17))
        with pytest.raises(ValueError, match="degrees of freedom"):
            cs.chisq_test(DEMO_FREQ, sample, fitted_param_count=50)
        with pytest.raises(ValueError):
            cs.chisq_test(DEMO_FREQ, sample, fitted_param_count=-1)

    def test_concentrated_model_rejected(self):
        # Nearly all model mass sits on one bin; merging to E >= 5 leaves
        # too few bins for a test.
        tiny = cs.FreqParams(0.5, 0.1, 5.0, 0.5)
        sample = cs.CountSample(np.concatenate([np.zeros(35, int), np.ones(5, int)]))
        with pytest.raises(ValueError, match="bins remain"):
            cs.chisq_test(tiny, sample)

    def test_needs_thirty_periods(self):
        with pytest.raises(ValueError, match="at least 30"):
            cs.chisq_test(DEMO_FREQ, cs.CountSample(np.arange(29)))


class TestGofReport:
    @staticmethod
    def _report():
        sample = cs.CountSample(cs.sample_counts(DEMO_FREQ, 200, seed=17))
        return cs.gof_report(DEMO_FREQ, sample, fitted_param_count=4), sample

    def test_matches_standalone_tests(self):
        report, sample = self._report()
        assert (report.ks_statistic, report.ks_pvalue) == cs.ks_test(DEMO_FREQ, sample)
        assert (
            report.chisq_statistic,
            report.chisq_df,
            report.chisq_pvalue,
        ) == cs.chisq_test(DEMO_FREQ, sample, fitted_param_count=4)

    def test_bins_recompute_statistic(self):
        report, sample = self._report()
        recomputed = sum((o - e) ** 2 / e for _, _, o, e in report.bins)
        assert recomputed == pytest.approx(report.chisq_statistic, rel=1e-12)

    def test_bins_partition_the_sample(self):
        report, sample = self._report()
        assert sum(o for _, _, o, _ in report.bins) == sample.m
        assert sum(e for _, _, o, e in report.bins) == pytest.approx(sample.m, rel=1e-12)

    def test_every_expected_count_at_least_five(self):
        report, _ = self._report()
        assert min(e for _, _, _, e in report.bins) >= 5.0

    def test_df_counts_bins_and_fitted_params(self):
        report, _ = self._report()
        assert report.chisq_df == len(report.bins) - 1 - 4

    def test_last_bin_open_ended(self):
        report, _ = self._report()
        assert report.bins[-1][1] is None
        assert all(hi is not None for _, hi, _, _ in report.bins[:-1])
