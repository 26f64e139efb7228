"""Goodness-of-fit tests of a fitted count mixture against observed counts.

Two tests are exposed. The Kolmogorov-Smirnov statistic is computed on the
discrete support directly; its asymptotic p-value assumes a continuous law,
so for counts it is conservative (the true p-value is at least as large).
The chi-square test with model-quantile bins is the primary discrete test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import _mixture_cdf_table
from .params import CountSample, FreqParams
from .special_math import kolmogorov_sf, reg_incomplete_gamma_upper

# Expected count per bin required before the chi-square approximation is trusted.
_MIN_EXPECTED = 5.0


@dataclass(frozen=True)
class GofReport:
    """Both test results plus the chi-square binning, for display or export.

    ``bins`` rows are (lo, hi, observed, expected) with hi = None on the
    open-ended last bin.
    """

    ks_statistic: float
    ks_pvalue: float
    chisq_statistic: float
    chisq_df: int
    chisq_pvalue: float
    bins: tuple


def ks_test(params: FreqParams, sample: CountSample) -> tuple[float, float]:
    """Kolmogorov-Smirnov distance between the empirical and model CDFs.

    D is the largest absolute CDF gap over the observed support; the p-value
    is the asymptotic survival function at sqrt(m) * D. Needs at least 10
    periods.
    """
    if sample.m < 10:
        raise ValueError("KS test needs at least 10 periods")
    n = sample.counts
    m = sample.m
    support = np.unique(n)
    model_cdf = _mixture_cdf_table(params, int(support.max()))[support]
    ecdf = np.searchsorted(np.sort(n), support, side="right") / m
    d = float(np.max(np.abs(ecdf - model_cdf)))
    return d, kolmogorov_sf(np.sqrt(m) * d)


def _quantile_bins(params: FreqParams, n_max: int, m: int, k0: int):
    """Integer bin edges at model quantiles, right-merged until E >= 5.

    Returns a list of (lo, hi_inclusive_or_None, expected_probability).
    The final bin absorbs the upper tail.
    """
    cdf = _mixture_cdf_table(params, n_max)
    # Initial cut points: smallest n with CDF >= j/k0, deduplicated.
    edges = []
    for j in range(1, k0):
        cut = int(np.searchsorted(cdf, j / k0))
        if cut <= n_max and (not edges or cut > edges[-1]):
            edges.append(cut)

    bins = []
    lo = 0
    for cut in edges:
        prob = cdf[cut] - (cdf[lo - 1] if lo > 0 else 0.0)
        bins.append([lo, cut, prob])
        lo = cut + 1
    bins.append([lo, None, 1.0 - (cdf[lo - 1] if lo > 0 else 0.0)])

    # Greedy right-merge: absorb any light bin into its right neighbour.
    merged = []
    i = 0
    while i < len(bins):
        cur = bins[i]
        while cur[2] * m < _MIN_EXPECTED and i + 1 < len(bins):
            nxt = bins[i + 1]
            cur = [cur[0], nxt[1], cur[2] + nxt[2]]
            i += 1
        merged.append(cur)
        i += 1
    # The tail bin itself may still be light: fold it leftwards.
    while len(merged) > 1 and merged[-1][2] * m < _MIN_EXPECTED:
        last = merged.pop()
        prev = merged.pop()
        merged.append([prev[0], last[1], prev[2] + last[2]])
    return merged


def chisq_test(
    params: FreqParams, sample: CountSample, fitted_param_count: int = 0
) -> tuple[float, int, float]:
    """Chi-square test with equiprobable model-quantile bins.

    Bins come from the model CDF and are merged rightwards until every
    expected count is at least 5. Degrees of freedom are bins - 1 -
    ``fitted_param_count``; pass 4 when the parameters were fitted on this
    same sample, 0 when they are external. Needs at least 30 periods.
    """
    if sample.m < 30:
        raise ValueError("chi-square test needs at least 30 periods")
    if fitted_param_count < 0:
        raise ValueError("fitted_param_count must be nonnegative")
    n = sample.counts
    m = sample.m
    n_max = int(n.max())
    k0 = max(3, min(30, m // 5))
    bins = _quantile_bins(params, n_max, m, k0)
    if len(bins) < 3:
        raise ValueError(
            f"only {len(bins)} bins remain after merging to expected counts >= 5; "
            "the sample is too small or the model too concentrated for a chi-square test"
        )
    df = len(bins) - 1 - fitted_param_count
    if df < 1:
        raise ValueError(
            f"no degrees of freedom left: {len(bins)} bins minus 1 minus "
            f"{fitted_param_count} fitted parameters"
        )

    stat = 0.0
    for lo, hi, prob in bins:
        observed = int(np.sum(n >= lo)) if hi is None else int(np.sum((n >= lo) & (n <= hi)))
        expected = prob * m
        stat += (observed - expected) ** 2 / expected
    return float(stat), int(df), reg_incomplete_gamma_upper(df / 2.0, stat / 2.0)


def gof_report(
    params: FreqParams, sample: CountSample, fitted_param_count: int = 0
) -> GofReport:
    """Run both tests and return their results with the chi-square binning."""
    ks_stat, ks_p = ks_test(params, sample)
    n = sample.counts
    m = sample.m
    n_max = int(n.max())
    k0 = max(3, min(30, m // 5))
    bins = _quantile_bins(params, n_max, m, k0)
    chi_stat, df, chi_p = chisq_test(params, sample, fitted_param_count)
    rows = []
    for lo, hi, prob in bins:
        observed = int(np.sum(n >= lo)) if hi is None else int(np.sum((n >= lo) & (n <= hi)))
        rows.append((lo, hi, observed, prob * m))
    return GofReport(
        ks_statistic=ks_stat,
        ks_pvalue=ks_p,
        chisq_statistic=chi_stat,
        chisq_df=df,
        chisq_pvalue=chi_p,
        bins=tuple(rows),
    )
