"""Densities, mass functions, CDFs, and seeded samplers for the model's laws.

Claim counts per period follow a mixture of two Negative Binomials with a
shared rate: the historical stream alone (shape alpha1) with weight p, both
streams together (shape alpha1 + alpha2) with weight 1 - p. The matching
intensity prior is the two-Gamma mixture. Claim sizes follow the
exponential/Pareto mixture, interarrival times the two-Pareto mixture.
Everything is evaluated in log space where overflow threatens; samplers take
an explicit seed and never touch global RNG state.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from ._validation import require_count, require_nonnegative
from .params import FreqParams, SevParams
from .special_math import log_gamma


def _nb_log_pmf(r: float, beta: float, n) -> np.ndarray:
    """Log pmf of a Negative Binomial with shape r and success odds beta.

    Parameterized so the mean is r / beta: the count is the number of
    failures with success probability beta / (1 + beta). Uses the
    log-gamma form of the generalized binomial coefficient, which stays
    finite for shapes around 100 and counts in the thousands.
    """
    n = np.asarray(n, dtype=float)
    # log(beta / (1 + beta)) written as -log1p(1/beta): the ratio itself
    # rounds to 1.0 once beta is large, losing the -r/beta mean term that
    # distinguishes the Poisson limit.
    return (
        gammaln(n + r)
        - log_gamma(r)
        - gammaln(n + 1.0)
        - r * math.log1p(1.0 / beta)
        - n * math.log1p(beta)
    )


def _mixture_log_pmf_vec(params: FreqParams, n) -> np.ndarray:
    """Vectorized log pmf of the two-component count mixture."""
    a1, a2, beta, p = params.as_tuple()
    lo = _nb_log_pmf(a1, beta, n)
    hi = _nb_log_pmf(a1 + a2, beta, n)
    if p == 1.0:
        return lo
    if p == 0.0:
        return hi
    return np.logaddexp(math.log(p) + lo, math.log1p(-p) + hi)


def nb_mixture_log_pmf(params: FreqParams, n: int) -> float:
    """Log probability of observing ``n`` claims in one period.

    Parameters
    ----------
    params : FreqParams
        Frequency parameters.
    n : int
        Nonnegative claim count.

    Returns
    -------
    float
        log of p * NB(n; alpha1) + (1 - p) * NB(n; alpha1 + alpha2), both
        components sharing the rate beta, combined by log-sum-exp.
    """
    require_count("n", n)
    return float(_mixture_log_pmf_vec(params, n))


def gamma_mixture_prior_log_pdf(params: FreqParams, lam: float) -> float:
    """Log density of the intensity prior: p Gamma(alpha1, beta) + (1-p) Gamma(alpha1+alpha2, beta)."""
    lam = float(lam)
    if not math.isfinite(lam) or lam <= 0.0:
        raise ValueError(f"lambda must be a finite positive real, got {lam!r}")
    a1, a2, beta, p = params.as_tuple()

    def _gamma_log_pdf(shape: float) -> float:
        return (
            shape * math.log(beta)
            + (shape - 1.0) * math.log(lam)
            - beta * lam
            - log_gamma(shape)
        )

    lo = _gamma_log_pdf(a1)
    hi = _gamma_log_pdf(a1 + a2)
    if p == 1.0:
        return lo
    if p == 0.0:
        return hi
    return float(np.logaddexp(math.log(p) + lo, math.log1p(-p) + hi))


def _sev_log_pdf_vec(params: SevParams, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    mu, delta, sigma, nu = params.as_tuple()
    log_exp_part = math.log(mu) - mu * y
    # delta*log(sigma) - (delta+1)*log(sigma + y) rearranged through log1p:
    # when y is below one ulp of sigma the direct difference cancels to zero
    # and drops the -(delta/sigma)*y exponential-limit decay entirely.
    log_par_part = (
        math.log(delta) - math.log(sigma) - (delta + 1.0) * np.log1p(y / sigma)
    )
    if nu == 1.0:
        return log_exp_part
    if nu == 0.0:
        return log_par_part
    return np.logaddexp(math.log(nu) + log_exp_part, math.log1p(-nu) + log_par_part)


def severity_mixture_log_pdf(params: SevParams, y: float) -> float:
    """Log density of a claim amount: nu * Exp(mu) + (1 - nu) * Pareto(delta, sigma).

    The Pareto branch has density delta * sigma**delta / (sigma + y)**(delta+1)
    on y >= 0 (shifted so the support starts at zero).
    """
    require_nonnegative("y", y)
    return float(_sev_log_pdf_vec(params, y))


def interarrival_mixture_log_pdf(params: FreqParams, t: float) -> float:
    """Log density of the time between claims: a two-Pareto mixture.

    Integrating the exponential waiting time against the intensity prior
    gives p * Pareto(alpha1, beta) + (1 - p) * Pareto(alpha1 + alpha2, beta),
    in the same shifted form as the severity Pareto.
    """
    require_nonnegative("t", t)
    t = float(t)
    a1, a2, beta, p = params.as_tuple()

    def _pareto_log_pdf(shape: float) -> float:
        return (
            math.log(shape) - math.log(beta) - (shape + 1.0) * math.log1p(t / beta)
        )

    lo = _pareto_log_pdf(a1)
    hi = _pareto_log_pdf(a1 + a2)
    if p == 1.0:
        return lo
    if p == 0.0:
        return hi
    return float(np.logaddexp(math.log(p) + lo, math.log1p(-p) + hi))


def sample_counts(params: FreqParams, periods: int, seed: int) -> np.ndarray:
    """Draw one claim count per period from the mixture model.

    Per period: a Bernoulli(p) pick of the dormant/active branch, then the
    intensity from the corresponding Gamma, then a Poisson count. The stream
    is a function of ``seed`` alone.
    """
    if int(periods) < 1:
        raise ValueError("periods must be a positive integer")
    a1, a2, beta, p = params.as_tuple()
    rng = np.random.default_rng(int(seed))
    dormant = rng.random(int(periods)) < p
    shapes = np.where(dormant, a1, a1 + a2)
    lam = rng.standard_gamma(shapes) / beta
    return rng.poisson(lam).astype(np.int64)


def _sample_severities_with(rng: np.random.Generator, params: SevParams, count: int) -> np.ndarray:
    """Inverse-CDF severity draws using an already-constructed generator."""
    mu, delta, sigma, nu = params.as_tuple()
    if count == 0:
        return np.empty(0, dtype=float)
    branch = rng.random(count) < nu
    u = rng.random(count)
    exp_draw = -np.log1p(-u) / mu
    par_draw = sigma * (np.power(1.0 - u, -1.0 / delta) - 1.0)
    return np.where(branch, exp_draw, par_draw)


def sample_severities(params: SevParams, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` claim amounts from the severity mixture.

    Each draw picks the exponential branch with probability nu, then inverts
    the chosen branch's CDF on an independent uniform. Deterministic given
    ``seed``; ``count`` = 0 yields an empty array.
    """
    require_count("count", count)
    rng = np.random.default_rng(int(seed))
    return _sample_severities_with(rng, params, int(count))


def _mixture_cdf_table(params: FreqParams, n_max: int) -> np.ndarray:
    """CDF values at 0..n_max, by cumulative summation of the pmf."""
    pmf = np.exp(_mixture_log_pmf_vec(params, np.arange(n_max + 1)))
    return np.minimum(np.cumsum(pmf), 1.0)


def nb_mixture_cdf(params: FreqParams, n: int) -> float:
    """P[N <= n] under the count mixture, summed from the pmf."""
    require_count("n", n)
    return float(_mixture_cdf_table(params, int(n))[-1])


def freq_mean(params: FreqParams) -> float:
    """Expected claim count per period: p*alpha1/beta + (1-p)*(alpha1+alpha2)/beta."""
    a1, a2, beta, p = params.as_tuple()
    return (p * a1 + (1.0 - p) * (a1 + a2)) / beta


def sev_mean(params: SevParams) -> float:
    """Expected claim amount; infinite (raises) when the Pareto shape is at or below 1.

    The exponential branch contributes nu / mu, the Pareto branch
    (1 - nu) * sigma / (delta - 1).
    """
    mu, delta, sigma, nu = params.as_tuple()
    if nu < 1.0 and delta <= 1.0:
        raise ValueError(
            "mean claim size is infinite: the Pareto branch has shape "
            f"delta = {delta} <= 1"
        )
    pareto_part = 0.0 if nu == 1.0 else sigma / (delta - 1.0)
    return nu / mu + (1.0 - nu) * pareto_part
