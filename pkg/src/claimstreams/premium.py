"""Exact Bayesian posteriors and credibility premiums per rating period.

Both posteriors stay inside their prior families. On the frequency side the
intensity posterior is again a two-Gamma mixture whose weight w depends on the
data through an odds-like quantity G; on the severity side the claim-rate
posterior is an atom at mu plus a Gamma, with weight omega driven by phi.
Both weight drivers are computed entirely in log space (the phi formula
contains a factor exp(mu * sum_y) that must never be exponentiated alone) and
converted to weights with the stable logistic transform. Premiums are the
posterior means; their product is the combined quote.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ._validation import require_count, require_nonnegative
from .params import ClaimHistory, FreqParams, SevParams
from .special_math import log_beta, log_gamma


@dataclass(frozen=True)
class PosteriorFreq:
    """Posterior of the claim intensity: mixture of Gamma(shape_lo, rate) and
    Gamma(shape_hi, rate) with weight w on the low-shape component."""

    w: float
    shape_lo: float
    shape_hi: float
    rate: float


@dataclass(frozen=True)
class PosteriorSev:
    """Posterior of the claim-size rate: an atom at ``atom`` with mass omega
    plus a Gamma(gamma_shape, gamma_rate) with the rest."""

    omega: float
    gamma_shape: float
    gamma_rate: float
    atom: float


@dataclass(frozen=True)
class PremiumQuote:
    """A per-period premium: frequency and severity components and their product.

    ``frequency_only`` marks quotes where no claim amounts were recorded and
    the severity side fell back to its no-data value.
    """

    freq_component: float
    sev_component: float
    premium: float
    w: float
    omega: float
    frequency_only: bool = False


def _split_quad(func, mode: float, sd: float) -> float:
    """Adaptive quadrature of ``func`` on (0, inf), split around its peak.

    Break points near the mode steer the adaptive rule; the far tail is
    integrated separately because scipy's quad cannot mix break points with
    an infinite limit.
    """
    cut = mode + 12.0 * sd
    points = sorted({max(p, 0.0) for p in (mode - 4.0 * sd, mode - sd, mode, mode + sd, mode + 4.0 * sd)})
    core, _ = integrate.quad(func, 0.0, cut, points=points, epsabs=0.0, epsrel=1e-12, limit=400)
    # The tail beyond 12 sd carries e-30-ish relative mass; an absolute
    # tolerance tied to sd keeps quad from chasing roundoff there.
    tail, _ = integrate.quad(func, cut, np.inf, epsabs=1e-13 * max(sd, 1e-6), epsrel=1e-10, limit=400)
    return core + tail


def _inv_one_plus_exp(z: float) -> float:
    """1 / (1 + exp(z)), stable for |z| up to the overflow threshold and beyond."""
    if z >= 0.0:
        ez = math.exp(-z) if z < 745.0 else 0.0
        return ez / (1.0 + ez)
    ez = math.exp(z) if z > -745.0 else 0.0
    return 1.0 / (1.0 + ez)


def log_G(freq: FreqParams, m: int, sum_n: int) -> float:
    """Log of the posterior odds driver G for the frequency weight.

    log G = log((1-p)/p) + log B(alpha1, alpha2) - log B(sum_n + alpha1, alpha2)
    + alpha2 * (log beta - log(beta + m)). Returns -inf when p = 1 (w = 1);
    p = 0 is an error since the weight degenerates.
    """
    require_count("m", m)
    require_count("sum_n", sum_n)
    a1, a2, beta, p = freq.as_tuple()
    if p == 0.0:
        raise ValueError("log_G is undefined at p = 0: all mass is on the active branch")
    if p == 1.0:
        return -math.inf
    return (
        math.log1p(-p)
        - math.log(p)
        + log_beta(a1, a2)
        - log_beta(sum_n + a1, a2)
        + a2 * (math.log(beta) - math.log(beta + m))
    )


def log_G_asymptote(freq: FreqParams, m: int, sum_n: int) -> float:
    """Large-count expansion of log G.

    Replaces the Beta ratio by its leading term, giving
    log[(1-p)/p * Gamma(alpha1)/Gamma(alpha1+alpha2) * (beta*sum_n/(beta+m))**alpha2].
    The exponent on the bracket is alpha2, from the asymptotic Gamma-ratio
    Gamma(x)/Gamma(x+a) ~ x**(-a) applied to the Beta-function ratio.
    """
    require_count("m", m)
    if sum_n < 1:
        raise ValueError("the expansion needs sum_n >= 1")
    a1, a2, beta, p = freq.as_tuple()
    if p == 0.0 or p == 1.0:
        raise ValueError("the expansion needs 0 < p < 1")
    return (
        math.log1p(-p)
        - math.log(p)
        + log_gamma(a1)
        - log_gamma(a1 + a2)
        + a2 * (math.log(beta) + math.log(sum_n) - math.log(beta + m))
    )


def posterior_freq(freq: FreqParams, m: int, sum_n: int) -> PosteriorFreq:
    """Intensity posterior after m periods with sum_n total claims.

    With no data this reproduces the prior (w = p). The mixture components
    are Gamma(sum_n + alpha1, beta + m) and Gamma(sum_n + alpha1 + alpha2,
    beta + m).
    """
    a1, a2, beta, p = freq.as_tuple()
    if p == 0.0:
        w = 0.0
        require_count("m", m)
        require_count("sum_n", sum_n)
    else:
        w = _inv_one_plus_exp(log_G(freq, m, sum_n))
    return PosteriorFreq(
        w=w,
        shape_lo=sum_n + a1,
        shape_hi=sum_n + a1 + a2,
        rate=beta + m,
    )


def premium_freq(freq: FreqParams, m: int, sum_n: int) -> tuple[float, float]:
    """Posterior mean claim frequency and the mixture weight w.

    Each branch is the usual credibility blend: (sum_n + shape) / (beta + m)
    equals Z * (sum_n / m) + (1 - Z) * (shape / beta) with Z = m / (beta + m).
    """
    post = posterior_freq(freq, m, sum_n)
    value = (post.w * post.shape_lo + (1.0 - post.w) * post.shape_hi) / post.rate
    return value, post.w


def log_phi(sev: SevParams, m_star: int, sum_y: float) -> float:
    """Log of the posterior odds driver phi for the severity weight.

    log phi = log((1-nu)/nu) + log Gamma(m* + delta) - log Gamma(delta)
    + delta*log sigma - (m* + delta)*log(sigma + sum_y) - m**log mu + mu*sum_y.
    Returns -inf when nu = 1; nu = 0 is an error.
    """
    require_count("m_star", m_star)
    require_nonnegative("sum_y", sum_y)
    mu, delta, sigma, nu = sev.as_tuple()
    if nu == 0.0:
        raise ValueError("log_phi is undefined at nu = 0: all mass is on the Pareto branch")
    if nu == 1.0:
        return -math.inf
    if m_star == 0 and sum_y == 0.0:
        # Every data term cancels identically; evaluating them anyway can
        # leave a one-ulp residue, and the no-data odds must be exact.
        return math.log1p(-nu) - math.log(nu)
    return (
        math.log1p(-nu)
        - math.log(nu)
        + log_gamma(m_star + delta)
        - log_gamma(delta)
        + delta * math.log(sigma)
        - (m_star + delta) * math.log(sigma + sum_y)
        - m_star * math.log(mu)
        + mu * sum_y
    )


def posterior_sev(sev: SevParams, m_star: int, sum_y: float) -> PosteriorSev:
    """Claim-rate posterior: atom at mu with mass omega, Gamma(m* + delta,
    sigma + sum_y) with the rest."""
    mu, delta, sigma, nu = sev.as_tuple()
    if nu == 0.0:
        omega = 0.0
        require_count("m_star", m_star)
        require_nonnegative("sum_y", sum_y)
    else:
        omega = _inv_one_plus_exp(log_phi(sev, m_star, sum_y))
    return PosteriorSev(
        omega=omega,
        gamma_shape=m_star + delta,
        gamma_rate=sigma + sum_y,
        atom=mu,
    )


def premium_sev(sev: SevParams, m_star: int, sum_y: float) -> tuple[float, float]:
    """Severity premium and the mixture weight omega.

    omega / mu + (1 - omega) * (m* + delta) / (sum_y + sigma): the weighted
    average of the exponential branch's mean and the Gamma-branch factor.
    """
    post = posterior_sev(sev, m_star, sum_y)
    value = post.omega / post.atom + (1.0 - post.omega) * post.gamma_shape / post.gamma_rate
    return value, post.omega


def premium_combined(freq: FreqParams, sev: SevParams, hist: ClaimHistory) -> PremiumQuote:
    """Combined premium for the next period given an observed history.

    The product of the frequency and severity posterior means at the
    history's sufficient statistics. A history with claims but no recorded
    amounts is quoted frequency-only: the severity side uses its no-data
    value and the quote is flagged.
    """
    freq_value, w = premium_freq(freq, hist.m, hist.sum_n)
    frequency_only = hist.sum_n > 0 and hist.m_star == 0
    if frequency_only:
        sev_value, omega = premium_sev(sev, 0, 0.0)
    else:
        sev_value, omega = premium_sev(sev, hist.m_star, hist.sum_y)
    return PremiumQuote(
        freq_component=freq_value,
        sev_component=sev_value,
        premium=freq_value * sev_value,
        w=w,
        omega=omega,
        frequency_only=frequency_only,
    )


def posterior_mean_quadrature(freq: FreqParams, m: int, sum_n: int) -> float:
    """Frequency premium by adaptive quadrature against the unnormalized posterior.

    Integrates lambda (and 1) against prior(lambda) * lambda**sum_n *
    exp(-m*lambda) with the integrand rescaled by its peak so huge counts
    stay in range. Serves as an independent check of :func:`premium_freq`.
    """
    require_count("m", m)
    require_count("sum_n", sum_n)
    a1, a2, beta, p = freq.as_tuple()

    def log_weights(lam: float) -> tuple[float, float]:
        base = sum_n * math.log(lam) - m * lam - beta * lam
        lo = math.log(p) + a1 * math.log(beta) - log_gamma(a1) + (a1 - 1.0) * math.log(lam) if p > 0 else -math.inf
        hi = (
            math.log1p(-p) + (a1 + a2) * math.log(beta) - log_gamma(a1 + a2) + (a1 + a2 - 1.0) * math.log(lam)
            if p < 1
            else -math.inf
        )
        return base + lo, base + hi

    def log_integrand(lam: float) -> float:
        if lam <= 0.0:
            return -math.inf
        lo, hi = log_weights(lam)
        return float(np.logaddexp(lo, hi))

    shape_hi = sum_n + a1 + a2
    rate = beta + m
    mode = shape_hi / rate
    shift = log_integrand(mode)

    def density(lam: float) -> float:
        return math.exp(log_integrand(lam) - shift)

    def weighted(lam: float) -> float:
        return lam * density(lam)

    den = _split_quad(density, mode, math.sqrt(shape_hi) / rate)
    num = _split_quad(weighted, mode, math.sqrt(shape_hi) / rate)
    if den <= 0.0 or not math.isfinite(num / den):
        raise RuntimeError("posterior quadrature failed to converge")
    return num / den


def posterior_sev_mean_quadrature(sev: SevParams, m_star: int, sum_y: float) -> float:
    """Severity premium by quadrature against the atom-plus-Gamma posterior.

    The atom mass and the Gamma branch's normalization and mean are all
    computed numerically from the prior-form density times the likelihood
    theta**m* exp(-theta * sum_y), without using the conjugate shape/rate
    update. Serves as an independent check of :func:`premium_sev`.
    """
    require_count("m_star", m_star)
    require_nonnegative("sum_y", sum_y)
    mu, delta, sigma, nu = sev.as_tuple()

    log_atom = (math.log(nu) if nu > 0 else -math.inf) + m_star * math.log(mu) - mu * sum_y
    if nu == 1.0:
        return 1.0 / mu

    def log_cont(theta: float) -> float:
        if theta <= 0.0:
            return -math.inf
        return (
            math.log1p(-nu)
            + delta * math.log(sigma)
            - log_gamma(delta)
            + (delta - 1.0) * math.log(theta)
            - sigma * theta
            + m_star * math.log(theta)
            - theta * sum_y
        )

    shape = m_star + delta
    rate = sigma + sum_y
    mode = shape / rate
    shift = log_cont(mode)

    def density(theta: float) -> float:
        return math.exp(log_cont(theta) - shift)

    def weighted(theta: float) -> float:
        return theta * density(theta)

    mass = _split_quad(density, mode, math.sqrt(shape) / rate)
    mean_num = _split_quad(weighted, mode, math.sqrt(shape) / rate)
    if mass <= 0.0:
        raise RuntimeError("severity posterior quadrature failed to converge")
    gamma_mean = mean_num / mass

    # Atom weight from the two branch masses, combined in log space.
    log_cont_mass = shift + math.log(mass)
    omega = _inv_one_plus_exp(log_cont_mass - log_atom)
    return omega / mu + (1.0 - omega) * gamma_mean
