"""EM estimation of the claim-size mixture from pooled individual severities.

Severities from all periods are pooled into one sample; the model makes claim
sizes independent of counts, so nothing is lost. The latent indicator per
claim is whether it came from the historical (exponential) branch. The
mixture weight nu can be held fixed (its value is determined by the frequency
parameters) or estimated alongside the rest.
"""

from __future__ import annotations

import math

import numpy as np

from .distributions import _sev_log_pdf_vec
from .params import EmOptions, EmTrace, FreqParams, SeveritySample, SevParams
from .solver import SolveOptions, SolverError, ascend_potential, solve_system

_DEGENERATE_WEIGHT = 1e-12


def nu_from_freq(freq: FreqParams) -> float:
    """Severity mixture weight implied by the frequency parameters.

    nu = p + (1 - p) * alpha1 / (alpha1 + alpha2): the chance a claim belongs
    to the historical stream, using the closed ratio of Beta functions.
    """
    a1, a2, _, p = freq.as_tuple()
    return p + (1.0 - p) * a1 / (a1 + a2)


def e_step_sev(params: SevParams, sample: SeveritySample) -> np.ndarray:
    """Posterior probability per claim of the exponential (historical) branch."""
    mu, delta, sigma, nu = params.as_tuple()
    y = sample.values
    if nu == 1.0:
        return np.ones(sample.m_star)
    if nu == 0.0:
        return np.zeros(sample.m_star)
    log_exp = math.log(nu) + math.log(mu) - mu * y
    # Stable Pareto log density (see _sev_log_pdf_vec): log1p keeps the
    # exponential-limit decay when sigma dwarfs y.
    log_par = (
        math.log1p(-nu)
        + math.log(delta)
        - math.log(sigma)
        - (delta + 1.0) * np.log1p(y / sigma)
    )
    return np.exp(log_exp - np.logaddexp(log_exp, log_par))


def _pareto_residuals(sample: SeveritySample, tau: np.ndarray):
    """Stationarity equations for (delta, sigma) in log-coordinates, scaled by 1/m*."""
    y = sample.values
    m_star = float(sample.m_star)
    one_minus = 1.0 - tau
    weight = float(one_minus.sum())

    def residuals(x: np.ndarray) -> np.ndarray:
        delta, sigma = np.exp(x)
        # weight*log(sigma) - sum w*log(sigma + y) folded into log1p so the
        # balance survives sigma values far above the data scale.
        r_delta = weight / delta - float(np.dot(one_minus, np.log1p(y / sigma)))
        r_sigma = weight * delta / sigma - (delta + 1.0) * float(np.sum(one_minus / (sigma + y)))
        return np.array([r_delta / m_star, r_sigma / m_star])

    return residuals


def m_step_sev(
    params: SevParams,
    sample: SeveritySample,
    tau: np.ndarray,
    estimate_nu: bool = False,
    opts: SolveOptions = SolveOptions(),
) -> SevParams:
    """One maximization step for the severity mixture.

    mu' = sum(tau) / sum(tau * y) in closed form; (delta', sigma') from a
    two-equation Newton solve warm-started at the current values; nu' is
    mean(tau) when ``estimate_nu`` else carried over. A tau with essentially
    no Pareto mass leaves (delta, sigma) untouched.
    """
    tau = np.asarray(tau, dtype=float)
    if tau.size != sample.m_star:
        raise ValueError(f"tau has length {tau.size}, expected {sample.m_star}")
    if np.any(tau < 0.0) or np.any(tau > 1.0):
        raise ValueError("tau entries must lie in [0, 1]")
    mu, delta, sigma, nu = params.as_tuple()
    y = sample.values
    m_star = sample.m_star
    sum_tau = float(tau.sum())
    sum_tau_y = float(np.dot(tau, y))

    if sum_tau_y == 0.0:
        raise ValueError("cannot update mu: weighted claim total sum(tau * y) is zero")
    mu_new = sum_tau / sum_tau_y

    if m_star - sum_tau <= _DEGENERATE_WEIGHT * m_star:
        delta_new, sigma_new = delta, sigma
    else:
        residuals = _pareto_residuals(sample, tau)
        one_minus = 1.0 - tau

        def potential(x: np.ndarray) -> float:
            # The (delta, sigma)-dependent part of the expected complete-data
            # log-likelihood, scaled by 1/m* like the residuals, in the same
            # log1p form as the density.
            d, s = np.exp(x)
            terms = math.log(d) - math.log(s) - (d + 1.0) * np.log1p(y / s)
            return float(np.dot(one_minus, terms)) / m_star

        def gradient(x: np.ndarray) -> np.ndarray:
            return np.exp(x) * residuals(x)

        x0 = np.log([delta, sigma])
        base = potential(x0)

        def acceptable(x: np.ndarray) -> bool:
            val = potential(x)
            return math.isfinite(val) and val >= base

        root = None
        try:
            report = solve_system(residuals, x0, opts)
            if report.converged and acceptable(report.root):
                root = report.root
        except SolverError:
            pass
        if root is None:
            # Same recovery as the frequency M-step. The norm descent can
            # stray toward the exponential limit of the Pareto, and the scaled
            # residuals vanish along that ridge, so Newton can even certify a
            # spurious far-away "root" that loses expected complete-data
            # log-likelihood. Climb the objective instead, then re-polish.
            x_up, _, improved = ascend_potential(potential, gradient, x0, opts)
            if improved:
                try:
                    report = solve_system(residuals, x_up, opts)
                    if report.converged and acceptable(report.root):
                        root = report.root
                except SolverError:
                    pass
                if root is None:
                    root = x_up
            else:
                # No acceptable root and no uphill direction: (delta, sigma)
                # already maximize this block to numerical precision. Carry
                # them; the mu and nu updates alone keep the step monotone.
                root = x0
        delta_new, sigma_new = (float(v) for v in np.exp(root))

    nu_new = sum_tau / m_star if estimate_nu else nu
    return SevParams(mu=float(mu_new), delta=delta_new, sigma=sigma_new, nu=nu_new)


def observed_loglik_sev(params: SevParams, sample: SeveritySample) -> float:
    """Observed-data log-likelihood: sum of the mixture log density over the claims."""
    return float(_sev_log_pdf_vec(params, sample.values).sum())


def fit_sev(
    sample: SeveritySample,
    init: SevParams,
    estimate_nu: bool = False,
    opts: EmOptions = EmOptions(),
    solve_opts: SolveOptions = SolveOptions(),
) -> tuple[SevParams, EmTrace]:
    """Run the severity EM loop from ``init`` until parameters or likelihood settle.

    Same stopping rules and non-convergence contract as the frequency fit.
    With ``estimate_nu`` the weight participates in both the update and the
    parameter-change norm; otherwise it stays at its initial value.
    """
    params = init
    trace = EmTrace()
    trace.params_path.append(params)
    trace.loglik_path.append(observed_loglik_sev(params, sample))

    for iteration in range(1, int(opts.max_iters) + 1):
        tau = e_step_sev(params, sample)
        try:
            new_params = m_step_sev(params, sample, tau, estimate_nu, solve_opts)
        except (SolverError, ValueError):
            trace.converged = False
            trace.iterations = iteration - 1
            return params, trace
        new_ll = observed_loglik_sev(new_params, sample)
        trace.params_path.append(new_params)
        trace.loglik_path.append(new_ll)
        trace.iterations = iteration

        delta = max(
            abs(new_params.mu - params.mu),
            abs(new_params.delta - params.delta),
            abs(new_params.sigma - params.sigma),
            abs(new_params.nu - params.nu),
        )
        ll_moved = abs(new_ll - trace.loglik_path[-2])
        params = new_params
        if delta < opts.tol or ll_moved < opts.loglik_tol:
            trace.converged = True
            return params, trace

    trace.converged = False
    return params, trace
