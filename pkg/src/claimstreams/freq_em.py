"""EM estimation of the count-mixture parameters from per-period claim counts.

The latent indicator per period is whether the unforeseeable stream was
dormant. The E-step computes its posterior probability tau_i; the M-step
updates p in closed form and solves three digamma equations for
(alpha1, alpha2, beta) with the damped Newton solver, warm-started at the
current values and run in log-coordinates so positivity never needs clipping.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln, psi

from .distributions import _mixture_log_pmf_vec, _nb_log_pmf
from .params import CountSample, EmOptions, EmTrace, FreqParams
from .solver import SolveOptions, SolverError, ascend_potential, solve_system

# Below this share of total weight a component is treated as switched off and
# the M-step falls back to a single-component fit.
_DEGENERATE_WEIGHT = 1e-12


def e_step_freq(params: FreqParams, sample: CountSample) -> np.ndarray:
    """Posterior probability per period that the unforeseeable stream was dormant.

    tau_i = p NB(n_i; alpha1) / [p NB(n_i; alpha1) + (1-p) NB(n_i; alpha1+alpha2)],
    evaluated through log-sum-exp so extreme counts cannot underflow.
    """
    a1, a2, beta, p = params.as_tuple()
    n = sample.counts
    if p == 1.0:
        return np.ones(sample.m)
    if p == 0.0:
        return np.zeros(sample.m)
    log_lo = math.log(p) + _nb_log_pmf(a1, beta, n)
    log_hi = math.log1p(-p) + _nb_log_pmf(a1 + a2, beta, n)
    return np.exp(log_lo - np.logaddexp(log_lo, log_hi))


def _log_nb_coeff(n: np.ndarray, r: float) -> np.ndarray:
    """log of the generalized binomial coefficient C(n + r - 1, n)."""
    n = np.asarray(n, dtype=float)
    return gammaln(n + r) - gammaln(r) - gammaln(n + 1.0)


def q_value_freq(params: FreqParams, sample: CountSample, tau: np.ndarray) -> float:
    """Expected complete-data log-likelihood given membership weights tau.

    The expanded seven-term form: weighted log-weights, the two
    binomial-coefficient sums, and the shape/rate terms. Terms whose weight
    is exactly zero contribute zero even when their log factor is -inf
    (p = 0 or 1 edge cases).
    """
    tau = np.asarray(tau, dtype=float)
    if tau.size != sample.m:
        raise ValueError(f"tau has length {tau.size}, expected {sample.m}")
    a1, a2, beta, p = params.as_tuple()
    n = sample.counts.astype(float)
    m = sample.m
    sum_n = float(n.sum())
    sum_tau = float(tau.sum())
    sum_one_minus = float(m - sum_tau)
    log_ratio = -math.log1p(1.0 / beta)

    def _xlogy(x: float, y: float) -> float:
        return 0.0 if x == 0.0 else x * math.log(y)

    value = (
        _xlogy(sum_tau, p)
        + float(np.dot(tau, _log_nb_coeff(n, a1)))
        + a1 * m * log_ratio
        - sum_n * math.log1p(beta)
        + _xlogy(sum_one_minus, 1.0 - p)
        + float(np.dot(1.0 - tau, _log_nb_coeff(n, a1 + a2)))
        + a2 * log_ratio * sum_one_minus
    )
    return value


def _m_step_residuals(sample: CountSample, tau: np.ndarray):
    """Build the three stationarity residuals in log-coordinates, scaled by 1/m.

    The equations set the partial derivatives of the expected complete-data
    log-likelihood to zero: two digamma balances for the shapes and the
    rearranged rate equation alpha1*m + alpha2*sum(1-tau) = beta*sum(n).
    """
    n = sample.counts.astype(float)
    m = float(sample.m)
    sum_n = float(n.sum())
    one_minus = 1.0 - tau
    sum_one_minus = float(one_minus.sum())

    def residuals(x: np.ndarray) -> np.ndarray:
        a1, a2, beta = np.exp(x)
        log_ratio = -math.log1p(1.0 / beta)
        d_lo = psi(n + a1) - psi(a1)
        d_hi = psi(n + a1 + a2) - psi(a1 + a2)
        r1 = float(np.dot(tau, d_lo)) + float(np.dot(one_minus, d_hi)) + m * log_ratio
        r2 = float(np.dot(one_minus, d_hi)) + sum_one_minus * log_ratio
        r3 = a1 * m + a2 * sum_one_minus - beta * sum_n
        return np.array([r1 / m, r2 / m, r3 / m])

    return residuals


def _single_nb_fit(shape0: float, beta0: float, n: np.ndarray, weights: np.ndarray, opts: SolveOptions):
    """Fit one Negative Binomial (shape, beta) to weighted counts.

    Used when the E-step assigns essentially all mass to one component.
    """
    m_eff = float(weights.sum())
    sum_n = float(np.dot(weights, n))
    if sum_n == 0.0:
        raise SolverError("single-component fit is degenerate: all weighted counts are zero")

    def residuals(x: np.ndarray) -> np.ndarray:
        shape, beta = np.exp(x)
        r1 = float(np.dot(weights, psi(n + shape) - psi(shape))) - m_eff * math.log1p(
            1.0 / beta
        )
        r2 = shape * m_eff - beta * sum_n
        return np.array([r1 / m_eff, r2 / m_eff])

    report = solve_system(residuals, np.log([shape0, beta0]), opts)
    if not report.converged:
        raise SolverError(
            f"single-component shape/rate solve stalled at residual {report.residual_norm:.3e}"
        )
    shape, beta = np.exp(report.root)
    return float(shape), float(beta)


def m_step_freq(
    params: FreqParams,
    sample: CountSample,
    tau: np.ndarray,
    opts: SolveOptions = SolveOptions(),
) -> FreqParams:
    """One maximization step: closed-form p, Newton solve for the shapes and rate.

    p' = mean(tau). The remaining three equations are solved with a warm
    start at the current values. When tau is degenerate (all mass on one
    component) the live component is refit as a single Negative Binomial and
    the dormant component's parameters are carried over.
    """
    tau = np.asarray(tau, dtype=float)
    if tau.size != sample.m:
        raise ValueError(f"tau has length {tau.size}, expected {sample.m}")
    if np.any(tau < 0.0) or np.any(tau > 1.0):
        raise ValueError("tau entries must lie in [0, 1]")
    a1, a2, beta, _ = params.as_tuple()
    m = sample.m
    n = sample.counts.astype(float)
    p_new = float(tau.sum()) / m

    sum_one_minus = float(m - tau.sum())
    if sum_one_minus <= _DEGENERATE_WEIGHT * m:
        # Unforeseeable stream never active: fit NB(alpha1, beta) alone.
        shape, beta_new = _single_nb_fit(a1, beta, n, np.ones(m), opts)
        return FreqParams(alpha1=shape, alpha2=a2, beta=beta_new, p=p_new)
    if float(tau.sum()) <= _DEGENERATE_WEIGHT * m:
        # Always active: only the total shape alpha1 + alpha2 is identified.
        total, beta_new = _single_nb_fit(a1 + a2, beta, n, np.ones(m), opts)
        a2_new = max(total - a1, 1e-8)
        return FreqParams(alpha1=a1, alpha2=a2_new, beta=beta_new, p=p_new)

    residuals = _m_step_residuals(sample, tau)
    x0 = np.log([a1, a2, beta])

    def potential(x: np.ndarray) -> float:
        s1, s2, b = np.exp(x)
        return q_value_freq(FreqParams(s1, s2, b, p_new), sample, tau) / m

    def gradient(x: np.ndarray) -> np.ndarray:
        return np.exp(x) * residuals(x)

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
        # The residual-norm descent strayed, typically toward the Poisson
        # ridge where the norm shrinks without a root (the scaled residuals
        # vanish along the ridge, so Newton can even certify a spurious
        # far-away "root" that loses expected complete-data log-likelihood).
        # Climb the objective itself, then re-polish with Newton.
        x_up, _, improved = ascend_potential(potential, gradient, x0, opts)
        if improved:
            try:
                report = solve_system(residuals, x_up, opts)
                if report.converged and acceptable(report.root):
                    root = report.root
            except SolverError:
                pass
            if root is None:
                # Uphill but not stationary: still a valid EM step, the
                # next iteration continues from here.
                root = x_up
        else:
            # No acceptable root and no uphill direction: the shapes and
            # rate already maximize this block to numerical precision.
            # Carry them; the p update alone keeps the step monotone.
            root = x0
    a1_new, a2_new, beta_new = np.exp(root)
    return FreqParams(alpha1=float(a1_new), alpha2=float(a2_new), beta=float(beta_new), p=p_new)


def observed_loglik_freq(params: FreqParams, sample: CountSample) -> float:
    """Observed-data log-likelihood: sum of the mixture log pmf over the sample."""
    return float(_mixture_log_pmf_vec(params, sample.counts).sum())


def fit_freq(
    sample: CountSample,
    init: FreqParams,
    opts: EmOptions = EmOptions(),
    solve_opts: SolveOptions = SolveOptions(),
) -> tuple[FreqParams, EmTrace]:
    """Run the EM loop from ``init`` until the parameters or likelihood settle.

    Stops when the max absolute parameter change drops below ``opts.tol`` or
    the observed log-likelihood moves by less than ``opts.loglik_tol``.
    Non-convergence (including a stalled M-step solve) is flagged on the
    returned trace rather than raised; the trace carries the parameters and
    observed log-likelihood of every iteration.
    """
    params = init
    trace = EmTrace()
    trace.params_path.append(params)
    trace.loglik_path.append(observed_loglik_freq(params, sample))

    if np.all(sample.counts == sample.counts[0]):
        # Zero-variance counts have no interior optimum: the likelihood only
        # climbs toward the degenerate Poisson limit, so flag instead of
        # chasing the ridge.
        trace.converged = False
        trace.iterations = 0
        return params, trace

    for iteration in range(1, int(opts.max_iters) + 1):
        tau = e_step_freq(params, sample)
        try:
            new_params = m_step_freq(params, sample, tau, solve_opts)
        except SolverError:
            trace.converged = False
            trace.iterations = iteration - 1
            return params, trace
        new_ll = observed_loglik_freq(new_params, sample)
        trace.params_path.append(new_params)
        trace.loglik_path.append(new_ll)
        trace.iterations = iteration

        delta = max(
            abs(new_params.alpha1 - params.alpha1),
            abs(new_params.alpha2 - params.alpha2),
            abs(new_params.beta - params.beta),
            abs(new_params.p - params.p),
        )
        ll_moved = abs(new_ll - trace.loglik_path[-2])
        params = new_params
        if delta < opts.tol or ll_moved < opts.loglik_tol:
            trace.converged = True
            return params, trace

    trace.converged = False
    return params, trace


def moment_init_freq(sample: CountSample) -> FreqParams:
    """Deterministic moment-based starting point for :func:`fit_freq`.

    Splits the sample at the midpoint between the two tallest histogram
    peaks (median when no clear second peak exists), matches a Negative
    Binomial mean and variance within each part under a shared rate, and
    takes p as the low part's share. Requires overdispersion: the mixture
    cannot produce variance at or below the mean.
    """
    n = sample.counts.astype(float)
    m = sample.m
    if m < 4:
        raise ValueError("moment initialization needs at least 4 periods")
    mean = float(n.mean())
    var = float(n.var(ddof=1))
    if var <= mean:
        raise ValueError(
            "sample variance must exceed the mean (overdispersion); "
            f"got mean {mean:.4g}, variance {var:.4g}. A mixed Poisson model "
            "cannot fit underdispersed counts."
        )

    split = _histogram_split(n)
    low = n[n <= split]
    high = n[n > split]
    if low.size < 2 or high.size < 2:
        # No usable bimodal structure: fall back to a mild generic split.
        beta = mean / (var - mean)
        alpha1 = beta * mean
        return FreqParams(alpha1=alpha1, alpha2=max(0.1 * alpha1, 0.1), beta=beta, p=0.5)

    beta = _shared_rate(low, high, fallback=mean / (var - mean))
    shape_lo = max(beta * float(low.mean()), 1e-3)
    shape_hi = beta * float(high.mean())
    return FreqParams(
        alpha1=shape_lo,
        alpha2=max(shape_hi - shape_lo, 0.1),
        beta=beta,
        p=low.size / m,
    )


def _histogram_split(n: np.ndarray) -> float:
    """Midpoint between the two tallest histogram peaks, or the median."""
    bins = max(4, int(round(math.sqrt(n.size))))
    hist, edges = np.histogram(n, bins=bins)
    centers = 0.5 * (edges[:-1] + edges[1:])
    peaks = [
        i
        for i in range(len(hist))
        if hist[i] > 0
        and (i == 0 or hist[i] >= hist[i - 1])
        and (i == len(hist) - 1 or hist[i] >= hist[i + 1])
    ]
    peaks.sort(key=lambda i: hist[i], reverse=True)
    if len(peaks) >= 2 and abs(peaks[0] - peaks[1]) > 1:
        return float(0.5 * (centers[peaks[0]] + centers[peaks[1]]))
    return float(np.median(n))


def _shared_rate(low: np.ndarray, high: np.ndarray, fallback: float) -> float:
    """Common Negative Binomial rate from the parts' overdispersion ratios.

    For a single NB, variance/mean = 1 + 1/beta. Each part with variance
    above its mean votes with its size; if neither qualifies the whole-sample
    rate is used.
    """
    votes = []
    for part in (low, high):
        pm = float(part.mean())
        pv = float(part.var(ddof=1)) if part.size > 1 else 0.0
        if pv > pm > 0.0:
            votes.append((part.size, pm / (pv - pm)))
    if not votes:
        return max(fallback, 1e-8)
    total = sum(w for w, _ in votes)
    return sum(w * b for w, b in votes) / total
