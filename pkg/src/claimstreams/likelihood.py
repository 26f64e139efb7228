"""Evaluation of the global likelihood and the joint interarrival/severity law.

The global likelihood over per-period records factorizes into the count part
and the severity part because claim sizes are independent of counts. The
joint (interarrival, severity) density does not factorize: both coordinates
load on the latent split rate, the random share of claims carried by the
historical stream. Its continuous part integrates over the split rate's Beta
law by Gauss-Jacobi quadrature; its atom (split rate exactly 1, the
unforeseeable stream dormant) pairs the exponential severity with the
lower-shape Pareto interarrival. Conditional on the split rate being interior
both streams are live, so the interarrival clock runs at the summed intensity
and its marginal is the higher-shape Pareto; that choice makes the severity
marginal collapse back to the unconditional mixture.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from ._validation import require_nonnegative, require_positive
from .distributions import nb_mixture_log_pmf, severity_mixture_log_pdf
from .params import FullParams, PeriodRecord


def global_loglik(params: FullParams, data: list[PeriodRecord]) -> float:
    """Log-likelihood of per-period counts and their claim amounts.

    Every period must carry exactly as many amounts as its count (empty for
    zero-claim periods). Equals the frequency log-likelihood plus the
    severity log-likelihood of the pooled amounts.
    """
    if not data:
        raise ValueError("data must contain at least one period")
    total = 0.0
    for idx, record in enumerate(data):
        if record.severities is None and record.count > 0:
            raise ValueError(
                f"period {idx} has count {record.count} but no claim amounts; "
                "the global likelihood needs both"
            )
        total += nb_mixture_log_pmf(params.freq, record.count)
        for y in record.severities or ():
            total += severity_mixture_log_pdf(params.sev, y)
    return total


@lru_cache(maxsize=64)
def _jacobi_rule(nodes: int, alpha1: float, alpha2: float):
    """Nodes on (0, 1) and normalized weights for the Beta(alpha1, alpha2) law."""
    x, w = roots_jacobi(nodes, alpha2 - 1.0, alpha1 - 1.0)
    return 0.5 * (x + 1.0), w / w.sum()


def _beta_expectation(func, alpha1: float, alpha2: float, nodes: int) -> float:
    """E[func(X)] for X ~ Beta(alpha1, alpha2) by Gauss-Jacobi quadrature.

    Under xi = (1 + x) / 2 the Beta weight is exactly the Jacobi weight
    (1 - x)^(alpha2 - 1) (1 + x)^(alpha1 - 1), so endpoint singularities
    (shapes below 1) are built into the rule and polynomial integrands of
    degree below 2 * nodes are integrated exactly. The weights are
    normalized to sum to 1, making E[1] exact. ``func`` must be vectorized.
    """
    if nodes < 4:
        raise ValueError("need at least 4 quadrature nodes")
    xi, weights = _jacobi_rule(nodes, float(alpha1), float(alpha2))
    return float(np.dot(weights, func(xi)))


def joint_ty_log_density(
    params: FullParams, t: float, y: float, quad_nodes: int = 64
) -> float:
    """Log density of one (interarrival time, claim size) pair.

    The dormant-stream atom contributes p * Exp(y; mu) * Pareto(t; alpha1,
    beta); the continuous part integrates the split-rate-conditional severity
    [xi * Exp + (1 - xi) * Pareto] against Beta(alpha1, alpha2), times the
    summed-intensity interarrival Pareto(t; alpha1 + alpha2, beta), weighted
    1 - p. Needs at least 4 quadrature nodes.
    """
    require_nonnegative("t", t)
    require_positive("y", y)
    if quad_nodes < 4:
        raise ValueError("quad_nodes must be at least 4")
    t = float(t)
    y = float(y)
    a1, a2, beta, p = params.freq.as_tuple()
    mu, delta, sigma, _ = params.sev.as_tuple()

    log_f = math.log(mu) - mu * y
    log_g = math.log(delta) - math.log(sigma) - (delta + 1.0) * math.log1p(y / sigma)

    def pareto_t_log(shape: float) -> float:
        return math.log(shape) - math.log(beta) - (shape + 1.0) * math.log1p(t / beta)

    log_atom = (math.log(p) if p > 0 else -math.inf) + log_f + pareto_t_log(a1)
    if p == 1.0:
        return float(log_atom)

    # Severity density conditional on an interior split rate, averaged over
    # the Beta law; scaled by exp(-log_scale) to keep the quadrature tame.
    log_scale = max(log_f, log_g)

    def cond_density(xi: np.ndarray) -> np.ndarray:
        return xi * math.exp(log_f - log_scale) + (1.0 - xi) * math.exp(log_g - log_scale)

    avg = _beta_expectation(cond_density, a1, a2, quad_nodes)
    log_cont = math.log1p(-p) + math.log(avg) + log_scale + pareto_t_log(a1 + a2)
    return float(np.logaddexp(log_atom, log_cont))


def joint_sample_loglik(params: FullParams, pairs, quad_nodes: int = 64) -> float:
    """Sum of :func:`joint_ty_log_density` over (t, y) pairs.

    Each pair is integrated separately; the product over claims cannot be
    pulled inside the split-rate integral.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("pairs must be non-empty")
    return sum(joint_ty_log_density(params, t, y, quad_nodes) for t, y in pairs)
