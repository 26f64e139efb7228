"""Estimator-style wrappers around the two EM fitters.

These follow the scikit-learn conventions: constructor arguments are stored
verbatim as hyperparameters, fitted state lives in trailing-underscore
attributes, ``fit`` returns ``self``, and ``get_params``/``set_params`` come
from ``BaseEstimator``. The functional API in ``freq_em``/``sev_em`` remains
the primitive layer; these classes add the familiar surface for pipelines
and grid use.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from . import freq_em, sev_em
from .distributions import _mixture_log_pmf_vec, _sev_log_pdf_vec
from .params import CountSample, EmOptions, FreqParams, SeveritySample, SevParams


class FrequencyMixture(BaseEstimator):
    """Two-component count mixture fitted by EM.

    Parameters
    ----------
    init : FreqParams or "moments", default "moments"
        Starting point for EM. The string selects the deterministic
        moment-based initialization.
    tol : float, default 1e-3
        Max-norm parameter-change tolerance.
    max_iters : int, default 10000
        EM iteration cap.
    loglik_tol : float, default 1e-9
        Log-likelihood stagnation tolerance.

    Attributes
    ----------
    params_ : FreqParams
        Fitted parameters.
    trace_ : EmTrace
        Per-iteration parameters and log-likelihoods.
    converged_ : bool
    n_iter_ : int
    loglik_ : float
        Observed-data log-likelihood at the fitted parameters.

    Examples
    --------
    >>> from claimstreams.distributions import sample_counts
    >>> from claimstreams.params import FreqParams
    >>> counts = sample_counts(FreqParams(3.0, 1.0, 0.5, 0.6), 500, seed=1)
    >>> model = FrequencyMixture().fit(counts)
    >>> 0.0 <= model.params_.p <= 1.0
    True
    """

    def __init__(self, init="moments", tol=1e-3, max_iters=10000, loglik_tol=1e-9):
        self.init = init
        self.tol = tol
        self.max_iters = max_iters
        self.loglik_tol = loglik_tol

    def fit(self, X, y=None):
        """Fit the mixture to a 1-d array of per-period claim counts."""
        sample = CountSample(np.asarray(X))
        if self.init == "moments":
            start = freq_em.moment_init_freq(sample)
        elif isinstance(self.init, FreqParams):
            start = self.init
        else:
            raise ValueError(
                f"init must be 'moments' or a FreqParams instance, got {self.init!r}"
            )
        opts = EmOptions(tol=self.tol, max_iters=self.max_iters, loglik_tol=self.loglik_tol)
        self.params_, self.trace_ = freq_em.fit_freq(sample, start, opts)
        self.converged_ = self.trace_.converged
        self.n_iter_ = self.trace_.iterations
        self.loglik_ = self.trace_.loglik_path[-1]
        return self

    def _check_is_fitted(self):
        if not hasattr(self, "params_"):
            raise ValueError("This FrequencyMixture instance is not fitted yet; call fit first.")

    def predict_proba(self, X):
        """Posterior probability per period of (dormant, active) membership."""
        self._check_is_fitted()
        tau = freq_em.e_step_freq(self.params_, CountSample(np.asarray(X)))
        return np.column_stack([tau, 1.0 - tau])

    def score_samples(self, X):
        """Log pmf of each count under the fitted mixture."""
        self._check_is_fitted()
        from ._validation import as_count_array

        return _mixture_log_pmf_vec(self.params_, as_count_array(X))

    def score(self, X, y=None):
        """Mean log pmf over the sample."""
        return float(np.mean(self.score_samples(X)))


class SeverityMixture(BaseEstimator):
    """Exponential/Pareto claim-size mixture fitted by EM.

    Parameters
    ----------
    init : SevParams or None, default None
        Starting point; None builds one from the sample (rate 1/mean,
        Pareto shape 2 with scale matched to the mean).
    estimate_nu : bool, default False
        Estimate the mixture weight instead of keeping it fixed.
    tol, max_iters, loglik_tol : see FrequencyMixture.

    Attributes
    ----------
    params_ : SevParams
    trace_ : EmTrace
    converged_ : bool
    n_iter_ : int
    loglik_ : float
    """

    def __init__(self, init=None, estimate_nu=False, tol=1e-3, max_iters=10000, loglik_tol=1e-9):
        self.init = init
        self.estimate_nu = estimate_nu
        self.tol = tol
        self.max_iters = max_iters
        self.loglik_tol = loglik_tol

    def fit(self, X, y=None):
        """Fit the mixture to a 1-d array of positive claim amounts."""
        sample = SeveritySample(np.asarray(X, dtype=float))
        if self.init is None:
            start = default_severity_init(sample)
        elif isinstance(self.init, SevParams):
            start = self.init
        else:
            raise ValueError(f"init must be None or a SevParams instance, got {self.init!r}")
        opts = EmOptions(tol=self.tol, max_iters=self.max_iters, loglik_tol=self.loglik_tol)
        self.params_, self.trace_ = sev_em.fit_sev(sample, start, self.estimate_nu, opts)
        self.converged_ = self.trace_.converged
        self.n_iter_ = self.trace_.iterations
        self.loglik_ = self.trace_.loglik_path[-1]
        return self

    def _check_is_fitted(self):
        if not hasattr(self, "params_"):
            raise ValueError("This SeverityMixture instance is not fitted yet; call fit first.")

    def predict_proba(self, X):
        """Posterior probability per claim of (exponential, Pareto) membership."""
        self._check_is_fitted()
        tau = sev_em.e_step_sev(self.params_, SeveritySample(np.asarray(X, dtype=float)))
        return np.column_stack([tau, 1.0 - tau])

    def score_samples(self, X):
        """Log density of each amount under the fitted mixture."""
        self._check_is_fitted()
        from ._validation import as_severity_array

        return _sev_log_pdf_vec(self.params_, as_severity_array(X))

    def score(self, X, y=None):
        """Mean log density over the sample."""
        return float(np.mean(self.score_samples(X)))


def default_severity_init(sample: SeveritySample, nu: float = 0.9) -> SevParams:
    """Starting point from sample moments: exponential rate 1/mean, Pareto
    shape 2 with the scale that matches the mean on that branch."""
    mean = float(sample.values.mean())
    return SevParams(mu=1.0 / mean, delta=2.0, sigma=mean, nu=nu)
