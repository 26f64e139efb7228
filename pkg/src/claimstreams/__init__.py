"""Two-stream mixed Poisson claim modelling with exact credibility premiums.

A portfolio's claims are modelled as the superposition of a historical stream
(always present, Gamma-distributed intensity) and an unforeseeable stream
(dormant with probability p). Counts are then a two-component Negative
Binomial mixture and claim sizes an exponential/Pareto mixture. The package
fits both mixtures by EM, computes the exact Bayesian posterior premiums per
rating period, tests fit quality, and simulates scenarios and surplus paths.
"""

from .distributions import (
    freq_mean,
    gamma_mixture_prior_log_pdf,
    interarrival_mixture_log_pdf,
    nb_mixture_cdf,
    nb_mixture_log_pmf,
    sample_counts,
    sample_severities,
    sev_mean,
    severity_mixture_log_pdf,
)
from .estimators import FrequencyMixture, SeverityMixture
from .freq_em import (
    e_step_freq,
    fit_freq,
    m_step_freq,
    moment_init_freq,
    observed_loglik_freq,
    q_value_freq,
)
from .gof import GofReport, chisq_test, gof_report, ks_test
from .likelihood import global_loglik, joint_sample_loglik, joint_ty_log_density
from .params import (
    ClaimHistory,
    CountSample,
    EmOptions,
    EmTrace,
    FreqParams,
    FullParams,
    PeriodRecord,
    SeveritySample,
    SevParams,
)
from .premium import (
    PosteriorFreq,
    PosteriorSev,
    PremiumQuote,
    log_G,
    log_G_asymptote,
    log_phi,
    posterior_freq,
    posterior_mean_quadrature,
    posterior_sev,
    posterior_sev_mean_quadrature,
    premium_combined,
    premium_freq,
    premium_sev,
)
from .sev_em import (
    e_step_sev,
    fit_sev,
    m_step_sev,
    nu_from_freq,
    observed_loglik_sev,
)
from .simulate import (
    ScenarioSpec,
    SurplusConfig,
    SurplusPath,
    generate_scenario,
    premium_evolution,
    simulate_surplus,
)
from .solver import SolveOptions, SolveReport, SolverError, solve_system
from .special_math import (
    digamma,
    kolmogorov_sf,
    log_beta,
    log_gamma,
    reg_incomplete_gamma_upper,
)

__version__ = "0.1.0"

__all__ = [
    "ClaimHistory",
    "CountSample",
    "EmOptions",
    "EmTrace",
    "FreqParams",
    "FrequencyMixture",
    "FullParams",
    "GofReport",
    "PeriodRecord",
    "PosteriorFreq",
    "PosteriorSev",
    "PremiumQuote",
    "ScenarioSpec",
    "SeverityMixture",
    "SeveritySample",
    "SevParams",
    "SolveOptions",
    "SolveReport",
    "SolverError",
    "SurplusConfig",
    "SurplusPath",
    "chisq_test",
    "digamma",
    "e_step_freq",
    "e_step_sev",
    "fit_freq",
    "fit_sev",
    "freq_mean",
    "gamma_mixture_prior_log_pdf",
    "generate_scenario",
    "global_loglik",
    "gof_report",
    "interarrival_mixture_log_pdf",
    "joint_sample_loglik",
    "joint_ty_log_density",
    "kolmogorov_sf",
    "ks_test",
    "log_G",
    "log_G_asymptote",
    "log_beta",
    "log_gamma",
    "log_phi",
    "m_step_freq",
    "m_step_sev",
    "moment_init_freq",
    "nb_mixture_cdf",
    "nb_mixture_log_pmf",
    "nu_from_freq",
    "observed_loglik_freq",
    "observed_loglik_sev",
    "posterior_freq",
    "posterior_mean_quadrature",
    "posterior_sev",
    "posterior_sev_mean_quadrature",
    "premium_combined",
    "premium_evolution",
    "premium_freq",
    "premium_sev",
    "q_value_freq",
    "reg_incomplete_gamma_upper",
    "sample_counts",
    "sample_severities",
    "sev_mean",
    "severity_mixture_log_pdf",
    "simulate_surplus",
    "solve_system",
]
