"""Scenario generation and the continuous-time surplus process.

Scenarios replay a fixed claim-count pattern (for premium-evolution studies)
with severities either drawn from the model or pinned near the no-data quote.
The surplus process pays claims from a mixed Poisson stream and collects
premium continuously at a rate proportional to the posterior mean intensity,
re-estimated as claims arrive; with enough data the rate approaches the true
intensity, which is what makes the experience-rated income fair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import require_nonnegative, require_positive
from .distributions import _sample_severities_with, sev_mean
from .params import ClaimHistory, FreqParams, PeriodRecord, SevParams
from .premium import PremiumQuote, _inv_one_plus_exp, premium_combined, premium_sev
from .special_math import log_beta

_SEVERITY_FLOOR = 1e-6


@dataclass(frozen=True)
class ScenarioSpec:
    """A deterministic claim-count script with a severity policy.

    ``pattern`` is cycled over ``periods``. severity_mode "model_draw"
    samples amounts from the severity mixture; "prior_mean_plus_noise" uses
    the no-data severity quote plus Normal(0, noise_sd) noise, floored at a
    small positive value.
    """

    pattern: tuple[int, ...]
    periods: int
    severity_mode: str = "model_draw"
    noise_sd: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.pattern:
            raise ValueError("pattern must be non-empty")
        if any(int(c) != c or c < 0 for c in self.pattern):
            raise ValueError("pattern entries must be nonnegative integers")
        if int(self.periods) < 1:
            raise ValueError("periods must be positive")
        if self.severity_mode not in ("model_draw", "prior_mean_plus_noise"):
            raise ValueError(
                f"unknown severity_mode {self.severity_mode!r}; "
                "use 'model_draw' or 'prior_mean_plus_noise'"
            )
        require_nonnegative("noise_sd", self.noise_sd)
        object.__setattr__(self, "pattern", tuple(int(c) for c in self.pattern))


@dataclass(frozen=True)
class SurplusConfig:
    """Starting capital, premium loading, horizon, and integration step."""

    initial_surplus: float
    loading_factor: float
    horizon: float
    dt: float

    def __post_init__(self) -> None:
        require_nonnegative("initial_surplus", self.initial_surplus)
        require_nonnegative("loading_factor", self.loading_factor)
        require_positive("horizon", self.horizon)
        require_positive("dt", self.dt)
        if self.dt > self.horizon / 100.0:
            raise ValueError("dt must be at most horizon / 100")


@dataclass
class SurplusPath:
    """One simulated surplus trajectory with its claim record.

    ``surplus`` holds the capital at each time in ``times``; ruin is the
    first time the surplus goes negative (it can only do so at a claim).
    ``premium_income_total`` and ``claim_amounts`` make the cash-conservation
    identity checkable: final surplus = initial + income - total claims.
    """

    times: np.ndarray
    surplus: np.ndarray
    claim_times: np.ndarray
    claim_amounts: np.ndarray
    ruined: bool
    ruin_time: float | None
    premium_income_total: float


def generate_scenario(
    freq: FreqParams, sev: SevParams, spec: ScenarioSpec
) -> list[PeriodRecord]:
    """Materialize a scenario: cycled counts with per-policy severities."""
    rng = np.random.default_rng(int(spec.seed))
    base = None
    if spec.severity_mode == "prior_mean_plus_noise":
        base, _ = premium_sev(sev, 0, 0.0)
    records = []
    for k in range(int(spec.periods)):
        count = spec.pattern[k % len(spec.pattern)]
        if count == 0:
            records.append(PeriodRecord(count=0, severities=()))
            continue
        if spec.severity_mode == "model_draw":
            draws = _sample_severities_with(rng, sev, count)
        else:
            draws = np.maximum(base + spec.noise_sd * rng.standard_normal(count), _SEVERITY_FLOOR)
        records.append(PeriodRecord(count=count, severities=tuple(float(v) for v in draws)))
    return records


def premium_evolution(
    freq: FreqParams, sev: SevParams, records: list[PeriodRecord]
) -> list[PremiumQuote]:
    """Premium quotes before each period: index k uses the history through period k.

    Quote 0 is the prior (no data); with n periods of records the list has
    n + 1 entries. Quotes depend on the records only through the running
    sufficient statistics.
    """
    quotes = [premium_combined(freq, sev, ClaimHistory.empty())]
    for k in range(1, len(records) + 1):
        hist = ClaimHistory.from_records(records[:k])
        quotes.append(premium_combined(freq, sev, hist))
    return quotes


def _posterior_intensity(freq: FreqParams, exposure: float, claims: int) -> float:
    """Posterior mean intensity with continuous exposure in place of the period count."""
    a1, a2, beta, p = freq.as_tuple()
    if p == 0.0:
        w = 0.0
    elif p == 1.0:
        w = 1.0
    else:
        log_g = (
            math.log1p(-p)
            - math.log(p)
            + log_beta(a1, a2)
            - log_beta(claims + a1, a2)
            + a2 * (math.log(beta) - math.log(beta + exposure))
        )
        w = _inv_one_plus_exp(log_g)
    return (w * (claims + a1) + (1.0 - w) * (claims + a1 + a2)) / (beta + exposure)


def simulate_surplus(
    freq: FreqParams, sev: SevParams, cfg: SurplusConfig, seed: int
) -> SurplusPath:
    """Simulate one surplus path under experience-rated premium income.

    Draws the latent intensity from the two-Gamma prior, claim times from a
    Poisson clock at that intensity, and amounts from the severity mixture.
    Premium accrues at (1 + loading) * E[claim size] times the posterior mean
    intensity given the claims so far, integrated by trapezoid on a dt grid
    split exactly at claim instants (the posterior jumps there). Requires a
    finite severity mean, so the Pareto shape must exceed 1.
    """
    a1, a2, beta, p = freq.as_tuple()
    rate = (1.0 + cfg.loading_factor) * sev_mean(sev)
    rng = np.random.default_rng(int(seed))

    shape = a1 if rng.random() < p else a1 + a2
    lam = rng.standard_gamma(shape) / beta

    claim_times = []
    t = 0.0
    while True:
        t += rng.exponential(1.0 / lam) if lam > 0 else math.inf
        if t >= cfg.horizon:
            break
        claim_times.append(t)
    claim_times = np.asarray(claim_times)
    claim_amounts = _sample_severities_with(rng, sev, claim_times.size)

    # Evaluation grid: regular steps plus every claim instant.
    grid = np.unique(np.concatenate([
        np.arange(0.0, cfg.horizon, cfg.dt),
        [cfg.horizon],
        claim_times,
    ]))

    times = []
    surplus = []
    income = 0.0
    paid = 0.0
    claims_seen = 0
    ruined = False
    ruin_time = None

    lam_left = _posterior_intensity(freq, 0.0, 0)
    for i, s in enumerate(grid):
        if i > 0:
            left = grid[i - 1]
            lam_right = _posterior_intensity(freq, s, claims_seen)
            income += 0.5 * (lam_left + lam_right) * (s - left)
            lam_left = lam_right
        # Claims land exactly on grid points; settle any that occur at s.
        while claims_seen < claim_times.size and claim_times[claims_seen] <= s:
            paid += claim_amounts[claims_seen]
            claims_seen += 1
            # The posterior for the segment ahead uses the updated count.
            lam_left = _posterior_intensity(freq, s, claims_seen)
        u = cfg.initial_surplus + rate * income - paid
        times.append(s)
        surplus.append(u)
        if u < 0.0 and not ruined:
            ruined = True
            ruin_time = float(s)

    return SurplusPath(
        times=np.asarray(times),
        surplus=np.asarray(surplus),
        claim_times=claim_times,
        claim_amounts=claim_amounts,
        ruined=ruined,
        ruin_time=ruin_time,
        premium_income_total=rate * income,
    )
