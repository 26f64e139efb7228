"""Parameter sets, data samples, and EM bookkeeping types.

The model superposes two claim streams. The historical stream has a
Gamma(alpha1, beta) random intensity; the unforeseeable stream's intensity is
zero with probability p and Gamma(alpha2, beta) otherwise, with the rate beta
shared. Severities are an exponential/Pareto mixture with weight nu on the
exponential part. Everything downstream (densities, posteriors, premiums)
depends on data only through sufficient statistics, which :class:`ClaimHistory`
accumulates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import (
    as_count_array,
    as_severity_array,
    require_count,
    require_nonnegative,
    require_positive,
    require_unit_interval,
)


@dataclass(frozen=True)
class FreqParams:
    """Frequency-side parameters of the two-stream count model.

    Parameters
    ----------
    alpha1 : float
        Gamma shape of the historical stream's intensity. Positive.
    alpha2 : float
        Gamma shape of the unforeseeable stream's intensity, conditional on
        that stream being active. Positive.
    beta : float
        Gamma rate shared by both intensities. Positive.
    p : float
        Probability that the unforeseeable stream is dormant (intensity zero).
        In [0, 1].
    """

    alpha1: float
    alpha2: float
    beta: float
    p: float

    def __post_init__(self) -> None:
        require_positive("alpha1", self.alpha1)
        require_positive("alpha2", self.alpha2)
        require_positive("beta", self.beta)
        require_unit_interval("p", self.p)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha1, self.alpha2, self.beta, self.p)


@dataclass(frozen=True)
class SevParams:
    """Severity-side parameters of the claim-size mixture.

    Parameters
    ----------
    mu : float
        Rate of the exponential branch (historical claims). Positive.
    delta : float
        Shape of the Pareto branch. Positive; the branch mean is infinite
        when delta <= 1.
    sigma : float
        Scale of the Pareto branch. Positive.
    nu : float
        Mixture weight on the exponential branch. In [0, 1].
    """

    mu: float
    delta: float
    sigma: float
    nu: float

    def __post_init__(self) -> None:
        require_positive("mu", self.mu)
        require_positive("delta", self.delta)
        require_positive("sigma", self.sigma)
        require_unit_interval("nu", self.nu)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.mu, self.delta, self.sigma, self.nu)


@dataclass(frozen=True)
class FullParams:
    """Frequency and severity parameters together (the model's seven freedoms plus nu)."""

    freq: FreqParams
    sev: SevParams


@dataclass(frozen=True)
class CountSample:
    """Per-period claim counts, one entry per rating period.

    The sample size ``m`` is the number of periods. At least two periods are
    required; a constant sample is accepted but leads to a degenerate fit.
    """

    counts: np.ndarray

    def __post_init__(self) -> None:
        arr = as_count_array(self.counts)
        if arr.size < 2:
            raise ValueError("need at least two periods of counts")
        object.__setattr__(self, "counts", arr)

    @property
    def m(self) -> int:
        return int(self.counts.size)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class SeveritySample:
    """Pooled individual claim amounts, all periods concatenated."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = as_severity_array(self.values)
        if arr.size < 2:
            raise ValueError("need at least two claim amounts")
        object.__setattr__(self, "values", arr)

    @property
    def m_star(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class EmOptions:
    """Stopping rules for the EM loops.

    tol is the max-norm tolerance on the parameter vector between iterations;
    loglik_tol stops the loop when the observed-data log-likelihood moves less
    than this, so tiny oscillations terminate.
    """

    tol: float = 1e-3
    max_iters: int = 10000
    loglik_tol: float = 1e-9

    def __post_init__(self) -> None:
        require_positive("tol", self.tol)
        require_positive("loglik_tol", self.loglik_tol)
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class EmTrace:
    """Per-iteration record of an EM run.

    ``params_path`` holds the parameter set after every iteration (index 0 is
    the initial point); ``loglik_path`` the observed-data log-likelihood at the
    same points. The log-likelihood path is non-decreasing up to 1e-9 slack.
    """

    params_path: list = field(default_factory=list)
    loglik_path: list[float] = field(default_factory=list)
    converged: bool = False
    iterations: int = 0


@dataclass(frozen=True)
class PeriodRecord:
    """One rating period: its claim count and, optionally, the claim amounts.

    ``severities`` may be None for frequency-only data. When present its
    length must equal ``count``.
    """

    count: int
    severities: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        require_count("count", self.count)
        if self.severities is not None:
            sev = tuple(float(s) for s in self.severities)
            if len(sev) != self.count:
                raise ValueError(
                    f"period has count {self.count} but {len(sev)} claim amounts"
                )
            if any(s <= 0.0 or not np.isfinite(s) for s in sev):
                raise ValueError("claim amounts must be positive and finite")
            object.__setattr__(self, "severities", sev)


@dataclass(frozen=True)
class ClaimHistory:
    """Observed history plus the sufficient statistics everything depends on.

    m is the number of observed periods, sum_n the total claim count, m_star
    the number of recorded claim amounts, and sum_y their total. When every
    period carries full severity data, m_star == sum_n.
    """

    periods: tuple[PeriodRecord, ...]
    m: int
    sum_n: int
    m_star: int
    sum_y: float

    @classmethod
    def from_records(cls, records) -> "ClaimHistory":
        records = tuple(records)
        m = len(records)
        sum_n = sum(r.count for r in records)
        sevs = [s for r in records if r.severities is not None for s in r.severities]
        return cls(
            periods=records,
            m=m,
            sum_n=sum_n,
            m_star=len(sevs),
            sum_y=float(sum(sevs)),
        )

    @classmethod
    def empty(cls) -> "ClaimHistory":
        return cls(periods=(), m=0, sum_n=0, m_star=0, sum_y=0.0)

    def __post_init__(self) -> None:
        require_count("m", self.m)
        require_count("sum_n", self.sum_n)
        require_count("m_star", self.m_star)
        require_nonnegative("sum_y", self.sum_y)

    @property
    def has_severities(self) -> bool:
        return self.m_star > 0 or self.sum_n == 0
