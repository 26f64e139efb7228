"""Shared parameter sets and helpers for the test suite."""

import numpy as np

import claimstreams as cs

# Estimates fitted to a real quarterly claim-count series; the realistic
# scale (shapes near 100, counts in the thousands) stresses the log-space
# code paths.
REF_FREQ = cs.FreqParams(97.55820446, 30.14706672, 0.01978072, 0.5929959)

# Small round-number set where the premium quantities have hand-checkable
# values (prior frequency mean 6.8, severity mean 1.3, product 8.84).
DEMO_FREQ = cs.FreqParams(3.0, 1.0, 0.5, 0.6)
DEMO_SEV = cs.SevParams(1.0, 2.0, 0.5, 0.9)

# Severity truth used by the recovery and consistency studies.
SEV_TRUTH = cs.SevParams(1.0, 2.0, 0.5, 0.9039196)
SEV_START = cs.SevParams(1.5, 2.5, 0.2, 0.9039196)


def random_freq_params(rng: np.random.Generator) -> cs.FreqParams:
    return cs.FreqParams(
        alpha1=float(rng.uniform(0.3, 40.0)),
        alpha2=float(rng.uniform(0.3, 20.0)),
        beta=float(rng.uniform(0.05, 5.0)),
        p=float(rng.uniform(0.02, 0.98)),
    )


def random_sev_params(rng: np.random.Generator) -> cs.SevParams:
    return cs.SevParams(
        mu=float(rng.uniform(0.2, 4.0)),
        delta=float(rng.uniform(0.3, 8.0)),
        sigma=float(rng.uniform(0.1, 5.0)),
        nu=float(rng.uniform(0.02, 0.98)),
    )


def pattern_records(counts, cumulative_amounts):
    """Build period records for given counts and a cumulative severity column.

    Each period's increment is split evenly over its claims; the premiums
    depend on the history only through the cumulative sums, so the split is
    immaterial.
    """
    records = []
    prev = 0.0
    for count, cum in zip(counts, cumulative_amounts):
        inc = cum - prev
        prev = cum
        if count == 0:
            records.append(cs.PeriodRecord(0, ()))
        else:
            records.append(cs.PeriodRecord(count, tuple([inc / count] * count)))
    return records


# Counts follow the repeating (0, 2, 1) pattern; the amounts column is the
# cumulative claim total after each period.
PATTERN_COUNTS = (0, 2, 1) * 4
PATTERN_CUM_AMOUNTS = (0.0, 2.52, 3.98, 3.98, 6.60, 8.07, 8.07, 10.59, 11.82, 11.82, 14.50, 15.83)
