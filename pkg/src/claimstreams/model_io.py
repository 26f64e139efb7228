"""File formats: counts and claims CSVs, the model JSON, and series writers.

Models are stored as JSON (human-diffable, shortest round-trip floats);
bulk series go to CSV. Parse failures carry the offending line number so
CLI users can find the bad row.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .params import (
    ClaimHistory,
    CountSample,
    FreqParams,
    PeriodRecord,
    SeveritySample,
    SevParams,
)

FORMAT_VERSION = 1


class ModelIOError(Exception):
    """A file could not be read or parsed; the message says where and why."""


def read_counts_csv(path) -> tuple[list[int], CountSample]:
    """Read a counts file: header ``period,count``, unique integer periods.

    Returns the period labels (in file order) and the counts as a sample.
    """
    rows = _read_csv_rows(path, ("period", "count"))
    periods: list[int] = []
    counts: list[int] = []
    seen = set()
    for line_no, row in rows:
        period = _parse_int(path, line_no, "period", row["period"])
        count = _parse_int(path, line_no, "count", row["count"])
        if count < 0:
            raise ModelIOError(f"{path}: line {line_no}: count must be nonnegative, got {count}")
        if period in seen:
            raise ModelIOError(f"{path}: line {line_no}: duplicate period {period}")
        seen.add(period)
        periods.append(period)
        counts.append(count)
    if len(counts) < 2:
        raise ModelIOError(f"{path}: need at least two periods of counts")
    return periods, CountSample(np.asarray(counts))


def read_claims_csv(path) -> dict[int, list[float]]:
    """Read a claims file: header ``period,claim_id,amount``, positive amounts.

    Returns amounts grouped by period, preserving row order within a period.
    """
    rows = _read_csv_rows(path, ("period", "claim_id", "amount"))
    by_period: dict[int, list[float]] = {}
    seen = set()
    for line_no, row in rows:
        period = _parse_int(path, line_no, "period", row["period"])
        claim_id = row["claim_id"].strip()
        try:
            amount = float(row["amount"])
        except ValueError:
            raise ModelIOError(
                f"{path}: line {line_no}: amount is not a number: {row['amount']!r}"
            ) from None
        if not np.isfinite(amount) or amount <= 0.0:
            raise ModelIOError(
                f"{path}: line {line_no}: amount must be a positive number, got {amount}"
            )
        key = (period, claim_id)
        if key in seen:
            raise ModelIOError(
                f"{path}: line {line_no}: duplicate claim id {claim_id!r} in period {period}"
            )
        seen.add(key)
        by_period.setdefault(period, []).append(amount)
    if not by_period:
        raise ModelIOError(f"{path}: no claims found")
    return by_period


def pooled_severities(by_period: dict[int, list[float]]) -> SeveritySample:
    """Concatenate all periods' amounts into one severity sample."""
    values = [v for period in sorted(by_period) for v in by_period[period]]
    return SeveritySample(np.asarray(values, dtype=float))


def build_history(
    period_labels: list[int],
    counts: CountSample,
    claims_by_period: dict[int, list[float]] | None,
    strict: bool = True,
) -> ClaimHistory:
    """Join counts and claims into a history, checking per-period consistency.

    In strict mode a period whose claim amounts do not match its count is an
    error; without claims data the history is frequency-only.
    """
    records = []
    for label, count in zip(period_labels, counts.counts):
        count = int(count)
        if claims_by_period is None:
            records.append(PeriodRecord(count=count, severities=None))
            continue
        amounts = claims_by_period.get(label, [])
        if strict and len(amounts) != count:
            raise ModelIOError(
                f"period {label}: count is {count} but {len(amounts)} claim amounts recorded"
            )
        records.append(PeriodRecord(count=count, severities=tuple(amounts)) if len(amounts) == count
                       else PeriodRecord(count=count, severities=None))
    unmatched = set(claims_by_period or ()) - set(period_labels)
    if claims_by_period is not None and unmatched:
        raise ModelIOError(f"claims reference periods missing from the counts file: {sorted(unmatched)}")
    return ClaimHistory.from_records(records)


def save_model(path, freq: FreqParams | None = None, sev: SevParams | None = None,
               fit_meta: dict | None = None) -> None:
    """Write a model JSON with a format-version stamp."""
    doc = {
        "format_version": FORMAT_VERSION,
        "frequency": None if freq is None else {
            "alpha1": freq.alpha1, "alpha2": freq.alpha2, "beta": freq.beta, "p": freq.p,
        },
        "severity": None if sev is None else {
            "mu": sev.mu, "delta": sev.delta, "sigma": sev.sigma, "nu": sev.nu,
        },
        "fit": fit_meta or {},
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_model(path) -> tuple[FreqParams | None, SevParams | None, dict]:
    """Read a model JSON, checking the format version."""
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ModelIOError(f"{path}: file not found") from None
    except json.JSONDecodeError as err:
        raise ModelIOError(f"{path}: not valid JSON: {err}") from None
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelIOError(
            f"{path}: unsupported format_version {version!r} (expected {FORMAT_VERSION})"
        )
    freq = sev = None
    try:
        if doc.get("frequency") is not None:
            f = doc["frequency"]
            freq = FreqParams(alpha1=f["alpha1"], alpha2=f["alpha2"], beta=f["beta"], p=f["p"])
        if doc.get("severity") is not None:
            s = doc["severity"]
            sev = SevParams(mu=s["mu"], delta=s["delta"], sigma=s["sigma"], nu=s["nu"])
    except (KeyError, TypeError, ValueError) as err:
        raise ModelIOError(f"{path}: malformed parameter block: {err}") from None
    return freq, sev, doc.get("fit", {})


def write_scenario_csv(path, records) -> None:
    """Write scenario records: one row per claim, plus a row for empty periods.

    Columns are period, count, claim_id, amount; claim fields are blank on
    zero-claim rows.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["period", "count", "claim_id", "amount"])
        for k, record in enumerate(records):
            if record.count == 0:
                writer.writerow([k, 0, "", ""])
                continue
            for j, amount in enumerate(record.severities or ()):
                writer.writerow([k, record.count, j, repr(float(amount))])


def write_surplus_csv(path, sp) -> None:
    """Write a surplus path: time, surplus, and the claim amount if one landed."""
    claims = {float(t): float(a) for t, a in zip(sp.claim_times, sp.claim_amounts)}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "surplus", "claim_amount"])
        for t, u in zip(sp.times, sp.surplus):
            writer.writerow([repr(float(t)), repr(float(u)), claims.get(float(t), "")])


def _read_csv_rows(path, expected_header: tuple[str, ...]):
    try:
        fh = open(path, newline="")
    except OSError as err:
        raise ModelIOError(f"{path}: cannot open: {err.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ModelIOError(f"{path}: empty file") from None
        header = [h.strip().lower() for h in header]
        if header != list(expected_header):
            raise ModelIOError(
                f"{path}: line 1: expected header {','.join(expected_header)!r}, "
                f"got {','.join(header)!r}"
            )
        out = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(expected_header):
                raise ModelIOError(
                    f"{path}: line {line_no}: expected {len(expected_header)} fields, got {len(row)}"
                )
            out.append((line_no, dict(zip(expected_header, (c.strip() for c in row)))))
    return out


def _parse_int(path, line_no: int, field: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ModelIOError(
            f"{path}: line {line_no}: {field} is not an integer: {raw!r}"
        ) from None
