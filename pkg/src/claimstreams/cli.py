"""Command-line surface: fit, quote, simulate, and test from files.

Exit codes are a stable scripting contract: 0 success, 1 input or parse
error, 2 non-convergence (the model file is still written, flagged). The CLI
never plots; it prints tables and writes tidy CSV/JSON series for external
tooling.
"""

from __future__ import annotations

import json
import sys

import click

from . import freq_em, sev_em
from .estimators import default_severity_init
from .gof import gof_report
from .model_io import (
    ModelIOError,
    build_history,
    load_model,
    pooled_severities,
    read_claims_csv,
    read_counts_csv,
    save_model,
    write_scenario_csv,
    write_surplus_csv,
)
from .params import EmOptions, FreqParams, SevParams
from .simulate import (
    ScenarioSpec,
    SurplusConfig,
    generate_scenario,
    premium_evolution,
    simulate_surplus,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_CONVERGENCE = 2


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_INPUT)


@click.group()
def main() -> None:
    """Two-stream claim model: EM fitting, credibility premiums, simulation."""


@main.command("fit-freq")
@click.option("--counts", "counts_path", required=True, type=click.Path(), help="Counts CSV (period,count).")
@click.option("--init", "init_spec", default="moments", show_default=True,
              help="'moments' or a JSON file with alpha1, alpha2, beta, p.")
@click.option("--tol", default=1e-3, show_default=True, help="Parameter-change tolerance.")
@click.option("--max-iters", default=10000, show_default=True)
@click.option("-o", "--output", "out_path", required=True, type=click.Path(), help="Model JSON to write.")
def fit_freq_cmd(counts_path, init_spec, tol, max_iters, out_path):
    """Fit the count mixture to per-period claim counts by EM."""
    try:
        _, sample = read_counts_csv(counts_path)
    except ModelIOError as err:
        _fail(str(err))
    try:
        if init_spec == "moments":
            start = freq_em.moment_init_freq(sample)
        else:
            start = _freq_params_from_json(init_spec)
    except (ModelIOError, ValueError) as err:
        _fail(str(err))

    opts = EmOptions(tol=tol, max_iters=max_iters)
    params, trace = freq_em.fit_freq(sample, start, opts)
    meta = {
        "frequency": {
            "iterations": trace.iterations,
            "converged": trace.converged,
            "final_loglik": trace.loglik_path[-1],
            "tol": tol,
        }
    }
    save_model(out_path, freq=params, fit_meta=meta)
    click.echo(
        f"fit-freq: {trace.iterations} iterations, "
        f"log-likelihood {trace.loglik_path[-1]:.6f}, "
        f"{'converged' if trace.converged else 'NOT converged'}"
    )
    if not trace.converged:
        sys.exit(EXIT_NO_CONVERGENCE)


@main.command("fit-sev")
@click.option("--claims", "claims_path", required=True, type=click.Path(), help="Claims CSV (period,claim_id,amount).")
@click.option("--model", "model_path", required=True, type=click.Path(),
              help="Model JSON holding the fitted frequency parameters.")
@click.option("--estimate-nu", is_flag=True, help="Estimate the mixture weight instead of fixing it.")
@click.option("--init", "init_spec", default=None, type=click.Path(),
              help="JSON file with mu, delta, sigma, nu to start from.")
@click.option("--tol", default=1e-3, show_default=True)
@click.option("--max-iters", default=10000, show_default=True)
@click.option("-o", "--output", "out_path", required=True, type=click.Path())
def fit_sev_cmd(claims_path, model_path, estimate_nu, init_spec, tol, max_iters, out_path):
    """Fit the claim-size mixture by EM, linking its weight to the frequency fit."""
    try:
        by_period = read_claims_csv(claims_path)
        sample = pooled_severities(by_period)
        freq, old_sev, old_meta = load_model(model_path)
    except (ModelIOError, ValueError) as err:
        _fail(str(err))
    if freq is None and not estimate_nu:
        _fail(
            f"{model_path}: no frequency parameters; the severity weight nu is "
            "derived from them. Fit the frequency side first or pass --estimate-nu."
        )

    try:
        if init_spec is not None:
            start = _sev_params_from_json(init_spec)
        else:
            nu = sev_em.nu_from_freq(freq) if freq is not None else 0.5
            start = default_severity_init(sample, nu=nu)
    except (ModelIOError, ValueError) as err:
        _fail(str(err))

    opts = EmOptions(tol=tol, max_iters=max_iters)
    params, trace = sev_em.fit_sev(sample, start, estimate_nu, opts)
    meta = dict(old_meta)
    meta["severity"] = {
        "iterations": trace.iterations,
        "converged": trace.converged,
        "final_loglik": trace.loglik_path[-1],
        "tol": tol,
        "estimate_nu": estimate_nu,
    }
    save_model(out_path, freq=freq, sev=params, fit_meta=meta)
    click.echo(
        f"fit-sev: {trace.iterations} iterations, "
        f"log-likelihood {trace.loglik_path[-1]:.6f}, "
        f"{'converged' if trace.converged else 'NOT converged'}"
    )
    if not trace.converged:
        sys.exit(EXIT_NO_CONVERGENCE)


@main.command("premium")
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--history", "history_paths", multiple=True, type=click.Path(),
              help="Counts CSV, optionally followed by a claims CSV (repeat the flag).")
@click.option("--periods", "periods_cap", default=None, type=int, help="Use only the first k periods.")
@click.option("--emit", "emit", type=click.Choice(["csv", "json"]), default=None,
              help="Also write the series to --output in this format.")
@click.option("-o", "--output", "out_path", default=None, type=click.Path())
def premium_cmd(model_path, history_paths, periods_cap, emit, out_path):
    """Print the premium evolution over an observed history (period 0 = prior)."""
    try:
        freq, sev, _ = load_model(model_path)
    except ModelIOError as err:
        _fail(str(err))
    if freq is None or sev is None:
        _fail(f"{model_path}: premium needs both frequency and severity parameters")
    if not history_paths:
        _fail("premium needs --history with a counts CSV (and optionally a claims CSV)")
    if len(history_paths) > 2:
        _fail("--history takes at most two files: a counts CSV then a claims CSV")

    try:
        labels, counts = read_counts_csv(history_paths[0])
        claims = read_claims_csv(history_paths[1]) if len(history_paths) > 1 else None
        history = build_history(labels, counts, claims, strict=True)
    except ModelIOError as err:
        _fail(str(err))
    if claims is None:
        click.echo("warning: no claims file given; quoting frequency-only premiums", err=True)

    records = list(history.periods)
    if periods_cap is not None:
        records = records[: periods_cap]
    quotes = premium_evolution(freq, sev, records)

    rows = []
    cum_n = cum_y = 0.0
    rows.append((0, 0, 0.0, quotes[0]))
    for k, (record, quote) in enumerate(zip(records, quotes[1:]), start=1):
        cum_n += record.count
        cum_y += sum(record.severities or ())
        rows.append((k, int(cum_n), cum_y, quote))

    click.echo(f"{'period':>6} {'cum_claims':>10} {'cum_amount':>12} {'premium':>12}")
    for k, sn, sy, quote in rows:
        click.echo(f"{k:>6} {sn:>10} {sy:>12.4f} {quote.premium:>12.4f}")

    if emit:
        if out_path is None:
            _fail("--emit needs --output")
        series = [
            {
                "period": k,
                "cum_claims": sn,
                "cum_amount": sy,
                "freq_component": q.freq_component,
                "sev_component": q.sev_component,
                "premium": q.premium,
                "w": q.w,
                "omega": q.omega,
            }
            for k, sn, sy, q in rows
        ]
        if emit == "json":
            with open(out_path, "w") as fh:
                json.dump(series, fh, indent=2)
        else:
            import csv as _csv

            with open(out_path, "w", newline="") as fh:
                writer = _csv.DictWriter(fh, fieldnames=list(series[0]))
                writer.writeheader()
                writer.writerows(series)


@main.command("simulate")
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--spec", "spec_path", required=True, type=click.Path(),
              help="JSON: {\"mode\": \"scenario\"|\"surplus\", ...}.")
@click.option("-o", "--output", "out_path", required=True, type=click.Path())
def simulate_cmd(model_path, spec_path, out_path):
    """Write a scenario or a surplus path as CSV, per the JSON spec file."""
    try:
        freq, sev, _ = load_model(model_path)
    except ModelIOError as err:
        _fail(str(err))
    if freq is None or sev is None:
        _fail(f"{model_path}: simulate needs both frequency and severity parameters")
    try:
        with open(spec_path) as fh:
            doc = json.load(fh)
    except OSError as err:
        _fail(f"{spec_path}: cannot open: {err.strerror}")
    except json.JSONDecodeError as err:
        _fail(f"{spec_path}: not valid JSON: {err}")

    mode = doc.get("mode")
    try:
        if mode == "scenario":
            spec = ScenarioSpec(
                pattern=tuple(doc["pattern"]),
                periods=doc["periods"],
                severity_mode=doc.get("severity_mode", "model_draw"),
                noise_sd=doc.get("noise_sd", 0.1),
                seed=doc.get("seed", 0),
            )
            records = generate_scenario(freq, sev, spec)
            write_scenario_csv(out_path, records)
            click.echo(f"wrote {len(records)} periods to {out_path}")
        elif mode == "surplus":
            cfg = SurplusConfig(
                initial_surplus=doc["initial_surplus"],
                loading_factor=doc["loading_factor"],
                horizon=doc["horizon"],
                dt=doc["dt"],
            )
            path = simulate_surplus(freq, sev, cfg, seed=doc.get("seed", 0))
            write_surplus_csv(out_path, path)
            status = f"ruined at t={path.ruin_time:.4f}" if path.ruined else "no ruin"
            click.echo(f"wrote {path.times.size} points to {out_path} ({status})")
        else:
            _fail(f"{spec_path}: mode must be 'scenario' or 'surplus', got {mode!r}")
    except (KeyError, TypeError) as err:
        _fail(f"{spec_path}: missing or malformed field: {err}")
    except ValueError as err:
        _fail(f"{spec_path}: {err}")


@main.command("gof")
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--counts", "counts_path", required=True, type=click.Path())
@click.option("--fitted-params", "fitted_params", default=4, show_default=True,
              help="Parameters fitted on this same data (0 if the model is external).")
def gof_cmd(model_path, counts_path, fitted_params):
    """Goodness-of-fit of the model's count mixture against a counts file."""
    try:
        freq, _, _ = load_model(model_path)
        _, sample = read_counts_csv(counts_path)
    except ModelIOError as err:
        _fail(str(err))
    if freq is None:
        _fail(f"{model_path}: no frequency parameters to test")
    try:
        report = gof_report(freq, sample, fitted_param_count=fitted_params)
    except ValueError as err:
        _fail(str(err))
    click.echo(f"{'test':>12} {'statistic':>12} {'df':>4} {'p_value':>10}")
    click.echo(f"{'ks':>12} {report.ks_statistic:>12.6f} {'':>4} {report.ks_pvalue:>10.4g}")
    click.echo(
        f"{'chi_square':>12} {report.chisq_statistic:>12.6f} {report.chisq_df:>4} "
        f"{report.chisq_pvalue:>10.4g}"
    )


def _freq_params_from_json(path) -> FreqParams:
    doc = _load_json(path)
    try:
        return FreqParams(alpha1=doc["alpha1"], alpha2=doc["alpha2"], beta=doc["beta"], p=doc["p"])
    except (KeyError, TypeError) as err:
        raise ModelIOError(f"{path}: missing or malformed field: {err}") from None


def _sev_params_from_json(path) -> SevParams:
    doc = _load_json(path)
    try:
        return SevParams(mu=doc["mu"], delta=doc["delta"], sigma=doc["sigma"], nu=doc["nu"])
    except (KeyError, TypeError) as err:
        raise ModelIOError(f"{path}: missing or malformed field: {err}") from None


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as err:
        raise ModelIOError(f"{path}: cannot open: {err.strerror}") from None
    except json.JSONDecodeError as err:
        raise ModelIOError(f"{path}: not valid JSON: {err}") from None


if __name__ == "__main__":
    main()
