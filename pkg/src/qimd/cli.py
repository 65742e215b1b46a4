"""Command-line front-end: ``qimd {analytic,wp,mc,sweep,tables}``.

The configuration is one JSON document read from ``--config`` or standard
input; ``--seed``, ``--out`` and ``--format`` override the matching fields.
Results go to ``--out`` or standard output. Failures print a JSON object on
standard error and exit with

* 2 for configuration errors,
* 3 for numerical or consistency errors (including a failed MC check),
* 4 when a Monte-Carlo check is inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .analytics import scan_uncertainty, uncertainty_report, wp_phase_closed, wp_uncertainty_closed
from .config import ConfigError, RunConfig
from .exceptions import (
    ConsistencyError,
    DegenerateConfigurationError,
    RegimeViolationError,
    StationaryPointError,
)
from .fringe import ZeroContrastWarning, derive_fringe, detected_variance, fringe_mean
from .oracle.montecarlo import mc_distillation, mc_working_point, simulate_model_counts
from .tables import table_comparisons
from .working_point import minimize_phase_uncertainty, ratio_map, shot_noise_boundary

__all__ = ["main", "EXIT_OK", "EXIT_CONFIG", "EXIT_NUMERIC", "EXIT_INCONCLUSIVE"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_INCONCLUSIVE = 4

Z_THRESHOLD = 3.0
TABLE_TOLERANCE = 1e-9
WP_TOLERANCE = 1e-6


# -- formatting -----------------------------------------------------------


def _cell(value) -> str:
    if isinstance(value, np.generic):
        value = value.item()
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv_block(rows, columns, config_hash) -> str:
    buf = io.StringIO()
    buf.write(f"# config_hash={config_hash}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _companion(path: str, suffix: str) -> str:
    p = Path(path)
    return str(p.with_name(p.stem + suffix))


def _finite(x):
    return x if x is None or math.isfinite(x) else None


# -- subcommands ----------------------------------------------------------


def run_analytic(cfg: RunConfig, workers: int):
    model = derive_fringe(cfg.spec, cfg.noise)
    report = uncertainty_report(model, cfg.plan)
    values = report.to_dict()
    values["scanning"] = scan_uncertainty(model, cfg.plan) if cfg.plan.steps >= 3 else None
    values.update(
        amplitude=model.amplitude,
        contrast=model.contrast,
        xi=model.xi,
        noise_mean=model.noise_mean,
        steps=cfg.plan.steps,
        shot_noise=1.0 / cfg.spec.probe_photons if cfg.spec.probe_photons > 0 else None,
    )
    rows = [{"quantity": k, "value": values[k]} for k in sorted(values)]
    return {"values": values}, rows, ["quantity", "value"], EXIT_OK


def run_wp(cfg: RunConfig, workers: int):
    model = derive_fringe(cfg.spec, cfg.noise)
    numeric = minimize_phase_uncertainty(model, cfg.plan.steps)
    closed, _ = wp_uncertainty_closed(model, cfg.plan)
    rel = abs(numeric.variance - closed) / closed
    values = {
        "phase": numeric.phase,
        "variance": numeric.variance,
        "at_boundary": numeric.at_boundary,
        "iterations": numeric.iterations,
        "closed_form_variance": closed,
        "closed_form_phase": wp_phase_closed(model),
        "relative_difference": rel,
        "steps": cfg.plan.steps,
    }
    if rel > WP_TOLERANCE:
        raise ConsistencyError(f"numerical and closed-form working point differ by {rel:.3g}")
    rows = [{"quantity": k, "value": values[k]} for k in sorted(values)]
    return {"values": values}, rows, ["quantity", "value"], EXIT_OK


def _check_row(name, quantity, empirical, stderr, analytic, samples, status=None, note=None):
    z = None if stderr is None or stderr == 0 else (empirical - analytic) / stderr
    if status is None:
        status = "pass" if z is not None and abs(z) <= Z_THRESHOLD else "fail"
    return {
        "check": name,
        "quantity": quantity,
        "empirical": empirical,
        "stderr": stderr,
        "analytic": analytic,
        "z": z,
        "samples": samples,
        "status": status,
        "note": note,
    }


def _inconclusive(name, quantity, exc):
    return _check_row(name, quantity, None, None, None, None, status="inconclusive", note=str(exc))


def run_mc(cfg: RunConfig, workers: int):
    model = derive_fringe(cfg.spec, cfg.noise)
    mc = cfg.mc
    seed = mc.seed
    phase = math.pi / 2 if mc.phase is None else mc.phase
    checks = []

    record = simulate_model_counts(model, [phase], mc.count_shots, seed, mc.count_method, workers)
    est = record.estimates()[0]
    checks.append(_check_row("counts", "mean", est.mean, est.stderr_mean, float(fringe_mean(model, phase)), est.samples))
    checks.append(
        _check_row("counts", "variance", est.variance, est.stderr_variance, float(detected_variance(model, phase)),
                   est.samples)
    )

    if cfg.plan.steps >= 3:
        try:
            res = mc_distillation(cfg.spec, cfg.noise, cfg.plan, mc.shots, mc.trials, seed, mc.true_phase,
                                  mc.method, workers)
            e = res.estimate
            checks.append(_check_row("distillation", "phase_variance", e.variance, e.stderr_variance, res.predicted,
                                     e.samples, note=f"failures={res.failures}"))
        except RegimeViolationError as exc:
            checks.append(_inconclusive("distillation", "phase_variance", exc))

    try:
        wp = minimize_phase_uncertainty(model, 1)
        if wp.at_boundary:
            raise RegimeViolationError("working point lies on the fringe extremum; inversion is ill-conditioned")
        res = mc_working_point(model, wp.phase, mc.shots, mc.trials, seed, mc.method, workers)
        e = res.estimate
        checks.append(_check_row("working_point", "phase_variance", e.variance, e.stderr_variance, res.predicted,
                                 e.samples, note=f"phase={wp.phase!r}"))
    except RegimeViolationError as exc:
        checks.append(_inconclusive("working_point", "phase_variance", exc))

    statuses = {c["status"] for c in checks}
    if "inconclusive" in statuses:
        status, code = "inconclusive", EXIT_INCONCLUSIVE
    elif "fail" in statuses:
        status, code = "fail", EXIT_NUMERIC
    else:
        status, code = "pass", EXIT_OK
    payload = {"status": status, "seed": seed, "checks": checks}
    columns = ["check", "quantity", "empirical", "stderr", "analytic", "z", "samples", "status", "note"]
    return payload, checks, columns, code, record


def run_sweep(cfg: RunConfig, workers: int):
    grid = cfg.grid.sweep_grid()
    maps = ratio_map(grid, cfg.grid.kind, steps=cfg.plan.steps, n_jobs=workers)
    rows = []
    for i, eta in enumerate(grid.eta_axis):
        for j, n0 in enumerate(grid.n0_axis):
            wp = float(maps["wp"][i, j])
            rows.append(
                {
                    "eta": eta,
                    "n0": n0,
                    "dphi_wp2": wp,
                    "dphi_N2": float(maps["distillation"][i, j]),
                    "ratio": float(maps["ratio"][i, j]),
                    "shot_noise_flag": wp <= 1.0 / n0,
                }
            )
    boundary = []
    for n0 in cfg.grid.n0_boundary:
        b = shot_noise_boundary(n0, cfg.grid.boundary_steps, grid.noise_stats)
        boundary.append({"n0": n0, "eta_star": b.eta, "residual": b.residual})
    return {"rows": rows, "boundary": boundary}


SWEEP_COLUMNS = ["eta", "n0", "dphi_wp2", "dphi_N2", "ratio", "shot_noise_flag"]
BOUNDARY_COLUMNS = ["n0", "eta_star", "residual"]
TABLE_COLUMNS = [
    "table", "regime", "kind", "quantity", "n0", "second", "eta", "lambda_n", "steps",
    "table_value", "general_value", "rel_diff", "ratio", "asymptotic",
]


def run_tables(cfg: RunConfig, workers: int):
    rows = table_comparisons(cfg.plan.steps)
    worst = max((r["rel_diff"] for r in rows if not r["asymptotic"]), default=0.0)
    code = EXIT_OK if worst <= TABLE_TOLERANCE else EXIT_NUMERIC
    return {"rows": rows, "max_rel_diff": worst}, code


# -- driver ---------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qimd", description="Phase uncertainty of noisy interferometers.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, text in [
        ("analytic", "closed-form uncertainty budget"),
        ("wp", "numerical working-point search"),
        ("mc", "Monte-Carlo validation"),
        ("sweep", "ratio map and shot-noise boundary"),
        ("tables", "special-case formulas against the general ones"),
    ]:
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", metavar="PATH", help="JSON configuration; '-' or omitted reads stdin")
        p.add_argument("--seed", type=int, help="override mc.seed")
        p.add_argument("--out", metavar="PATH", help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), help="output format")
        p.add_argument("--workers", type=int, default=1, help="parallel workers (results do not depend on it)")
    return parser


def _load_config(args) -> RunConfig:
    if args.config in (None, "-"):
        text = "" if sys.stdin is None or sys.stdin.isatty() else sys.stdin.read()
    else:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    if doc.get("subcommand", args.subcommand) != args.subcommand:
        raise ConfigError(f"config is for '{doc['subcommand']}', not '{args.subcommand}'")
    doc = {**doc, "subcommand": args.subcommand}
    if args.seed is not None and args.subcommand == "mc":
        doc["mc"] = {**(doc.get("mc") or {}), "seed": args.seed}
    cfg = RunConfig.from_dict(doc)
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    return cfg.with_overrides(seed=args.seed, out=args.out, fmt=args.format)


def _emit(cfg: RunConfig, payload, rows, columns):
    h = cfg.config_hash()
    if cfg.output_format == "csv":
        _write(_csv_block(rows, columns, h), cfg.output_path)
    else:
        _write(_json_text({"config_hash": h, "subcommand": cfg.subcommand, **payload}), cfg.output_path)


def _dispatch(cfg: RunConfig, workers: int) -> int:
    h = cfg.config_hash()
    sub = cfg.subcommand
    if sub in ("analytic", "wp"):
        payload, rows, columns, code = (run_analytic if sub == "analytic" else run_wp)(cfg, workers)
        _emit(cfg, payload, rows, columns)
        return code
    if sub == "mc":
        payload, rows, columns, code, record = run_mc(cfg, workers)
        _emit(cfg, payload, rows, columns)
        if cfg.output_path is not None:
            _write(record.to_csv_string(h), _companion(cfg.output_path, ".record.csv"))
            _write(record.sidecar_json(h) + "\n", _companion(cfg.output_path, ".record.json"))
        return code
    if sub == "sweep":
        result = run_sweep(cfg, workers)
        for row in result["boundary"]:
            row["residual"] = _finite(row["residual"])
        if cfg.output_format == "csv":
            matrix = _csv_block(result["rows"], SWEEP_COLUMNS, h)
            bound = _csv_block(result["boundary"], BOUNDARY_COLUMNS, h)
            if cfg.output_path is None:
                _write(matrix + "\n" + bound, None)
            else:
                _write(matrix, cfg.output_path)
                _write(bound, _companion(cfg.output_path, ".boundary.csv"))
        else:
            _write(_json_text({"config_hash": h, "subcommand": sub, **result}), cfg.output_path)
        return EXIT_OK
    payload, code = run_tables(cfg, workers)
    _emit(cfg, payload, payload["rows"], TABLE_COLUMNS)
    return code


def _error(code: int, exc: BaseException) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroContrastWarning)
        try:
            cfg = _load_config(args)
            return _dispatch(cfg, args.workers)
        except (ConfigError, DegenerateConfigurationError) as exc:
            return _error(EXIT_CONFIG, exc)
        except RegimeViolationError as exc:
            return _error(EXIT_INCONCLUSIVE, exc)
        except (ConsistencyError, StationaryPointError, ArithmeticError) as exc:
            return _error(EXIT_NUMERIC, exc)
        except ValueError as exc:
            return _error(EXIT_CONFIG, exc)


if __name__ == "__main__":
    sys.exit(main())
