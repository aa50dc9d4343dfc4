"""Command-line front end.

Subcommands: ingest, fit, diagnose, distort, compare, plotdata.

Settings come from flags, then from a JSON config file (``--config`` or the
``HYPERGROWTH_CONFIG`` environment variable), then from built-in defaults.
A config file may hold shared keys at top level and per-command sections
keyed by subcommand name, e.g.::

    {"windows": {"Western Europe": [1, 1820]},
     "diagnose": {"rho": 3.0, "delta": 0.05}}

Exit codes: 0 success, 2 input/data error, 3 numerical/fit error, 4 config
error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from hypergrowth import comparative, diagnostics, distortion
from hypergrowth.data_io import IngestManifest, ingest, load_dataset, save_dataset
from hypergrowth.errors import (
    ConfigError,
    DataError,
    FitError,
    QuorumError,
    RegionNotFound,
)
from hypergrowth.fitting import fit_hyperbolic, fit_modulated_via_ratio, model_params
from hypergrowth.models import HyperbolicModel, ModulatedHyperbolicModel, evaluate
from hypergrowth.series import Quantity, RegionalDataset, per_capita

log = logging.getLogger("hypergrowth")

REPORT_SCHEMA = "hypergrowth-report/1"
EXIT_OK, EXIT_DATA, EXIT_FIT, EXIT_CONFIG = 0, 2, 3, 4

DEFAULTS = {
    "rho": diagnostics.DEFAULT_RHO,
    "min_flat_fraction": diagnostics.DEFAULT_MIN_FLAT_FRACTION,
    "delta": diagnostics.DEFAULT_DELTA,
    "min_run": diagnostics.DEFAULT_MIN_RUN,
    "eps_lin": diagnostics.DEFAULT_EPS_LIN,
    "r_max": comparative.DEFAULT_R_MAX,
    "sing_window": comparative.DEFAULT_WINDOW,
    "lag_min": comparative.DEFAULT_LAG_RANGE[0],
    "lag_max": comparative.DEFAULT_LAG_RANGE[1],
    "lag_step": comparative.DEFAULT_LAG_STEP,
    "samples": list(distortion.DEFAULT_SAMPLE_XS),
    "dense": distortion.DENSE_POINTS,
    "quantity": Quantity.GDP_PER_CAPITA.value,
    "format": "report",
    "jobs": 1,
    "seed": 0,
    "window": None,
    "windows": {},
    "regions": None,
    "include_unfitted": False,
    "reference": None,
    "ratio_years": None,
    "layout": "maddison-horizontal-csv",
    "orientation": "years-down",
    "unit": None,
    "year_column": "0",
    "region_columns": None,
    "provenance": "unspecified",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- settings


class Settings:
    """Flag > config file > default lookup."""

    def __init__(self, args: argparse.Namespace, config: dict):
        self.args = args
        self.config = config

    def __getitem__(self, key):
        val = getattr(self.args, key, None)
        if val is not None:
            return val
        if key in self.config:
            return self.config[key]
        return DEFAULTS.get(key)

    def positive(self, key) -> float:
        try:
            val = float(self[key])
        except (TypeError, ValueError):
            raise ConfigError(f"{key} must be a number, got {self[key]!r}") from None
        if not val > 0 or not math.isfinite(val):
            raise ConfigError(f"{key} must be positive, got {val}")
        return val

    def window_for(self, region):
        windows = self["windows"] or {}
        if not isinstance(windows, dict):
            raise ConfigError("windows must map region names to [first, last]")
        w = windows.get(region, self["window"])
        return None if w is None else _check_window(w, region)


def _check_window(w, label="window"):
    try:
        lo, hi = (float(x) for x in w)
    except (TypeError, ValueError):
        raise ConfigError(f"{label}: window must be two numbers, got {w!r}") from None
    if not lo < hi:
        raise ConfigError(f"{label}: window start {lo:g} must precede end {hi:g}")
    return (lo, hi)


def _parse_window(text: str):
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"window must look like FIRST:LAST, got {text!r}")
    try:
        return (float(parts[0]), float(parts[1]))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad window {text!r}") from None


def _parse_region_window(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected REGION=FIRST:LAST, got {text!r}")
    region, w = text.rsplit("=", 1)
    return region, _parse_window(w)


def _float_list(text: str):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def load_config(path) -> dict:
    if path is None:
        path = os.environ.get("HYPERGROWTH_CONFIG")
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return cfg


# ---------------------------------------------------------------- output


def _clean(obj):
    """JSON-safe copy: numpy scalars/arrays to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _num(x) -> str:
    # Shortest repr that round-trips exactly.
    return repr(float(x))


def report_text(command: str, parameters: dict, body: dict) -> str:
    doc = {"schema": REPORT_SCHEMA, "command": command, "parameters": parameters}
    doc.update(body)
    return json.dumps(_clean(doc), indent=2, sort_keys=False, ensure_ascii=False) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(c) if isinstance(c, (float, np.floating)) else c for c in row])
    return buf.getvalue()


def _emit(text: str, output):
    if output in (None, "-"):
        sys.stdout.write(text)
        return
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", name).strip("_") or "region"


# ---------------------------------------------------------------- helpers


def _select_regions(dataset: RegionalDataset, settings: Settings, fitting=True) -> list[str]:
    wanted = settings["regions"]
    if wanted:
        for r in wanted:
            if r not in dataset.regions:
                raise RegionNotFound(r, dataset.regions)
        return sorted(wanted)
    regions = sorted(dataset.regions)
    if fitting and not settings["include_unfitted"]:
        regions = [r for r in regions if r not in comparative.UNFITTED_BY_DEFAULT]
    return regions


def _quantities(dataset, region, label) -> list[Quantity]:
    if label == "all":
        qs = list(dataset.regions[region])
        if Quantity.GDP in qs and Quantity.POPULATION in qs and Quantity.GDP_PER_CAPITA not in qs:
            qs.append(Quantity.GDP_PER_CAPITA)
        return sorted(qs, key=lambda q: q.value)
    return [Quantity.parse(label)]


def fit_region(dataset: RegionalDataset, region: str, quantity: Quantity, window):
    """Fit one (region, quantity).

    Per-capita series are fitted as GDP hyperbola over population hyperbola
    when both are present, otherwise directly as a single hyperbola.

    Returns:
        (method, model, report, observed series)
    """
    per_q = dataset.regions[region]
    if quantity is Quantity.GDP_PER_CAPITA:
        if Quantity.GDP in per_q and Quantity.POPULATION in per_q:
            model, rep = fit_modulated_via_ratio(
                per_q[Quantity.GDP],
                per_q[Quantity.POPULATION],
                window,
                per_capita=per_q.get(Quantity.GDP_PER_CAPITA),
            )
            return "ratio", model, rep, per_capita(dataset, region)
        if Quantity.GDP_PER_CAPITA in per_q:
            rep = fit_hyperbolic(per_q[Quantity.GDP_PER_CAPITA], window)
            s = per_q[Quantity.GDP_PER_CAPITA]
            return "direct", ModulatedHyperbolicModel.from_hyperbola(rep.model), rep, s
        raise DataError(f"{region}: no per-capita, GDP or population data for a per-capita fit")
    if quantity not in per_q:
        raise DataError(
            f"{region}: no {quantity.value} series; has "
            + ", ".join(q.value for q in per_q)
        )
    rep = fit_hyperbolic(per_q[quantity], window)
    return "direct", rep.model, rep, per_q[quantity]


def _fit_entry(region, quantity, method, model, rep):
    return {
        "region": region,
        "quantity": quantity.value,
        "method": method,
        "window": list(rep.window),
        "parameters": model_params(model),
        "n_points": rep.n_points,
        "r_squared_reciprocal": rep.r_squared_reciprocal,
        "rms_relative_residual": rep.rms_relative_residual,
        "residuals": [[t, r] for t, r in zip(rep.t.tolist(), rep.residuals.tolist())],
    }


def _map_regions(fn, regions, jobs):
    # Results always come back in the order of ``regions``.
    if jobs and int(jobs) > 1:
        with ThreadPoolExecutor(max_workers=int(jobs)) as pool:
            return list(pool.map(fn, regions))
    return [fn(r) for r in regions]


def _describe_window(w):
    return "full series" if w is None else f"{w[0]:g}:{w[1]:g}"


def _annotate(region, window, fn):
    try:
        return fn()
    except (DataError, FitError) as exc:
        exc.args = (f"{region} (window {_describe_window(window)}): {exc}",)
        raise


# ---------------------------------------------------------------- commands


def cmd_ingest(settings: Settings) -> int:
    args = settings.args
    ycol = settings["year_column"]
    ycol = int(ycol) if str(ycol).lstrip("-").isdigit() else ycol
    manifest = IngestManifest(
        source_path=args.input,
        layout=settings["layout"],
        quantity=Quantity.parse(settings["quantity"]),
        unit=settings["unit"],
        region_columns=tuple(settings["region_columns"]) if settings["region_columns"] else None,
        year_column=ycol,
        orientation=settings["orientation"],
        provenance=settings["provenance"],
    )
    try:
        dataset, manifest = ingest(args.input, manifest)
    except OSError as exc:
        raise DataError(f"cannot read {args.input}: {exc}") from exc
    if args.merge:
        dataset = load_dataset(args.merge).merged(dataset, provenance=settings["provenance"])
    save_dataset(dataset, args.output)
    sys.stderr.write(
        f"ingested {sum(len(s) for s in dataset.all_series())} points in "
        f"{len(dataset.regions)} region(s); skipped {manifest.skipped_cells} cell(s)\n"
    )
    return EXIT_OK


def _load(settings) -> RegionalDataset:
    path = settings["dataset"]
    if not path:
        raise ConfigError("no dataset given (--dataset)")
    try:
        return load_dataset(path)
    except OSError as exc:
        raise DataError(f"cannot read dataset {path}: {exc}") from exc


def cmd_fit(settings: Settings) -> int:
    dataset = _load(settings)
    regions = _select_regions(dataset, settings)
    qlabel = settings["quantity"]

    def work(region):
        window = settings.window_for(region)
        out = []
        for q in _quantities(dataset, region, qlabel):
            method, model, rep, _ = _annotate(
                region, window, lambda: fit_region(dataset, region, q, window)
            )
            out.append(_fit_entry(region, q, method, model, rep))
        return out

    entries = [e for per in _map_regions(work, regions, settings["jobs"]) for e in per]
    if settings["format"] == "csv":
        rows = []
        for e in entries:
            p = e["parameters"]
            rows.append(
                [
                    e["region"], e["quantity"], e["method"],
                    float(e["window"][0]), float(e["window"][1]),
                    *(float(p[k]) if k in p else "" for k in ("a", "k", "aP", "kP", "aG", "kG")),
                    "" if p["singularity"] is None else float(p["singularity"]),
                    e["n_points"], float(e["r_squared_reciprocal"]), float(e["rms_relative_residual"]),
                ]
            )
        text = csv_text(
            ["region", "quantity", "method", "t_first", "t_last", "a", "k", "aP", "kP", "aG", "kG",
             "singularity", "n_points", "r_squared_reciprocal", "rms_relative_residual"],
            rows,
        )
    else:
        text = report_text(
            "fit",
            {"quantity": qlabel, "window": settings["window"], "windows": settings["windows"]},
            {"fits": entries},
        )
    _emit(text, settings["output"])
    return EXIT_OK


def diagnose_region(dataset, region, settings: Settings) -> dict:
    q = Quantity.parse(settings["quantity"])
    window = settings.window_for(region)
    method, model, rep, series = _annotate(
        region, window, lambda: fit_region(dataset, region, q, window)
    )
    rho, flat = settings.positive("rho"), float(settings["min_flat_fraction"])
    if len(series) >= 4:
        scan = diagnostics.scan_takeoff(series, rho, flat)
        scan_mode = "observations"
    else:
        # Too few points for a log-slope ratio; scan the straight-line
        # rendering of the observations instead.
        curve = distortion.PiecewiseLinearCurve(series.t, series.v)
        scan = distortion.scan_polyline(
            curve, int(settings["dense"]), threshold=rho, min_flat_fraction=flat
        )
        scan_mode = "polyline-resampled"
    dep = _annotate(
        region,
        window,
        lambda: diagnostics.detect_departure(
            series, model, settings.positive("delta"), int(settings["min_run"])
        ),
    )
    mono = diagnostics.check_monotonic(series)
    entry = {
        "region": region,
        "quantity": q.value,
        "fit": _fit_entry(region, q, method, model, rep),
        "monotonicity": {"verdict": mono.verdict, "violations": mono.violations},
        "takeoff": {
            "mode": scan_mode,
            "verdict": scan.verdict,
            "candidate_time": scan.candidate_time,
            "max_adjacent_rate_jump": scan.max_adjacent_rate_jump,
            "unrestricted_max_jump": scan.unrestricted_max_jump,
            "profile": scan.profile,
        },
        "departure": {
            "departure_time": dep.departure_time,
            "direction": dep.direction,
            "run_length": dep.run_length,
            "residual_threshold": dep.residual_threshold,
        },
    }
    if len(series) >= 3:
        prof = diagnostics.semilog_profile(series, float(settings["eps_lin"]))
        entry["semilog"] = {
            "classification": prof.classification,
            "convexity_index": prof.convexity_index,
            "mean_log_slope": prof.mean_log_slope,
        }
    else:
        entry["semilog"] = None
    return entry


def cmd_diagnose(settings: Settings) -> int:
    dataset = _load(settings)
    regions = _select_regions(dataset, settings)
    params = {
        "quantity": settings["quantity"],
        "rho": settings.positive("rho"),
        "min_flat_fraction": float(settings["min_flat_fraction"]),
        "delta": settings.positive("delta"),
        "min_run": int(settings["min_run"]),
        "eps_lin": float(settings["eps_lin"]),
        "window": settings["window"],
        "windows": settings["windows"],
    }
    if params["min_run"] < 2:
        raise ConfigError("min_run must be >= 2")
    if not 0 <= params["min_flat_fraction"] < 1:
        raise ConfigError("min_flat_fraction must be in [0, 1)")
    entries = _map_regions(lambda r: diagnose_region(dataset, r, settings), regions, settings["jobs"])
    if settings["format"] == "csv":
        rows = [
            [
                e["region"], e["quantity"], e["monotonicity"]["verdict"],
                e["takeoff"]["verdict"], "" if e["takeoff"]["candidate_time"] is None else float(e["takeoff"]["candidate_time"]),
                "" if e["departure"]["departure_time"] is None else float(e["departure"]["departure_time"]),
                e["departure"]["direction"] or "",
                e["semilog"]["classification"] if e["semilog"] else "",
            ]
            for e in entries
        ]
        text = csv_text(
            ["region", "quantity", "monotonicity", "takeoff", "takeoff_time", "departure_time",
             "departure_direction", "semilog"],
            rows,
        )
    else:
        text = report_text(
            "diagnose",
            params,
            {
                "departures": {e["region"]: e["departure"]["departure_time"] for e in entries},
                "regions": entries,
            },
        )
    _emit(text, settings["output"])
    return EXIT_OK


def _distort_curves(settings: Settings):
    args = settings.args
    if args.hyperbola is not None:
        a, k = args.hyperbola
        try:
            model = HyperbolicModel(a, k)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return ("curve",), (model,), None
    names, models, xs = distortion.load_demo_family(settings["demo"])
    return names, models, xs


def _params_of(m):
    return model_params(m)


def cmd_distort(settings: Settings) -> int:
    names, models, cfg_xs = _distort_curves(settings)
    xs = settings.args.samples or settings.config.get("samples") or cfg_xs or DEFAULTS["samples"]
    n = int(settings["dense"])
    if n < 4:
        raise ConfigError("dense must be >= 4")
    res = distortion.distort_family(models, xs, n)
    out = Path(settings["output"] or ".")
    out.mkdir(parents=True, exist_ok=True)

    curves = []
    for name, m, poly, idx, s0, s1 in zip(
        names, models, res.distorted, res.phantom_takeoff, res.original_scans, res.polyline_scans
    ):
        curves.append(
            {
                "name": name,
                "parameters": _params_of(m),
                "knots": poly.knots,
                "phantom_takeoff_index": idx,
                "original_scan": {"verdict": s0.verdict, "candidate_time": s0.candidate_time,
                                  "max_adjacent_rate_jump": s0.max_adjacent_rate_jump},
                "polyline_scan": {"verdict": s1.verdict, "candidate_time": s1.candidate_time,
                                  "max_adjacent_rate_jump": s1.max_adjacent_rate_jump},
            }
        )
    params = {"sample_xs": list(res.sample_xs), "dense_points": n,
              "rho": diagnostics.DEFAULT_RHO, "min_flat_fraction": diagnostics.DEFAULT_MIN_FLAT_FRACTION}
    body = {
        "phantom_divergence_index": None if math.isnan(res.phantom_divergence) else res.phantom_divergence,
        "curves": curves,
    }
    (out / "distortion.json").write_text(report_text("distort", params, body), encoding="utf-8")

    proj = res.projections()
    for label in ("linear", "semilog"):
        dense = proj[label]["originals"]
        rows = [[x, *(float(d[i]) for d in dense)] for i, x in enumerate(res.dense_x.tolist())]
        (out / f"originals_{label}.csv").write_text(csv_text(["x", *names], rows), encoding="utf-8")
        poly = proj[label]["polylines"]
        rows = [[x, *(float(p[i]) for p in poly)] for i, x in enumerate(res.sample_xs)]
        (out / f"polylines_{label}.csv").write_text(csv_text(["x", *names], rows), encoding="utf-8")
    return EXIT_OK


def _fitted_models(dataset, regions, settings):
    fitted = {}
    for region in regions:
        window = settings.window_for(region)
        _, model, _, _ = _annotate(
            region, window, lambda: fit_region(dataset, region, Quantity.GDP_PER_CAPITA, window)
        )
        fitted[region] = model
    return fitted


def cmd_compare(settings: Settings) -> int:
    dataset = _load(settings)
    with_pc = [r for r in sorted(dataset.regions) if per_capita(dataset, r) is not None]
    if len(with_pc) < 2:
        raise QuorumError(
            f"comparison needs >= 2 regions with per-capita data; found {len(with_pc)}: {with_pc}"
        )
    regions = [r for r in _select_regions(dataset, settings) if r in with_pc]
    if len(regions) < 2:
        raise QuorumError(f"comparison needs >= 2 fittable regions; found {regions}")
    lag_range = (float(settings["lag_min"]), float(settings["lag_max"]))
    if lag_range[0] > lag_range[1]:
        raise ConfigError(f"lag range {lag_range} is reversed")
    fitted = _fitted_models(dataset, regions, settings)
    rep = comparative.divergence_verdict(
        dataset,
        fitted,
        r_max=settings.positive("r_max"),
        window=settings.positive("sing_window"),
        reference=settings["reference"],
        lag_range=lag_range,
        step=settings.positive("lag_step"),
    )
    requested = None
    if settings["ratio_years"]:
        requested = comparative.richest_poorest_ratio(dataset, settings["ratio_years"])

    def rows_of(ratios):
        return [[r.year, r.richest_region, r.richest, r.poorest_region, r.poorest, r.ratio] for r in ratios]

    if settings["format"] == "csv":
        text = csv_text(
            ["year", "richest_region", "richest", "poorest_region", "poorest", "ratio"],
            rows_of(requested if requested is not None else rep.ratio_series),
        )
    else:
        body = {
            "verdict": rep.verdict,
            "reference_region": rep.reference_region,
            "lag_table": {
                f"{a}|{b}": {"best_lag": v.best_lag, "rms_log_residual": v.rms_log_residual,
                             "n_used": v.n_used}
                for (a, b), v in rep.lag_table.items()
            },
            "singularity_times": rep.singularity_times,
            "terminal_gradients": rep.terminal_gradients,
            "requested_ratios": None if requested is None else [r.__dict__ for r in requested],
            "ratio_series": [r.__dict__ for r in rep.ratio_series],
            "spread_series": rep.spread_series,
            "years_without_quorum": rep.skipped_years,
        }
        text = report_text("compare", dict(rep.thresholds, windows=settings["windows"],
                                           window=settings["window"]), body)
    _emit(text, settings["output"])
    return EXIT_OK


def plot_rows(series, model, n: int):
    """Dense fitted grid merged with the observation years.

    The grid spans the observations but stops short of the model's guard
    band; observations beyond it get an empty fitted cell.
    """
    end = min(float(series.t[-1]), model.domain_end)
    grid = np.linspace(float(series.t[0]), end, n)
    while grid[-1] >= model.domain_end:
        grid[-1] = np.nextafter(grid[-1], -np.inf)
    ts = np.union1d(grid, series.t)
    obs = dict(zip(series.t.tolist(), series.v.tolist()))
    rows = []
    for t in ts.tolist():
        fitted = float(evaluate(model, t)) if t < model.domain_end else None
        rows.append((t, obs.get(t), fitted))
    return rows


def cmd_plotdata(settings: Settings) -> int:
    dataset = _load(settings)
    regions = _select_regions(dataset, settings)
    q = Quantity.parse(settings["quantity"])
    n = int(settings["dense"])
    if n < 2:
        raise ConfigError("dense must be >= 2")
    out = Path(settings["output"] or ".")
    out.mkdir(parents=True, exist_ok=True)

    def work(region):
        window = settings.window_for(region)
        _, model, _, series = _annotate(region, window, lambda: fit_region(dataset, region, q, window))
        return region, plot_rows(series, model, n)

    for region, rows in _map_regions(work, regions, settings["jobs"]):
        stem = f"{_slug(region)}_{q.value}"
        lin = [[t, "" if o is None else o, "" if f is None else f] for t, o, f in rows]
        log_rows = [
            [t, "" if o is None else math.log(o), "" if f is None else math.log(f)] for t, o, f in rows
        ]
        (out / f"{stem}_linear.csv").write_text(
            csv_text(["t", "observed", "fitted"], lin), encoding="utf-8"
        )
        (out / f"{stem}_semilog.csv").write_text(
            csv_text(["t", "ln_observed", "ln_fitted"], log_rows), encoding="utf-8"
        )
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "fit": cmd_fit,
    "diagnose": cmd_diagnose,
    "distort": cmd_distort,
    "compare": cmd_compare,
    "plotdata": cmd_plotdata,
}


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hypergrowth", description=__doc__.split("\n\n")[0])
    p.add_argument("--config", help="JSON config file (default: $HYPERGROWTH_CONFIG)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_opts(sp, regions=True):
        sp.add_argument("--dataset", help="normalized dataset file (hypergrowth/1)")
        sp.add_argument("-o", "--output", help="output file (default: stdout) or directory")
        sp.add_argument("--format", choices=["report", "csv"])
        if regions:
            sp.add_argument("--region", dest="regions", action="append",
                            help="region to process (repeatable; default: all)")
            sp.add_argument("--include-unfitted", action="store_true", default=None,
                            help="also fit regions excluded by default (Western Offshoots)")
            sp.add_argument("--window", type=_parse_window, help="fit window FIRST:LAST for all regions")
            sp.add_argument("--region-window", type=_parse_region_window, action="append",
                            help="per-region fit window REGION=FIRST:LAST (repeatable)")
            sp.add_argument("--jobs", type=int, help="worker threads for per-region work")

    sp = sub.add_parser("ingest", help="read a CSV export into a normalized dataset")
    sp.add_argument("--input", required=True)
    sp.add_argument("--output", "-o", required=True)
    sp.add_argument("--layout", choices=["maddison-horizontal-csv", "tidy-csv"])
    sp.add_argument("--quantity", choices=[q.value for q in Quantity])
    sp.add_argument("--unit")
    sp.add_argument("--orientation", choices=["years-down", "years-across"])
    sp.add_argument("--year-column")
    sp.add_argument("--region-columns", type=lambda s: [x.strip() for x in s.split(",")])
    sp.add_argument("--provenance")
    sp.add_argument("--merge", help="existing dataset to merge the new series into")

    sp = sub.add_parser("fit", help="fit hyperbolic / ratio-of-hyperbolas models")
    data_opts(sp)
    sp.add_argument("--quantity", choices=[q.value for q in Quantity] + ["all"])

    sp = sub.add_parser("diagnose", help="monotonicity, takeoff, departure and semilog checks")
    data_opts(sp)
    sp.add_argument("--quantity", choices=[q.value for q in Quantity])
    sp.add_argument("--rho", type=float, help="takeoff jump threshold (default 3)")
    sp.add_argument("--min-flat-fraction", type=float, help="default 0.5")
    sp.add_argument("--delta", type=float, help="departure tolerance (default 0.05)")
    sp.add_argument("--min-run", type=int, help="departure run length (default 3)")
    sp.add_argument("--eps-lin", type=float, help="semilog linearity tolerance (default 1e-9)")
    sp.add_argument("--dense", type=int, help="resampling points for short series (default 512)")

    sp = sub.add_parser("distort", help="sample-and-join demonstration")
    sp.add_argument("-o", "--output", help="output directory")
    sp.add_argument("--demo", help="JSON file with the curve family (default: packaged trio)")
    sp.add_argument("--hyperbola", type=float, nargs=2, metavar=("A", "K"),
                    help="single-curve mode with 1/(A - K x)")
    sp.add_argument("--samples", type=_float_list, help="sample abscissae, e.g. 0,150,179.6")
    sp.add_argument("--dense", type=int)

    sp = sub.add_parser("compare", help="cross-region ratio, spread and divergence verdict")
    data_opts(sp)
    sp.add_argument("--ratio-years", type=_float_list, help="years for richest/poorest ratios")
    sp.add_argument("--r-max", type=float, help="max RMS log residual (default 0.25)")
    sp.add_argument("--sing-window", type=float, help="singularity-time window in years (default 60)")
    sp.add_argument("--lag-min", type=float)
    sp.add_argument("--lag-max", type=float)
    sp.add_argument("--lag-step", type=float)
    sp.add_argument("--reference", help="reference region (default: furthest ahead)")

    sp = sub.add_parser("plotdata", help="CSV series for redrawing fitted figures")
    data_opts(sp)
    sp.add_argument("--quantity", choices=[q.value for q in Quantity])
    sp.add_argument("--dense", type=int)
    return p


def _settings(args) -> Settings:
    raw = load_config(args.config)
    config = {k: v for k, v in raw.items() if k not in COMMANDS}
    section = raw.get(args.command, {})
    if not isinstance(section, dict):
        raise ConfigError(f"config section {args.command!r} must be an object")
    config.update(section)
    region_windows = getattr(args, "region_window", None)
    if region_windows:
        merged = dict(config.get("windows") or {})
        merged.update({r: list(w) for r, w in region_windows})
        config["windows"] = merged
    settings = Settings(args, config)
    if settings["window"] is not None:
        _check_window(settings["window"])
    for region, w in (settings["windows"] or {}).items():
        _check_window(w, region)
    jobs = settings["jobs"]
    if not isinstance(jobs, int) or jobs < 1:
        raise ConfigError(f"jobs must be a positive integer, got {jobs!r}")
    return settings


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        settings = _settings(args)
        return COMMANDS[args.command](settings)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except DataError as exc:
        sys.stderr.write(f"data error: {exc}\n")
        return EXIT_DATA
    except FitError as exc:
        sys.stderr.write(f"fit error: {type(exc).__name__}: {exc}\n")
        return EXIT_FIT


if __name__ == "__main__":
    sys.exit(main())
