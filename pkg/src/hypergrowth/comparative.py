"""Cross-region comparison: ratios, log-spread and lag alignment.

A widening richest/poorest ratio says nothing by itself about diverging
trajectories; two regions on the same hyperbolic path at different levels
of development show the same widening. The verdict here therefore asks
whether every region can be overlaid on a reference trajectory by a time
shift alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hypergrowth.errors import NoValidLag, QuorumError, YearUnavailable
from hypergrowth.models import ModulatedHyperbolicModel
from hypergrowth.series import Quantity, RegionalDataset, TimeSeries, per_capita

DEFAULT_R_MAX = 0.25
DEFAULT_WINDOW = 60.0
DEFAULT_LAG_RANGE = (-200.0, 200.0)
DEFAULT_LAG_STEP = 1.0
UNFITTED_BY_DEFAULT = ("Western Offshoots",)


@dataclass(frozen=True)
class RatioRow:
    year: float
    richest: float
    poorest: float
    ratio: float
    richest_region: str
    poorest_region: str


@dataclass(frozen=True)
class LagAlignment:
    best_lag: float
    rms_log_residual: float
    n_used: int


@dataclass(frozen=True)
class DivergenceReport:
    ratio_series: list  # RatioRow per quorum year
    spread_series: list  # (year, spread)
    skipped_years: list
    terminal_gradients: dict  # region -> log-slope of the last interval
    lag_table: dict  # (reference, region) -> LagAlignment
    singularity_times: dict  # region -> year or None
    reference_region: str
    verdict: str  # "divergent" | "non-divergent-level-shifted"
    thresholds: dict


def _series_for(dataset: RegionalDataset, region: str, quantity: Quantity) -> TimeSeries | None:
    if quantity is Quantity.GDP_PER_CAPITA:
        return per_capita(dataset, region)
    return dataset.get(region, quantity)


def _by_year(dataset: RegionalDataset, quantity) -> dict[float, dict[str, float]]:
    q = Quantity.parse(quantity)
    table: dict[float, dict[str, float]] = {}
    for region in dataset.regions:
        s = _series_for(dataset, region, q)
        if s is None:
            continue
        for t, v in zip(s.t.tolist(), s.v.tolist()):
            table.setdefault(t, {})[region] = v
    return dict(sorted(table.items()))


def _ratio_row(year, values: dict[str, float]) -> RatioRow:
    # Ties resolve to the alphabetically first region.
    rich = max(sorted(values), key=values.__getitem__)
    poor = min(sorted(values), key=values.__getitem__)
    return RatioRow(year, values[rich], values[poor], values[rich] / values[poor], rich, poor)


def richest_poorest_ratio(
    dataset: RegionalDataset, years=None, quantity=Quantity.GDP_PER_CAPITA
) -> list[RatioRow]:
    """Richest over poorest region at each year (exact year matches only).

    With ``years=None`` every year with at least two reporting regions is used.
    """
    table = _by_year(dataset, quantity)
    if years is None:
        years = [y for y, vals in table.items() if len(vals) >= 2]
    missing = [y for y in years if len(table.get(float(y), {})) < 2]
    if missing:
        raise YearUnavailable(missing)
    return [_ratio_row(float(y), table[float(y)]) for y in years]


def log_spread_series(dataset: RegionalDataset, quantity=Quantity.GDP_PER_CAPITA):
    """``max ln v - min ln v`` across regions per year.

    Returns:
        (rows, skipped) where rows are (year, spread) for years with at least
        two reporting regions and skipped lists the other years.
    """
    rows, skipped = [], []
    for year, vals in _by_year(dataset, quantity).items():
        if len(vals) < 2:
            skipped.append(year)
            continue
        logs = np.log(np.fromiter(vals.values(), dtype=float))
        rows.append((year, float(logs.max() - logs.min())))
    return rows, skipped


def align_by_lag(
    reference_model,
    series: TimeSeries,
    lag_range=DEFAULT_LAG_RANGE,
    step: float = DEFAULT_LAG_STEP,
) -> LagAlignment:
    """Time shift that best overlays ``series`` on ``reference_model``.

    Minimizes the RMS of ``ln v - ln model(t - lag)`` over the points where
    the shifted model is defined. A positive lag means the series reaches a
    given level later than the reference. Lags keeping fewer than half the
    points in the domain are not considered.
    """
    lo, hi = lag_range
    if not step > 0 or hi < lo:
        raise ValueError(f"bad lag grid {lag_range} step {step}")
    lags = lo + step * np.arange(int(math.floor((hi - lo) / step + 1e-9)) + 1)
    t = series.t
    lv = np.log(series.v)
    shifted = t[None, :] - lags[:, None]
    model = reference_model
    if isinstance(model, ModulatedHyperbolicModel):
        num = model.population.a - model.population.k * shifted
        den = model.gdp.a - model.gdp.k * shifted
    else:
        num = np.ones_like(shifted)
        den = model.a - model.k * shifted
    valid = (shifted < model.domain_end) & (num > 0) & (den > 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        resid = np.where(valid, lv[None, :] - np.log(np.where(valid, num / den, 1.0)), 0.0)
    counts = valid.sum(axis=1)
    usable = counts * 2 >= t.size
    if not usable.any():
        raise NoValidLag(
            f"{series.region}: no lag in [{lo:g}, {hi:g}] keeps half the points in the model domain"
        )
    rms = np.full(lags.size, np.inf)
    rms[usable] = np.sqrt((resid[usable] ** 2).sum(axis=1) / counts[usable])
    best = int(np.argmin(rms))
    return LagAlignment(float(lags[best]), float(rms[best]), int(counts[best]))


def _terminal_gradient(series: TimeSeries) -> float | None:
    if len(series) < 2:
        return None
    return float(
        (math.log(series.v[-1]) - math.log(series.v[-2])) / (series.t[-1] - series.t[-2])
    )


def choose_reference(dataset: RegionalDataset, fitted: dict) -> str:
    """Region whose fitted trajectory is furthest ahead.

    Models are compared at the latest year every fitted region reports.
    """
    last_years = []
    for region in fitted:
        s = per_capita(dataset, region)
        if s is not None:
            last_years.append(float(s.t[-1]))
    t_ref = min(last_years) if last_years else 0.0
    t_ref = min(t_ref, min(m.domain_end for m in fitted.values()) - 1.0)
    return max(sorted(fitted), key=lambda r: float(fitted[r](t_ref)))


def divergence_verdict(
    dataset: RegionalDataset,
    fitted: dict,
    r_max: float = DEFAULT_R_MAX,
    window: float = DEFAULT_WINDOW,
    reference: str | None = None,
    lag_range=DEFAULT_LAG_RANGE,
    step: float = DEFAULT_LAG_STEP,
) -> DivergenceReport:
    """Do the regions follow one trajectory at different levels, or not?

    The verdict is ``non-divergent-level-shifted`` when every fitted region
    lines up with the reference trajectory by a time shift to within
    ``r_max`` (RMS of log residuals) and all fitted singularity times fall
    within ``window`` years of each other; otherwise ``divergent``.
    """
    if len(fitted) < 2:
        raise QuorumError(f"divergence verdict needs >= 2 fitted regions, got {len(fitted)}")
    if not (r_max > 0 and window > 0):
        raise ValueError("divergence thresholds must be positive")
    fitted = dict(sorted(fitted.items()))
    for region in fitted:
        if per_capita(dataset, region) is None:
            raise QuorumError(f"region {region!r} has no per-capita data")
    ref = reference if reference is not None else choose_reference(dataset, fitted)
    if ref not in fitted:
        raise QuorumError(f"reference region {ref!r} has no fit")

    lag_table = {}
    for region in fitted:
        lag_table[(ref, region)] = align_by_lag(
            fitted[ref], per_capita(dataset, region), lag_range, step
        )
    sing = {r: m.singularity for r, m in fitted.items()}
    finite = [s for s in sing.values() if s is not None]
    same_time = len(finite) == len(sing) and max(finite) - min(finite) <= window
    aligned = all(a.rms_log_residual <= r_max for a in lag_table.values())

    spread, skipped = log_spread_series(dataset)
    return DivergenceReport(
        ratio_series=richest_poorest_ratio(dataset),
        spread_series=spread,
        skipped_years=skipped,
        terminal_gradients={
            r: _terminal_gradient(per_capita(dataset, r))
            for r in dataset.regions
            if per_capita(dataset, r) is not None
        },
        lag_table=lag_table,
        singularity_times=sing,
        reference_region=ref,
        verdict="non-divergent-level-shifted" if (aligned and same_time) else "divergent",
        thresholds={
            "r_max": float(r_max),
            "window": float(window),
            "lag_range": [float(lag_range[0]), float(lag_range[1])],
            "lag_step": float(step),
        },
    )
