"""Hyperbola fitting by linear regression of reciprocals.

Because ``1/S(t) = a - k*t`` is affine, a hyperbola is fitted by ordinary
least squares on ``(t, 1/v)``. The fit is unweighted in reciprocal space,
which gives early (small) values more leverage than late ones; this is left
as is.

Per-capita trajectories are never fitted directly: GDP and population are
fitted separately and divided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hypergrowth.errors import InsufficientData, MismatchedRegions, NotGrowthLike
from hypergrowth.models import HyperbolicModel, ModulatedHyperbolicModel, evaluate
from hypergrowth.series import TimeSeries, ratio_series


@dataclass(frozen=True)
class FitReport:
    """Outcome of a hyperbolic (or ratio-of-hyperbolas) fit.

    Attributes:
        model: The fitted model.
        window: (t_first, t_last) of the points actually used.
        r_squared_reciprocal: Coefficient of determination of the model
            against the observed reciprocals, clamped to [0, 1].
        rms_relative_residual: RMS of (v_obs - v_model) / v_model.
        residuals: Signed relative residuals, one per in-window point.
        t: Years of the in-window points.
    """

    model: HyperbolicModel | ModulatedHyperbolicModel
    window: tuple[float, float]
    r_squared_reciprocal: float
    rms_relative_residual: float
    residuals: np.ndarray
    t: np.ndarray

    @property
    def n_points(self) -> int:
        return self.residuals.size


def reciprocal_transform(series: TimeSeries) -> np.ndarray:
    """Return an (n, 2) array of (t, 1/v)."""
    return np.column_stack([series.t, 1.0 / series.v])


def _affine_ols(t: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Intercept and slope of y ~ c0 + c1*t, computed about the mean year."""
    tm = t.mean()
    dt = t - tm
    ym = y.mean()
    sxx = np.dot(dt, dt)
    slope = np.dot(dt, y - ym) / sxx
    return ym - slope * tm, slope


def _r_squared(y_obs: np.ndarray, y_fit: np.ndarray) -> float:
    ss_res = float(np.sum((y_obs - y_fit) ** 2))
    ss_tot = float(np.sum((y_obs - y_obs.mean()) ** 2))
    # A flat reciprocal line has no variance to explain.
    if ss_tot <= 1e-28 * max(float(np.dot(y_obs, y_obs)), 1e-300):
        return 1.0 if ss_res <= 1e-24 * float(np.dot(y_obs, y_obs)) else 0.0
    return min(1.0, max(0.0, 1.0 - ss_res / ss_tot))


def _report(series: TimeSeries, model) -> FitReport:
    fitted = evaluate(model, series.t)
    resid = (series.v - fitted) / fitted
    resid.flags.writeable = False
    return FitReport(
        model=model,
        window=(float(series.t[0]), float(series.t[-1])),
        r_squared_reciprocal=_r_squared(1.0 / series.v, 1.0 / fitted),
        rms_relative_residual=float(np.sqrt(np.mean(resid**2))),
        residuals=resid,
        t=series.t,
    )


def fit_hyperbolic(series: TimeSeries, window=None) -> FitReport:
    """Fit ``1/(a - k*t)`` by least squares on the reciprocals.

    Raises:
        InsufficientData: fewer than two points inside ``window``.
        NotGrowthLike: the reciprocals increase with time (decaying data).
    """
    sub = series.window(window)
    if len(sub) < 2:
        raise InsufficientData(
            f"{series.region} {series.quantity.value}: {len(sub)} point(s) in window {window}"
        )
    y = 1.0 / sub.v
    intercept, slope = _affine_ols(sub.t, y)
    k = -slope
    # Round-off on a flat series can leave a slope of either sign.
    span = float(sub.t[-1] - sub.t[0])
    if abs(k) * span <= 64 * np.finfo(float).eps * float(np.max(np.abs(y))):
        k = 0.0
        intercept = float(y.mean())
    if k < 0:
        raise NotGrowthLike(
            f"{series.region} {series.quantity.value}: reciprocal slope {slope:.6g} > 0 "
            f"(series is decaying) in window {window}",
            intercept,
            slope,
        )
    if intercept <= 0:
        # Singularity already behind the first in-window year.
        raise NotGrowthLike(
            f"{series.region} {series.quantity.value}: fitted intercept {intercept:.6g} <= 0",
            intercept,
            slope,
        )
    return _report(sub, HyperbolicModel(intercept, k))


def fit_modulated_via_ratio(
    gdp: TimeSeries,
    population: TimeSeries,
    window=None,
    per_capita: TimeSeries | None = None,
) -> tuple[ModulatedHyperbolicModel, FitReport]:
    """Fit GDP and population hyperbolas and divide them.

    The returned report compares observed per-capita values with the ratio
    model. Observations come from ``per_capita`` when given (authoritative),
    otherwise from gdp/population at their common years.
    """
    regions = {gdp.region, population.region}
    if per_capita is not None:
        regions.add(per_capita.region)
    if len(regions) != 1:
        raise MismatchedRegions(f"series belong to different regions: {sorted(regions)}")
    g = fit_hyperbolic(gdp, window)
    p = fit_hyperbolic(population, window)
    model = ModulatedHyperbolicModel(population=p.model, gdp=g.model)
    if per_capita is not None:
        observed = per_capita.window(window)
        if len(observed) == 0:
            raise InsufficientData(f"{per_capita.region}: no per-capita points in window {window}")
    else:
        observed = ratio_series(gdp, population, window)
    return model, _report(observed, model)


def residual_series(series: TimeSeries, model) -> tuple[np.ndarray, np.ndarray]:
    """Signed relative residuals ``(v - model(t)) / model(t)``.

    Returns:
        (t, residual) arrays in series order.
    """
    fitted = evaluate(model, series.t)
    return series.t.copy(), (series.v - fitted) / fitted


def model_params(model) -> dict:
    """Flat parameter dictionary for reports."""
    if isinstance(model, ModulatedHyperbolicModel):
        ts = model.singularity
        return {
            "aP": model.population.a,
            "kP": model.population.k,
            "aG": model.gdp.a,
            "kG": model.gdp.k,
            "singularity": ts if ts is not None and math.isfinite(ts) else None,
        }
    return {"a": model.a, "k": model.k, "singularity": model.singularity}
