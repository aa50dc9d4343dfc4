"""Monotonicity, takeoff, departure and semilog-convexity checks.

All discrete slopes divide by the actual year gap, so irregular grids such
as 1, 1000, 1500, 1600, 1700, 1820, ... are handled directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from hypergrowth.errors import ConfigError, InsufficientData
from hypergrowth.fitting import residual_series
from hypergrowth.series import TimeSeries

DEFAULT_RHO = 3.0
DEFAULT_MIN_FLAT_FRACTION = 0.5
DEFAULT_DELTA = 0.05
DEFAULT_MIN_RUN = 3
DEFAULT_EPS_LIN = 1e-9
SLOPE_FLOOR = 1e-12  # per year; stands in for zero or negative previous slopes


class MonotonicityCheck(NamedTuple):
    verdict: str  # "monotone_increasing" | "not_monotone"
    violations: list


@dataclass(frozen=True)
class TakeoffScanReport:
    """Result of scanning local log-slopes for an abrupt acceleration.

    ``max_adjacent_rate_jump`` is taken over admissible positions only (those
    preceded by a slow regime), so ``verdict == "candidate"`` exactly when it
    reaches ``threshold``. ``unrestricted_max_jump`` ignores that condition.
    """

    verdict: str  # "none" | "candidate"
    candidate_time: float | None
    profile: np.ndarray  # (n-1, 2): interval midpoint, log-slope
    max_adjacent_rate_jump: float
    unrestricted_max_jump: float
    threshold: float
    min_flat_fraction: float


@dataclass(frozen=True)
class DepartureReport:
    departure_time: float | None
    direction: str | None  # "above" | "below"
    run_length: int
    residual_threshold: float
    min_run: int


@dataclass(frozen=True)
class SemilogProfile:
    points: np.ndarray  # (n, 2): t, ln v
    second_differences: np.ndarray  # at interior points
    convexity_index: float
    mean_log_slope: float
    classification: str
    tolerance: float


def check_monotonic(series: TimeSeries) -> MonotonicityCheck:
    """List every year whose value does not exceed the previous one."""
    bad = np.flatnonzero(np.diff(series.v) <= 0) + 1
    violations = series.t[bad].tolist()
    return MonotonicityCheck(
        "not_monotone" if violations else "monotone_increasing", violations
    )


def log_slopes(t, v) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    lv = np.log(np.asarray(v, dtype=float))
    return np.diff(lv) / np.diff(t)


def scan_takeoff(
    series: TimeSeries,
    threshold: float = DEFAULT_RHO,
    min_flat_fraction: float = DEFAULT_MIN_FLAT_FRACTION,
) -> TakeoffScanReport:
    """Look for an abrupt jump in the local relative growth rate.

    Interval ``i`` spans ``[t_i, t_{i+1}]`` with log-slope ``r_i``. A takeoff
    candidate is the earliest knot ``t_i`` where

    * ``r_i / max(r_{i-1}, 1e-12) >= threshold``, and
    * the ``ceil(min_flat_fraction * (n-1))`` intervals just before ``t_i``
      have a combined log-slope below the median of all ``r``.

    Samples of a hyperbola on any reasonable grid never satisfy the first
    condition under the default threshold; a polyline kink does.
    """
    return scan_takeoff_arrays(series.t, series.v, threshold, min_flat_fraction)


def scan_takeoff_arrays(t, v, threshold=DEFAULT_RHO, min_flat_fraction=DEFAULT_MIN_FLAT_FRACTION):
    if not threshold > 0:
        raise ConfigError(f"takeoff threshold must be positive, got {threshold}")
    if not 0 <= min_flat_fraction < 1:
        raise ConfigError(f"min_flat_fraction must be in [0, 1), got {min_flat_fraction}")
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    if t.size < 4:
        raise InsufficientData(f"takeoff scan needs >= 4 points, got {t.size}")
    r = log_slopes(t, v)
    mids = 0.5 * (t[:-1] + t[1:])
    profile = np.column_stack([mids, r])

    jumps = np.full(r.size, -np.inf)
    jumps[1:] = r[1:] / np.maximum(r[:-1], SLOPE_FLOOR)

    w = math.ceil(min_flat_fraction * r.size)
    median = float(np.median(r))
    lv = np.log(v)
    admissible = np.zeros(r.size, dtype=bool)
    for i in range(max(1, w), r.size):
        if w == 0:
            admissible[i] = True
            continue
        prior = (lv[i] - lv[i - w]) / (t[i] - t[i - w])
        admissible[i] = prior < median

    ok = jumps[admissible]
    max_jump = float(ok.max()) if ok.size else 0.0
    hits = np.flatnonzero(admissible & (jumps >= threshold))
    candidate = float(t[hits[0]]) if hits.size else None
    profile.flags.writeable = False
    return TakeoffScanReport(
        verdict="candidate" if candidate is not None else "none",
        candidate_time=candidate,
        profile=profile,
        max_adjacent_rate_jump=max_jump,
        unrestricted_max_jump=float(jumps[1:].max()) if r.size > 1 else 0.0,
        threshold=float(threshold),
        min_flat_fraction=float(min_flat_fraction),
    )


def detect_departure(
    series: TimeSeries,
    model,
    delta: float = DEFAULT_DELTA,
    min_run: int = DEFAULT_MIN_RUN,
) -> DepartureReport:
    """Find where observations leave a fitted trajectory for good.

    The departure is the start of the trailing run of points whose relative
    residual exceeds ``delta`` in magnitude with one common sign, provided the
    run holds at least ``min_run`` points.
    """
    if not delta > 0:
        raise ConfigError(f"departure tolerance must be positive, got {delta}")
    if int(min_run) != min_run or min_run < 2:
        raise ConfigError(f"departure run length must be an integer >= 2, got {min_run}")
    t, resid = residual_series(series, model)
    sign = np.sign(resid)
    qualifies = np.abs(resid) > delta
    start = resid.size
    if resid.size and qualifies[-1]:
        s = sign[-1]
        while start > 0 and qualifies[start - 1] and sign[start - 1] == s:
            start -= 1
    run = resid.size - start
    if run >= min_run:
        return DepartureReport(
            departure_time=float(t[start]),
            direction="above" if sign[-1] > 0 else "below",
            run_length=int(run),
            residual_threshold=float(delta),
            min_run=int(min_run),
        )
    return DepartureReport(None, None, 0, float(delta), int(min_run))


def second_differences(t, y) -> np.ndarray:
    """Three-point second derivative on a possibly non-uniform grid."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    h1 = t[1:-1] - t[:-2]
    h2 = t[2:] - t[1:-1]
    s1 = (y[1:-1] - y[:-2]) / h1
    s2 = (y[2:] - y[1:-1]) / h2
    return 2.0 * (s2 - s1) / (h1 + h2)


def semilog_profile(series: TimeSeries, tolerance: float = DEFAULT_EPS_LIN) -> SemilogProfile:
    """Classify the curvature of ln v against t.

    Hyperbolic growth is strictly convex on semilog axes, exponential growth
    is a straight line.
    """
    if len(series) < 3:
        raise InsufficientData(f"semilog profile needs >= 3 points, got {len(series)}")
    if not tolerance >= 0:
        raise ConfigError(f"linearity tolerance must be >= 0, got {tolerance}")
    lv = np.log(series.v)
    d2 = second_differences(series.t, lv)
    if np.all(np.abs(d2) <= tolerance):
        label = "affine-exponential-like"
    elif np.all(d2 >= -tolerance):
        label = "convex-hyperbolic-like"
    elif np.all(d2 <= tolerance):
        label = "concave"
    else:
        label = "mixed"
    pts = np.column_stack([series.t, lv])
    pts.flags.writeable = False
    d2.flags.writeable = False
    return SemilogProfile(
        points=pts,
        second_differences=d2,
        convexity_index=float(d2.min()),
        mean_log_slope=float((lv[-1] - lv[0]) / (series.t[-1] - series.t[0])),
        classification=label,
        tolerance=float(tolerance),
    )
