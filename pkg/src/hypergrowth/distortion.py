"""Sample-and-join caricatures of smooth growth curves.

Evaluating a smooth, convex, non-diverging family at a handful of abscissae
and joining the values with straight lines manufactures both a kink (an
apparent takeoff at the middle knot) and a fan-out of the family (an
apparent divergence). This module builds such polylines and measures both
artifacts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from hypergrowth.diagnostics import TakeoffScanReport, scan_takeoff_arrays
from hypergrowth.errors import BadGrid, ConfigError, OutOfSpan, SingleSegment
from hypergrowth.models import ModulatedHyperbolicModel, evaluate

DEFAULT_SAMPLE_XS = (0.0, 150.0, 179.6)
DENSE_POINTS = 512


@dataclass(frozen=True, eq=False)
class PiecewiseLinearCurve:
    """Straight segments through ordered knots."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).ravel()
        y = np.array(self.y, dtype=float).ravel()
        if x.size < 2 or x.size != y.size:
            raise BadGrid(f"need >= 2 knots with matching values, got {x.size}/{y.size}")
        if np.any(np.diff(x) <= 0):
            raise BadGrid("knot abscissae must be strictly increasing")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def knots(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.y.tolist()))

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.y) / np.diff(self.x)

    def __call__(self, xq):
        xq_arr = np.asarray(xq, dtype=float)
        if np.any((xq_arr < self.x[0]) | (xq_arr > self.x[-1])):
            raise OutOfSpan(f"x outside knot span [{self.x[0]:g}, {self.x[-1]:g}]")
        out = np.interp(xq_arr, self.x, self.y)
        return float(out) if np.ndim(xq) == 0 else out

    def resample(self, n: int = DENSE_POINTS) -> tuple[np.ndarray, np.ndarray]:
        """Uniform grid over the span merged with the knots themselves."""
        xs = np.union1d(np.linspace(self.x[0], self.x[-1], n), self.x)
        return xs, np.interp(xs, self.x, self.y)


def sample_and_join(curve, sample_xs) -> PiecewiseLinearCurve:
    """Evaluate ``curve`` at ``sample_xs`` and join the values by straight lines."""
    xs = np.asarray(sample_xs, dtype=float)
    if xs.size < 2 or np.any(np.diff(xs) <= 0):
        raise BadGrid(f"sample abscissae must be >= 2 and strictly increasing: {xs.tolist()}")
    return PiecewiseLinearCurve(xs, evaluate(curve, xs))


def phantom_takeoff_index(curve: PiecewiseLinearCurve) -> float:
    """Slope of the last segment over slope of the first.

    A zero first slope gives ``+inf`` (or ``-inf``) when the last slope is
    positive (negative), and 1.0 when both are zero.
    """
    s = curve.slopes
    if s.size < 2:
        raise SingleSegment("phantom takeoff index needs at least two segments")
    first, last = float(s[0]), float(s[-1])
    if first == 0.0:
        if last == 0.0:
            return 1.0
        return math.copysign(math.inf, last)
    return last / first


def _spread(family, x) -> float:
    vals = [c(x) for c in family]
    return max(vals) - min(vals)


def phantom_divergence_index(family, x_early=None, x_late=None) -> float:
    """Ratio of the family's spread (max - min) at ``x_late`` to that at ``x_early``.

    Defaults to the first and last knot shared by every curve. An all-equal
    family scores 1.0; zero early spread with positive late spread is ``+inf``.
    """
    family = list(family)
    if len(family) < 2:
        raise ConfigError("divergence index needs at least two curves")
    lo = max(c.x[0] for c in family)
    hi = min(c.x[-1] for c in family)
    x_early = lo if x_early is None else x_early
    x_late = hi if x_late is None else x_late
    for xq in (x_early, x_late):
        if not lo <= xq <= hi:
            raise OutOfSpan(f"x={xq:g} outside common knot span [{lo:g}, {hi:g}]")
    early, late = _spread(family, x_early), _spread(family, x_late)
    if early == 0.0:
        return 1.0 if late == 0.0 else math.inf
    return late / early


def scan_polyline(curve: PiecewiseLinearCurve, n: int = DENSE_POINTS, **kwargs) -> TakeoffScanReport:
    """Takeoff scan of a polyline as it would be read off a chart."""
    xs, ys = curve.resample(n)
    return scan_takeoff_arrays(xs, ys, **kwargs)


def scan_curve(model, x0: float, x1: float, n: int = DENSE_POINTS, **kwargs) -> TakeoffScanReport:
    """Takeoff scan of a smooth model sampled uniformly on [x0, x1]."""
    xs = np.linspace(x0, x1, n)
    return scan_takeoff_arrays(xs, evaluate(model, xs), **kwargs)


def dense_grid(models, x0: float, n: int = DENSE_POINTS) -> np.ndarray:
    """``n`` uniform points from ``x0`` up to the family's guard band."""
    end = min(m.domain_end for m in models)
    if not math.isfinite(end):
        raise ConfigError("dense grid needs a finite domain; supply an explicit end")
    if end <= x0:
        raise BadGrid(f"grid start {x0:g} is beyond the common domain end {end:g}")
    xs = np.linspace(x0, end, n)
    # linspace may round the last point up onto the guard band itself.
    while xs[-1] >= end:
        xs[-1] = np.nextafter(xs[-1], -np.inf)
    return xs


@dataclass(frozen=True)
class DistortionResult:
    """Smooth originals next to their sample-and-join caricatures."""

    originals: tuple
    distorted: tuple
    sample_xs: tuple
    phantom_takeoff: tuple  # one index per curve
    phantom_divergence: float
    dense_x: np.ndarray
    dense_originals: tuple  # arrays aligned with dense_x
    original_scans: tuple  # TakeoffScanReport of each original, fine sampling
    polyline_scans: tuple  # TakeoffScanReport of each polyline

    def projections(self):
        """Linear and natural-log ordinates for originals and polylines."""
        lin = {
            "originals": [np.asarray(d) for d in self.dense_originals],
            "polylines": [c.y for c in self.distorted],
        }
        log = {k: [np.log(a) for a in arrs] for k, arrs in lin.items()}
        return {"linear": lin, "semilog": log}


def distort_family(models, sample_xs=DEFAULT_SAMPLE_XS, n_dense: int = DENSE_POINTS) -> DistortionResult:
    """Sample smooth curves at a few abscissae and measure the artifacts.

    Originals are also scanned on a fine uniform grid over the sample span,
    which must find no takeoff; the polylines carry a kink at each inner
    knot. With a single curve the divergence index is NaN.
    """
    models = tuple(models)
    if not models:
        raise ConfigError("no curves to distort")
    xs = tuple(float(x) for x in sample_xs)
    if len(xs) < 3:
        raise BadGrid(f"a takeoff needs two segments, so >= 3 sample abscissae; got {len(xs)}")
    polylines = tuple(sample_and_join(m, xs) for m in models)
    dense_x = dense_grid(models, xs[0], n_dense)
    return DistortionResult(
        originals=models,
        distorted=polylines,
        sample_xs=xs,
        phantom_takeoff=tuple(phantom_takeoff_index(p) for p in polylines),
        phantom_divergence=(
            phantom_divergence_index(polylines, xs[0], xs[-1]) if len(models) > 1 else math.nan
        ),
        dense_x=dense_x,
        dense_originals=tuple(evaluate(m, dense_x) for m in models),
        original_scans=tuple(scan_curve(m, xs[0], xs[-1], n_dense) for m in models),
        polyline_scans=tuple(scan_polyline(p, n_dense) for p in polylines),
    )


def reconstruct_demo(models, sample_xs=DEFAULT_SAMPLE_XS, n_dense: int = DENSE_POINTS) -> DistortionResult:
    """The three-curve demonstration on the default grid {0, 150, 179.6}."""
    models = tuple(models)
    if len(models) != 3:
        raise ConfigError(f"the demonstration uses exactly three curves, got {len(models)}")
    return distort_family(models, sample_xs, n_dense)


def load_demo_family(path=None):
    """Demonstration trio from a JSON config (the packaged default if no path).

    Each entry is ``{"name": ..., "aP": ..., "kP": ..., "aG": ..., "kG": ...}``.
    """
    if path is None:
        text = resources.files("hypergrowth").joinpath("data/distort_default.json").read_text()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    try:
        cfg = json.loads(text)
        curves = cfg["curves"]
        models = tuple(
            ModulatedHyperbolicModel.from_lines(c["aP"], c["kP"], c["aG"], c["kG"]) for c in curves
        )
        names = tuple(c.get("name", f"curve{i}") for i, c in enumerate(curves))
        xs = tuple(cfg.get("sample_xs", DEFAULT_SAMPLE_XS))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad demonstration config: {exc}") from exc
    return names, models, xs
