"""Observed series and multi-region datasets."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

import numpy as np

from hypergrowth.errors import DataError, DuplicateYear, NoCommonYears, NonPositiveValue


class Quantity(str, enum.Enum):
    GDP = "GDP"
    POPULATION = "population"
    GDP_PER_CAPITA = "GDP_per_capita"

    @classmethod
    def parse(cls, label) -> "Quantity":
        if isinstance(label, cls):
            return label
        key = str(label).strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {
            "gdp": cls.GDP,
            "population": cls.POPULATION,
            "pop": cls.POPULATION,
            "gdp_per_capita": cls.GDP_PER_CAPITA,
            "gdp/cap": cls.GDP_PER_CAPITA,
            "gdp_cap": cls.GDP_PER_CAPITA,
            "per_capita": cls.GDP_PER_CAPITA,
        }
        try:
            return aliases[key]
        except KeyError:
            raise DataError(f"unknown quantity {label!r}") from None


DEFAULT_UNITS = {
    Quantity.GDP: "billions of 1990 International Geary-Khamis dollars",
    Quantity.POPULATION: "millions of persons",
    Quantity.GDP_PER_CAPITA: "1990 International Geary-Khamis dollars",
}


def _check_unit(quantity: Quantity, unit: str):
    # Units are labels; only reject pairings that are plainly crossed.
    u = unit.lower()
    if not u.strip():
        raise DataError(f"{quantity.value} series needs a unit label")
    if quantity is Quantity.POPULATION and "dollar" in u:
        raise DataError(f"population series cannot carry monetary unit {unit!r}")
    if quantity is Quantity.GDP and ("person" in u or "people" in u):
        raise DataError(f"GDP series cannot carry head-count unit {unit!r}")


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """One region's observations of a single quantity.

    Points are sorted by year on construction; duplicate years and
    non-positive values are rejected. Arrays are read-only.
    """

    region: str
    quantity: Quantity
    unit: str
    t: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        q = Quantity.parse(self.quantity)
        t = np.array(self.t, dtype=float).ravel()
        v = np.array(self.v, dtype=float).ravel()
        if t.shape != v.shape:
            raise DataError(f"{self.region}: {t.size} years but {v.size} values")
        if t.size == 0:
            raise DataError(f"{self.region}: empty {q.value} series")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise DataError(f"{self.region}: non-finite year or value")
        order = np.argsort(t, kind="stable")
        t, v = t[order], v[order]
        dup = np.flatnonzero(np.diff(t) == 0)
        if dup.size:
            raise DuplicateYear(f"{self.region} {q.value}: duplicate year {t[dup[0]]:g}")
        if np.any(v <= 0):
            bad = t[v <= 0][0]
            raise NonPositiveValue(f"{self.region} {q.value}: non-positive value at {bad:g}")
        _check_unit(q, self.unit)
        t.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "quantity", q)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)

    @classmethod
    def from_points(cls, points, region="synthetic", quantity=Quantity.GDP_PER_CAPITA, unit=None):
        pts = list(points)
        q = Quantity.parse(quantity)
        return cls(
            region,
            q,
            DEFAULT_UNITS[q] if unit is None else unit,
            [p[0] for p in pts],
            [p[1] for p in pts],
        )

    def __len__(self):
        return self.t.size

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.region == other.region
            and self.quantity is other.quantity
            and self.unit == other.unit
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.v, other.v)
        )

    __hash__ = None

    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.t.tolist(), self.v.tolist()))

    def window(self, window=None) -> "TimeSeries":
        """Sub-series with ``t_first <= t <= t_last`` (inclusive); may be empty."""
        if window is None:
            return self
        lo, hi = window
        mask = (self.t >= lo) & (self.t <= hi)
        return _unchecked(self, self.t[mask], self.v[mask])

    def scaled(self, factor: float) -> "TimeSeries":
        return TimeSeries(self.region, self.quantity, self.unit, self.t, self.v * factor)


def _unchecked(like: TimeSeries, t, v) -> TimeSeries:
    # Windowing an already valid series cannot break ordering or positivity,
    # but may leave it empty, which the public constructor forbids.
    obj = object.__new__(TimeSeries)
    t = np.array(t, dtype=float)
    v = np.array(v, dtype=float)
    t.flags.writeable = False
    v.flags.writeable = False
    for name, val in (
        ("region", like.region),
        ("quantity", like.quantity),
        ("unit", like.unit),
        ("t", t),
        ("v", v),
    ):
        object.__setattr__(obj, name, val)
    return obj


@dataclass(frozen=True)
class RegionalDataset:
    """Series grouped by region, each region holding up to three quantities."""

    regions: Mapping[str, Mapping[Quantity, TimeSeries]]
    provenance: str = "unspecified"

    def __post_init__(self):
        frozen = {}
        for name, per_q in self.regions.items():
            inner = {}
            for q, s in per_q.items():
                q = Quantity.parse(q)
                if s.region != name:
                    raise DataError(f"series labelled {s.region!r} filed under region {name!r}")
                if s.quantity is not q:
                    raise DataError(f"{name}: {s.quantity.value} series filed under {q.value}")
                inner[q] = s
            frozen[name] = MappingProxyType(dict(sorted(inner.items(), key=lambda kv: kv[0].value)))
        object.__setattr__(self, "regions", MappingProxyType(dict(sorted(frozen.items()))))

    def __eq__(self, other):
        if not isinstance(other, RegionalDataset):
            return NotImplemented
        return self.provenance == other.provenance and {
            r: dict(q) for r, q in self.regions.items()
        } == {r: dict(q) for r, q in other.regions.items()}

    __hash__ = None

    @classmethod
    def from_series(cls, series, provenance="unspecified") -> "RegionalDataset":
        regions: dict[str, dict[Quantity, TimeSeries]] = {}
        for s in series:
            slot = regions.setdefault(s.region, {})
            if s.quantity in slot:
                raise DataError(f"{s.region}: two {s.quantity.value} series")
            slot[s.quantity] = s
        return cls(regions, provenance)

    def all_series(self):
        for per_q in self.regions.values():
            yield from per_q.values()

    def merged(self, other: "RegionalDataset", provenance=None) -> "RegionalDataset":
        return RegionalDataset.from_series(
            list(self.all_series()) + list(other.all_series()),
            provenance or self.provenance,
        )

    def get(self, region: str, quantity) -> TimeSeries | None:
        return self.regions.get(region, {}).get(Quantity.parse(quantity))


def ratio_series(gdp: TimeSeries, population: TimeSeries, window=None) -> TimeSeries:
    """Observed GDP per capita at the years both series report."""
    g, p = gdp.window(window), population.window(window)
    common, gi, pi = np.intersect1d(g.t, p.t, assume_unique=True, return_indices=True)
    if common.size == 0:
        raise NoCommonYears(f"{gdp.region}: GDP and population share no years")
    return TimeSeries(
        gdp.region,
        Quantity.GDP_PER_CAPITA,
        f"{gdp.unit} per {population.unit}",
        common,
        g.v[gi] / p.v[pi],
    )


def per_capita(dataset: RegionalDataset, region: str) -> TimeSeries | None:
    """Per-capita observations for a region.

    A stored per-capita series is authoritative; otherwise it is derived
    pointwise from GDP and population at common years.
    """
    per_q = dataset.regions.get(region, {})
    if Quantity.GDP_PER_CAPITA in per_q:
        return per_q[Quantity.GDP_PER_CAPITA]
    if Quantity.GDP in per_q and Quantity.POPULATION in per_q:
        return ratio_series(per_q[Quantity.GDP], per_q[Quantity.POPULATION])
    return None
