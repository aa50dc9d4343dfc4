"""CSV ingestion and the normalized dataset document.

Two CSV layouts are read:

* ``maddison-horizontal-csv``: a year column plus one column per region,
  blank cells allowed. ``orientation="years-across"`` reads the transposed
  form (region names down the first column, years across the header), which
  is how the Maddison 2010 spreadsheet is laid out.
* ``tidy-csv``: columns ``region, year, quantity, value, unit``.

The normalized document is JSON with schema ``hypergrowth/1``; every number
is written as a 17-significant-digit decimal string so a load reproduces the
saved floats bit for bit, and a SHA-256 over the canonical payload detects
tampering.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

from hypergrowth.errors import (
    CorruptFile,
    DataError,
    DuplicateYear,
    InvalidDataset,
    NonPositiveValue,
    ParseError,
    SchemaVersionMismatch,
    UnitMismatch,
)
from hypergrowth.series import DEFAULT_UNITS, Quantity, RegionalDataset, TimeSeries

log = logging.getLogger(__name__)

SCHEMA_VERSION = "hypergrowth/1"
HORIZONTAL = "maddison-horizontal-csv"
TIDY = "tidy-csv"
YEAR_MIN, YEAR_MAX = -10000, 2100


@dataclass(frozen=True)
class IngestManifest:
    source_path: str
    layout: str = HORIZONTAL
    quantity: Quantity = Quantity.GDP_PER_CAPITA
    unit: str | None = None
    region_columns: tuple | None = None  # None: every non-year column
    year_column: str | int = 0
    orientation: str = "years-down"  # or "years-across"
    provenance: str = "unspecified"
    skipped_cells: int = 0
    skipped: tuple = field(default=(), compare=False)  # (row, column, text)

    def __post_init__(self):
        object.__setattr__(self, "quantity", Quantity.parse(self.quantity))
        if self.unit is None:
            object.__setattr__(self, "unit", DEFAULT_UNITS[self.quantity])
        if self.layout not in (HORIZONTAL, TIDY):
            raise DataError(f"unknown layout {self.layout!r}")
        if self.orientation not in ("years-down", "years-across"):
            raise DataError(f"unknown orientation {self.orientation!r}")


def _read_rows(source) -> list[list[str]]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8-sig", newline="") as fh:
            return list(csv.reader(fh))
    text = source.read()
    if isinstance(text, bytes):
        text = text.decode("utf-8-sig")
    return list(csv.reader(io.StringIO(text)))


def parse_year(text: str, row: int, column: int) -> int:
    s = text.strip()
    try:
        y = float(s)
    except ValueError:
        raise ParseError(f"year {text!r} is not a number", row, column) from None
    if not math.isfinite(y) or y != int(y):
        raise ParseError(f"year {text!r} is not an integer", row, column)
    y = int(y)
    if not YEAR_MIN <= y <= YEAR_MAX:
        raise ParseError(f"year {y} outside [{YEAR_MIN}, {YEAR_MAX}]", row, column)
    if y == 0:
        raise ParseError("year 0 does not exist (1 BC is -1)", row, column)
    return y


def _parse_value(text: str):
    """Float for a usable cell, None for blank/non-numeric/non-finite."""
    s = text.strip()
    if not s:
        return None
    try:
        v = float(s)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


class _Collector:
    """Accumulates (year, value) per region and tallies skipped cells."""

    def __init__(self, manifest: IngestManifest):
        self.manifest = manifest
        self.points: dict[str, dict[int, float]] = {}
        self.skipped: list[tuple[int, int, str]] = []

    def add(self, region, year, text, row, column):
        v = _parse_value(text)
        if v is None:
            if text.strip():
                log.warning("skipping non-numeric cell %r at row %d, column %d", text, row, column)
            self.skipped.append((row, column, text))
            return
        if v <= 0:
            raise NonPositiveValue(
                f"{region} {year}: value {text!r} is not positive (row {row}, column {column})"
            )
        slot = self.points.setdefault(region, {})
        if year in slot:
            raise DuplicateYear(f"{region}: year {year} appears twice (row {row}, column {column})")
        slot[year] = v

    def dataset(self) -> tuple[RegionalDataset, IngestManifest]:
        m = self.manifest
        series = []
        for region, pts in self.points.items():
            years = sorted(pts)
            series.append(TimeSeries(region, m.quantity, m.unit, years, [pts[y] for y in years]))
        manifest = dataclasses.replace(
            m, skipped_cells=len(self.skipped), skipped=tuple(self.skipped)
        )
        return RegionalDataset.from_series(series, m.provenance), manifest


def ingest_horizontal(source, manifest: IngestManifest) -> tuple[RegionalDataset, IngestManifest]:
    """Read a year-by-region table into one series per region.

    Blank and non-numeric cells are dropped and counted in the returned
    manifest's ``skipped_cells``; rows and columns in messages are 1-based.
    """
    rows = _read_rows(source)
    if not rows:
        raise ParseError("empty file")
    if manifest.orientation == "years-across":
        width = max(len(r) for r in rows)
        rows = [list(col) for col in zip(*(r + [""] * (width - len(r)) for r in rows))]
    header = [h.strip() for h in rows[0]]
    if isinstance(manifest.year_column, int):
        ycol = manifest.year_column
    else:
        try:
            ycol = header.index(manifest.year_column)
        except ValueError:
            raise ParseError(f"no year column {manifest.year_column!r} in header") from None
    if manifest.region_columns is None:
        cols = [j for j, h in enumerate(header) if j != ycol and h]
    else:
        cols = []
        for name in manifest.region_columns:
            if name not in header:
                raise ParseError(f"region column {name!r} not in header")
            cols.append(header.index(name))
    names = [header[j] for j in cols]
    if len(set(names)) != len(names):
        raise ParseError("duplicate region column names in header")

    collector = _Collector(manifest)
    for i, row in enumerate(rows[1:], start=2):
        if not any(c.strip() for c in row):
            continue
        if ycol >= len(row) or not row[ycol].strip():
            raise ParseError("missing year", i, ycol + 1)
        year = parse_year(row[ycol], i, ycol + 1)
        for j in cols:
            cell = row[j] if j < len(row) else ""
            collector.add(header[j], year, cell, i, j + 1)
    return collector.dataset()


TIDY_COLUMNS = ("region", "year", "quantity", "value", "unit")


def ingest_tidy(source, manifest: IngestManifest) -> tuple[RegionalDataset, IngestManifest]:
    """Read long-format rows, one series per (region, quantity).

    All rows of one quantity must carry the same unit label.
    """
    rows = _read_rows(source)
    if not rows:
        raise ParseError("empty file")
    header = [h.strip().lower() for h in rows[0]]
    try:
        idx = {c: header.index(c) for c in TIDY_COLUMNS}
    except ValueError:
        raise ParseError(f"tidy header must contain {', '.join(TIDY_COLUMNS)}; got {header}") from None

    units: dict[Quantity, tuple[str, int]] = {}
    points: dict[tuple[str, Quantity], dict[int, float]] = {}
    skipped = []
    for i, row in enumerate(rows[1:], start=2):
        if not any(c.strip() for c in row):
            continue
        if len(row) < len(header):
            raise ParseError(f"row has {len(row)} fields, expected {len(header)}", i, len(row) + 1)
        region = row[idx["region"]].strip()
        if not region:
            raise ParseError("blank region", i, idx["region"] + 1)
        q = Quantity.parse(row[idx["quantity"]])
        unit = row[idx["unit"]].strip()
        if q in units and units[q][0] != unit:
            raise UnitMismatch(
                f"{q.value}: unit {units[q][0]!r} (row {units[q][1]}) vs {unit!r} (row {i})"
            )
        units.setdefault(q, (unit, i))
        year = parse_year(row[idx["year"]], i, idx["year"] + 1)
        text = row[idx["value"]]
        v = _parse_value(text)
        if v is None:
            if text.strip():
                log.warning("skipping non-numeric cell %r at row %d", text, i)
            skipped.append((i, idx["value"] + 1, text))
            continue
        if v <= 0:
            raise NonPositiveValue(f"{region} {year}: value {text!r} is not positive (row {i})")
        slot = points.setdefault((region, q), {})
        if year in slot:
            raise DuplicateYear(f"{region} {q.value}: year {year} appears twice (row {i})")
        slot[year] = v

    series = []
    for (region, q), pts in points.items():
        years = sorted(pts)
        series.append(TimeSeries(region, q, units[q][0], years, [pts[y] for y in years]))
    return (
        RegionalDataset.from_series(series, manifest.provenance),
        dataclasses.replace(manifest, skipped_cells=len(skipped), skipped=tuple(skipped)),
    )


def ingest(source, manifest: IngestManifest):
    if manifest.layout == TIDY:
        return ingest_tidy(source, manifest)
    return ingest_horizontal(source, manifest)


# persistence


def _num(x: float) -> str:
    return format(float(x), ".17g")


def _canonical(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode(
        "utf-8"
    )


def _payload(dataset: RegionalDataset) -> dict:
    regions = {}
    for name, per_q in dataset.regions.items():
        regions[name] = {
            q.value: {
                "unit": s.unit,
                "points": [[_num(t), _num(v)] for t, v in zip(s.t.tolist(), s.v.tolist())],
            }
            for q, s in per_q.items()
        }
    return {"schema": SCHEMA_VERSION, "provenance": dataset.provenance, "regions": regions}


def dumps_dataset(dataset: RegionalDataset) -> str:
    if not dataset.regions:
        raise InvalidDataset("a dataset must contain at least one region")
    payload = _payload(dataset)
    payload["checksum"] = "sha256:" + hashlib.sha256(_canonical(payload)).hexdigest()
    return json.dumps(payload, sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def save_dataset(dataset: RegionalDataset, path) -> None:
    text = dumps_dataset(dataset)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def loads_dataset(text: str) -> RegionalDataset:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptFile(f"not a dataset document: {exc}") from exc
    if not isinstance(doc, dict):
        raise CorruptFile("dataset document must be a JSON object")
    schema = doc.get("schema")
    if schema != SCHEMA_VERSION:
        raise SchemaVersionMismatch(f"expected schema {SCHEMA_VERSION!r}, found {schema!r}")
    stored = doc.pop("checksum", None)
    actual = "sha256:" + hashlib.sha256(_canonical(doc)).hexdigest()
    if stored != actual:
        raise CorruptFile(f"checksum mismatch: stored {stored}, computed {actual}")
    try:
        series = []
        for region, per_q in doc["regions"].items():
            for qname, body in per_q.items():
                pts = body["points"]
                series.append(
                    TimeSeries(
                        region,
                        Quantity.parse(qname),
                        body["unit"],
                        [float(p[0]) for p in pts],
                        [float(p[1]) for p in pts],
                    )
                )
        dataset = RegionalDataset.from_series(series, doc["provenance"])
    except (KeyError, TypeError, IndexError) as exc:
        raise CorruptFile(f"malformed dataset document: {exc!r}") from exc
    if not dataset.regions:
        raise InvalidDataset("dataset document has no regions")
    return dataset


def load_dataset(path) -> RegionalDataset:
    with open(path, encoding="utf-8") as fh:
        return loads_dataset(fh.read())
