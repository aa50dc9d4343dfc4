import io
import json
import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypergrowth.data_io import (
    IngestManifest,
    dumps_dataset,
    ingest,
    ingest_horizontal,
    ingest_tidy,
    load_dataset,
    loads_dataset,
    save_dataset,
)
from hypergrowth.errors import (
    CorruptFile,
    DuplicateYear,
    InvalidDataset,
    NonPositiveValue,
    ParseError,
    SchemaVersionMismatch,
    UnitMismatch,
)
from hypergrowth.series import Quantity, RegionalDataset, TimeSeries

HORIZ = "year,Western Europe,Africa\n1,450,430\n1000,400,425\n1820,1234,420\n"


def horiz(text, **kw):
    return ingest_horizontal(io.StringIO(text), IngestManifest("mem.csv", **kw))


def test_horizontal_example():
    ds, man = horiz(HORIZ)
    we = ds.get("Western Europe", "GDP_per_capita")
    assert we.points() == [(1.0, 450.0), (1000.0, 400.0), (1820.0, 1234.0)]
    assert we.unit
    assert ds.get("Africa", "GDP_per_capita").v.tolist() == [430.0, 425.0, 420.0]
    assert man.skipped_cells == 0


def test_blank_cell_skipped_not_invented():
    ds, man = horiz("year,A,B\n1,450,\n1000,400,425\n")
    assert ds.get("B", "GDP_per_capita").points() == [(1000.0, 425.0)]
    assert man.skipped_cells == 1


def test_non_numeric_cell_logged(caplog):
    with caplog.at_level(logging.WARNING, logger="hypergrowth.data_io"):
        ds, man = horiz("year,A\n1,n/a\n2,5\n")
    assert man.skipped_cells == 1
    assert man.skipped == ((2, 2, "n/a"),)
    assert "n/a" in caplog.text
    assert ds.get("A", "GDP_per_capita").points() == [(2.0, 5.0)]


def test_years_across_orientation():
    text = "region,1,1000,1820\nWestern Europe,450,400,1234\nAfrica,430,425,420\n"
    ds, _ = horiz(text, orientation="years-across")
    ref, _ = horiz(HORIZ)
    assert ds == ref


@pytest.mark.parametrize(
    "text,exc",
    [
        ("year,A\n1,5\n1,6\n", DuplicateYear),
        ("year,A\n1,0\n", NonPositiveValue),
        ("year,A\n1,-3\n", NonPositiveValue),
        ("year,A\n0,3\n", ParseError),
        ("year,A\n2200,3\n", ParseError),
        ("year,A\n1.5,3\n", ParseError),
        ("year,A\nabc,3\n", ParseError),
    ],
)
def test_horizontal_rejections(text, exc):
    with pytest.raises(exc):
        horiz(text)


def test_parse_error_location():
    with pytest.raises(ParseError) as info:
        horiz("year,A\n1,3\nxx,4\n")
    assert (info.value.row, info.value.column) == (3, 1)


TIDY = (
    "region,year,quantity,value,unit\n"
    "Western Europe,1820,GDP,160145,million 1990 GK$\n"
    "Western Europe,1820,population,133040,thousand\n"
)


def test_tidy_example():
    ds, _ = ingest(io.StringIO(TIDY), IngestManifest("t.csv", layout="tidy-csv"))
    assert ds.get("Western Europe", "GDP").points() == [(1820.0, 160145.0)]
    assert ds.get("Western Europe", "GDP").unit == "million 1990 GK$"
    assert ds.get("Western Europe", "population").points() == [(1820.0, 133040.0)]


def test_tidy_unit_mismatch_names_both():
    text = TIDY + "Africa,1820,GDP,1,billion 1990 GK$\n"
    with pytest.raises(UnitMismatch) as info:
        ingest_tidy(io.StringIO(text), IngestManifest("t.csv", layout="tidy-csv"))
    msg = str(info.value)
    assert "million 1990 GK$" in msg and "billion 1990 GK$" in msg


def test_tidy_duplicate():
    text = TIDY + "Western Europe,1820,GDP,5,million 1990 GK$\n"
    with pytest.raises(DuplicateYear):
        ingest_tidy(io.StringIO(text), IngestManifest("t.csv", layout="tidy-csv"))


@settings(max_examples=50)
@given(
    st.lists(
        st.lists(st.one_of(st.just(""), st.just("n/a"), st.floats(0.1, 1e6).map(repr)), min_size=3, max_size=3),
        min_size=1,
        max_size=12,
    )
)
def test_no_silent_invention(cells):
    lines = ["year,A,B,C"] + [f"{1800 + i}," + ",".join(r) for i, r in enumerate(cells)]
    ds, man = horiz("\n".join(lines) + "\n")
    emitted = sum(len(s) for s in ds.all_series())
    assert emitted + man.skipped_cells == 3 * len(cells)
    for j, name in enumerate("ABC"):
        s = ds.get(name, "GDP_per_capita")
        expected = [(1800.0 + i, float(r[j])) for i, r in enumerate(cells) if r[j] not in ("", "n/a")]
        assert (s.points() if s is not None else []) == expected


def random_dataset(rng) -> RegionalDataset:
    series = []
    for r in range(rng.integers(1, 5)):
        quantities = list(Quantity)
        for qi in rng.choice(len(quantities), size=rng.integers(1, 4), replace=False):
            n = int(rng.integers(1, 30))
            t = np.sort(rng.choice(np.arange(-5000, 2100), size=n, replace=False)).astype(float)
            t[t == 0] = 0.5
            v = np.exp(rng.uniform(-300, 300, n)) * rng.uniform(0.5, 2, n)
            series.append(TimeSeries(f"région {r}", quantities[qi], "units", t, v))
    return RegionalDataset.from_series(series, provenance=f"seed-{rng.integers(1 << 30)}")


def test_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(2024)
    for i in range(100):
        ds = random_dataset(rng)
        path = tmp_path / f"d{i}.json"
        save_dataset(ds, path)
        back = load_dataset(path)
        assert back == ds
        for a, b in zip(ds.all_series(), back.all_series()):
            assert a.t.tobytes() == b.t.tobytes() and a.v.tobytes() == b.v.tobytes()
        assert dumps_dataset(back) == path.read_text(encoding="utf-8")


def test_empty_dataset_rejected():
    with pytest.raises(InvalidDataset):
        dumps_dataset(RegionalDataset.from_series([]))


def test_checksum_detects_tampering():
    ds, _ = horiz(HORIZ)
    doc = json.loads(dumps_dataset(ds))
    doc["regions"]["Africa"]["GDP_per_capita"]["points"][0][1] = "431"
    with pytest.raises(CorruptFile):
        loads_dataset(json.dumps(doc))
    with pytest.raises(CorruptFile):
        loads_dataset("{not json")


def test_schema_mismatch():
    ds, _ = horiz(HORIZ)
    doc = json.loads(dumps_dataset(ds))
    doc["schema"] = "hypergrowth/2"
    with pytest.raises(SchemaVersionMismatch):
        loads_dataset(json.dumps(doc))
