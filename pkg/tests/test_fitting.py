import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypergrowth.errors import InsufficientData, MismatchedRegions, NoCommonYears, NotGrowthLike
from hypergrowth.fitting import (
    fit_hyperbolic,
    fit_modulated_via_ratio,
    reciprocal_transform,
    residual_series,
)
from hypergrowth.models import HyperbolicModel, ModulatedHyperbolicModel
from hypergrowth.series import Quantity, TimeSeries

from conftest import hyperbolas, series_from


def ts(points, region="R", quantity=Quantity.GDP):
    return TimeSeries.from_points(points, region, quantity)


def test_reciprocal_transform_definition():
    out = reciprocal_transform(ts([(0, 1), (100, 2)]))
    np.testing.assert_array_equal(out, [[0, 1.0], [100, 0.5]])
    out = reciprocal_transform(ts([(0, 4), (10, 5)]))
    assert tuple(out[0]) == (0, 0.25)


def test_reciprocal_transform_of_hyperbola_is_the_line():
    m = HyperbolicModel(0.1, 0.0005)
    t = np.linspace(0, 180, 20)
    out = reciprocal_transform(series_from(m, t))
    np.testing.assert_allclose(out[:, 1], 0.1 - 0.0005 * t, rtol=1e-13)


def test_two_point_fit_solves_the_system():
    # 1/v = a - k t through (0, 1) and (100, 0.5) -> a = 1, k = 0.005
    rep = fit_hyperbolic(ts([(0, 1), (100, 2)]))
    assert rep.model.a == pytest.approx(1.0, rel=1e-14)
    assert rep.model.k == pytest.approx(0.005, rel=1e-14)
    assert rep.r_squared_reciprocal == pytest.approx(1.0)
    assert rep.window == (0.0, 100.0)


def test_noiseless_recovery_example():
    m = HyperbolicModel(0.1, 0.0005)
    rep = fit_hyperbolic(series_from(m, np.linspace(0, 180, 20)))
    assert rep.model.a == pytest.approx(0.1, rel=1e-9)
    assert rep.model.k == pytest.approx(0.0005, rel=1e-9)
    assert rep.rms_relative_residual < 1e-12
    assert rep.residuals.size == 20


def test_constant_series():
    rep = fit_hyperbolic(ts([(t, 5.0) for t in range(1800, 1820)]))
    assert rep.model.a == pytest.approx(0.2, rel=1e-14)
    assert rep.model.k == 0.0
    assert rep.rms_relative_residual == pytest.approx(0.0, abs=1e-15)
    assert rep.r_squared_reciprocal == 1.0


def test_insufficient_data():
    with pytest.raises(InsufficientData):
        fit_hyperbolic(ts([(0, 1)]))
    with pytest.raises(InsufficientData):
        fit_hyperbolic(ts([(0, 1), (10, 2), (20, 3)]), window=(5, 15))


def test_decaying_series_flagged():
    with pytest.raises(NotGrowthLike) as info:
        fit_hyperbolic(ts([(0, 4), (1, 2), (2, 1)]))
    assert info.value.slope > 0


def test_window_restricts_points():
    m = HyperbolicModel(0.1, 0.0005)
    t = np.arange(0, 200, 10.0)
    v = m(t)
    v[t > 150] *= 0.5  # later departure must not affect the windowed fit
    rep = fit_hyperbolic(ts(zip(t, v)), window=(0, 150))
    assert rep.window == (0.0, 150.0)
    assert rep.model.k == pytest.approx(0.0005, rel=1e-9)
    assert rep.n_points == 16


@given(hyperbolas(), st.integers(2, 40), st.floats(-1.0, 0.5), st.floats(0.05, 0.45))
def test_exact_recovery(m, n, start_frac, width_frac):
    t0 = start_frac * m.singularity
    t = np.linspace(t0, t0 + width_frac * m.singularity, n)
    rep = fit_hyperbolic(series_from(m, t))
    assert rep.model.a == pytest.approx(m.a, rel=1e-9)
    assert rep.model.k == pytest.approx(m.k, rel=1e-9)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_regression_optimality(seed):
    rng = np.random.default_rng(seed)
    m = HyperbolicModel(0.1, 0.0005)
    t = np.sort(rng.uniform(0, 190, 15))
    v = m(t) * np.exp(rng.normal(0, 0.05, t.size))
    rep = fit_hyperbolic(ts(zip(t, v)))
    y = 1 / v

    def sse(a, k):
        return np.sum((y - (a - k * t)) ** 2)

    best = sse(rep.model.a, rep.model.k)
    for da in (-1e-3, 0, 1e-3):
        for dk in (-1e-3, 0, 1e-3):
            assert sse(rep.model.a * (1 + da), rep.model.k * (1 + dk)) >= best * (1 - 1e-12)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_order_invariance(seed):
    rng = np.random.default_rng(seed)
    t = np.arange(1500.0, 1900.0, 20.0)
    v = HyperbolicModel(0.02, 1e-5)(t) * np.exp(rng.normal(0, 0.02, t.size))
    perm = rng.permutation(t.size)
    a = fit_hyperbolic(ts(zip(t, v)))
    b = fit_hyperbolic(ts(zip(t[perm], v[perm])))
    assert (a.model.a, a.model.k) == (b.model.a, b.model.k)


def test_modulated_via_ratio_noiseless():
    g = HyperbolicModel(0.1, 0.0005)
    p = HyperbolicModel(1.0, 0.001)
    t = np.linspace(0, 180, 19)
    model, rep = fit_modulated_via_ratio(
        series_from(g, t, "X", Quantity.GDP), series_from(p, t, "X", Quantity.POPULATION)
    )
    # (1 - 0) / (0.1 - 0)
    assert model(0.0) == pytest.approx(10.0, rel=1e-12)
    assert model.numerator == pytest.approx((1.0, 0.001), rel=1e-9)
    assert model.denominator == pytest.approx((0.1, 0.0005), rel=1e-9)
    np.testing.assert_allclose(rep.residuals, 0, atol=1e-12)


def test_modulated_constant_population_is_scaled_gdp():
    g = HyperbolicModel(0.1, 0.0005)
    t = np.linspace(0, 180, 10)
    model, _ = fit_modulated_via_ratio(
        series_from(g, t, "X", Quantity.GDP),
        ts([(x, 7.0) for x in t], "X", Quantity.POPULATION),
    )
    ratio = model(t) / g(t)
    np.testing.assert_allclose(ratio, 1 / 7.0, rtol=1e-9)


def test_modulated_identical_series_is_unity():
    g = HyperbolicModel(0.1, 0.0005)
    t = np.linspace(0, 180, 10)
    model, rep = fit_modulated_via_ratio(
        series_from(g, t, "X", Quantity.GDP), series_from(g, t, "X", Quantity.POPULATION)
    )
    np.testing.assert_allclose(model(np.linspace(0, 190, 50)), 1.0, rtol=1e-12)


def test_modulated_ratio_construction_matches_separate_fits():
    rng = np.random.default_rng(7)
    t = np.arange(1000.0, 1900.0, 50.0)
    gdp = ts(zip(t, HyperbolicModel(0.05, 2.5e-5)(t) * np.exp(rng.normal(0, 0.03, t.size))), "X")
    pop = ts(
        zip(t, HyperbolicModel(0.02, 9e-6)(t) * np.exp(rng.normal(0, 0.03, t.size))),
        "X",
        Quantity.POPULATION,
    )
    model, _ = fit_modulated_via_ratio(gdp, pop)
    g, p = fit_hyperbolic(gdp).model, fit_hyperbolic(pop).model
    for year in t:
        assert model(year) == pytest.approx(g(year) / p(year), rel=1e-12)


def test_modulated_uses_supplied_per_capita():
    g = HyperbolicModel(0.1, 0.0005)
    p = HyperbolicModel(1.0, 0.001)
    t = np.linspace(0, 180, 10)
    pc = series_from(ModulatedHyperbolicModel(p, g), t[::3], "X", scale=1.1)
    _, rep = fit_modulated_via_ratio(
        series_from(g, t, "X", Quantity.GDP),
        series_from(p, t, "X", Quantity.POPULATION),
        per_capita=pc,
    )
    assert rep.n_points == 4
    np.testing.assert_allclose(rep.residuals, 0.1, rtol=1e-9)


def test_modulated_errors():
    m = HyperbolicModel(1.0, 0.001)
    t = [0.0, 10.0, 20.0]
    g = series_from(m, t, "A", Quantity.GDP)
    with pytest.raises(MismatchedRegions):
        fit_modulated_via_ratio(g, series_from(m, t, "B", Quantity.POPULATION))
    with pytest.raises(NoCommonYears):
        fit_modulated_via_ratio(g, ts([(1.0, 1), (2.0, 2)], "A", Quantity.POPULATION))


def test_residual_series_cases():
    m = HyperbolicModel(0.1, 0.0005)
    t = np.linspace(0, 180, 7)
    _, r = residual_series(series_from(m, t), m)
    np.testing.assert_allclose(r, 0, atol=1e-12)
    _, r = residual_series(series_from(m, t, scale=1.1), m)
    np.testing.assert_allclose(r, 0.1, rtol=1e-12)
    v = m(t)
    v[3] *= 2  # (2 m - m) / m = 1
    years, r = residual_series(ts(zip(t, v)), m)
    np.testing.assert_array_equal(years, t)
    expected = np.zeros(7)
    expected[3] = 1.0
    np.testing.assert_allclose(r, expected, atol=1e-12)
