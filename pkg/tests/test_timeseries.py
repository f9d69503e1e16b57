import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vgvalid.timeseries import (
    DataError, PriceSeries, ReturnSeries, VolatilitySeries, compute_returns,
    historical_volatility, load_csv, prices_from_returns, slice_series,
)


def test_load_csv_basic():
    p = load_csv(b"date,close\n2020-01-01,100\n2020-01-02,110")
    assert p.values.tolist() == [100.0, 110.0]
    assert p.labels == ("2020-01-01", "2020-01-02")


def test_load_csv_zero_price_names_row():
    data = b"date,close\n2020-01-01,100\n2020-01-02,101\n2020-01-03,0\n2020-01-04,99\n"
    with pytest.raises(DataError) as exc:
        load_csv(data)
    assert exc.value.row == 3
    assert "row 3" in str(exc.value)


@pytest.mark.parametrize(
    "data",
    [b"", b"date,price\n2020-01-01,1\n2020-01-02,2\n", b"date,close\n2020-01-01,1\n",
     b"date,close\n2020-01-01,abc\n2020-01-02,2\n"],
    ids=["empty", "missing-column", "one-row", "unparsable"],
)
def test_load_csv_errors(data):
    with pytest.raises(DataError):
        load_csv(data)


def test_load_csv_large_random_walk(tmp_path):
    rng = np.random.default_rng(7)
    prices = 100 * np.exp(np.cumsum(0.01 * rng.standard_normal(10_000)))
    path = tmp_path / "gbm.csv"
    with open(path, "w") as fh:
        fh.write("date,close\n")
        for k, p in enumerate(prices):
            fh.write(f"d{k:05d},{float(p)!r}\n")
    series = load_csv(path)
    assert len(series) == 10_000
    np.testing.assert_array_equal(series.values, prices)


def test_load_csv_stream_custom_columns_and_comments():
    data = b"# provenance line\nwhen;x\n".replace(b";", b",") + b"a,1.5\nb,2.5\n"
    p = load_csv(io.BytesIO(data), price_column="x", date_column="when")
    assert p.values.tolist() == [1.5, 2.5]
    assert p.labels == ("a", "b")


def test_labels_must_increase():
    with pytest.raises(DataError):
        PriceSeries([1.0, 2.0], ("2020-01-02", "2020-01-01"))


def test_compute_returns():
    p = PriceSeries([100.0, 110.0, 99.0])
    np.testing.assert_allclose(compute_returns(p, "raw").values, [0.10, -0.10])
    np.testing.assert_allclose(compute_returns(p, "percent").values, [10.0, -10.0])
    np.testing.assert_array_equal(compute_returns(PriceSeries([5.0] * 4)).values, [0, 0, 0])
    assert len(compute_returns(p)) == len(p) - 1


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.01, 1e4), min_size=2, max_size=200), st.sampled_from(["raw", "percent"]))
def test_returns_roundtrip(values, scale):
    p = PriceSeries(values)
    back = prices_from_returns(compute_returns(p, scale), values[0])
    np.testing.assert_allclose(back.values, p.values, rtol=1e-9)


def test_historical_volatility():
    assert historical_volatility([1.0, -1.0], 2) == pytest.approx(np.sqrt(2), abs=1e-12)
    assert historical_volatility([3.0] * 10, 7) == 0.0
    draws = np.random.default_rng(1).standard_normal(100_000)
    assert historical_volatility(draws) == pytest.approx(1.0, abs=0.01)
    with pytest.raises(ValueError):
        historical_volatility([1.0, 2.0], 1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=2, max_size=100))
def test_historical_volatility_sign_invariant(r):
    r = np.array(r)
    assert historical_volatility(r) == historical_volatility(-r)


def test_slice():
    s = VolatilitySeries([1.0, 2.0, 3.0, 4.0, 5.0], tuple("abcde"))
    part = slice_series(s, 2, 3)
    assert part.values.tolist() == [2.0, 3.0, 4.0]
    assert part.labels == ("b", "c", "d")
    assert slice_series(s, 1, 5) == s
    with pytest.raises(IndexError):
        slice_series(s, 4, 5)


@given(st.integers(1, 30), st.data())
def test_slice_reslice_idempotent(n, data):
    s = ReturnSeries(np.arange(n, dtype=float))
    a = data.draw(st.integers(1, n))
    b = data.draw(st.integers(0, n - a + 1))
    once = slice_series(s, a, b)
    assert slice_series(once, 1, b) == once


def test_series_are_read_only():
    s = ReturnSeries([1.0, 2.0])
    with pytest.raises(ValueError):
        s.values[0] = 3.0
