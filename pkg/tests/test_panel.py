import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mstprune.exceptions import BoundsError, DomainError, InsufficientDataError, ParseError, SchemaError
from mstprune.panel import (
    PricePanel, ReturnPanel, load_metadata, load_panel, load_returns, log_returns,
    prices_from_returns, shuffle_returns, slice_window, synth_gaussian, synthetic_dates,
    write_prices, write_returns,
)

CSV = b"date,A,B\n2020-01-01,1,2\n2020-01-02,2,3\n2020-01-03,4,5\n"


def test_load_panel_all_present():
    p = load_panel(CSV)
    assert p.shape == (3, 2)
    assert p.tickers == ("A", "B")
    assert p.dropped_rows == 0


def test_load_panel_drops_rows_with_missing_cells(caplog):
    p = load_panel(b"date,A,B\n2020-01-01,1,2\n2020-01-02,,3\n2020-01-03,4,5\n")
    assert p.shape == (2, 2)
    assert p.dropped_rows == 1
    assert "dropped 1" in caplog.text


def test_load_panel_rejects_zero_price():
    with pytest.raises(DomainError):
        load_panel(b"date,A,B\n2020-01-01,0.0,2\n2020-01-02,1,3\n")


def test_load_panel_reports_row_of_bad_date():
    with pytest.raises(ParseError, match="row 3"):
        load_panel(b"date,A\n2020-01-01,1\n2020-13-02,2\n")


def test_load_panel_rejects_duplicate_ticker():
    with pytest.raises(SchemaError):
        load_panel(b"date,A,A\n2020-01-01,1,2\n")


def test_load_panel_rejects_unsorted_dates():
    with pytest.raises(ParseError):
        load_panel(b"date,A\n2020-01-02,1\n2020-01-01,2\n")


def test_load_panel_accepts_text_and_streams():
    assert load_panel(CSV.decode()).shape == (3, 2)
    assert load_panel(io.BytesIO(CSV)).shape == (3, 2)


def test_metadata_merge():
    regions = load_metadata("ticker,region\nA,america\nB,europe\n")
    p = load_panel(CSV, regions=regions)
    assert p.regions == ("america", "europe")
    assert log_returns(p).regions == ("america", "europe")


def test_panel_is_immutable():
    p = load_panel(CSV)
    with pytest.raises(ValueError):
        p.prices[0, 0] = 5.0


def test_log_returns_of_e_powers():
    p = PricePanel(("A",), synthetic_dates(3), [[1.0], [math.e], [math.e ** 2]])
    np.testing.assert_allclose(log_returns(p).returns[:, 0], [1.0, 1.0], rtol=1e-15)


def test_log_returns_constant_prices():
    p = PricePanel(("A",), synthetic_dates(3), [[5.0], [5.0], [5.0]])
    assert log_returns(p).returns[:, 0].tolist() == [0.0, 0.0]


def test_log_returns_single_step():
    p = PricePanel(("A",), synthetic_dates(2), [[100.0], [105.0]])
    r = log_returns(p)
    assert r.returns[0, 0] == pytest.approx(math.log(1.05), abs=1e-15)
    assert r.returns[0, 0] == pytest.approx(0.048790, abs=5e-7)
    assert r.dates == p.dates[1:]


def test_log_returns_needs_two_dates():
    with pytest.raises(InsufficientDataError):
        log_returns(PricePanel(("A",), synthetic_dates(1), [[1.0]]))


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 30), st.integers(1, 4)),
              elements=st.floats(-0.2, 0.2, allow_nan=False)))
def test_price_reconstruction_roundtrip(R):
    r = ReturnPanel.from_array(R)
    p = prices_from_returns(r, start=100.0)
    back = log_returns(p)
    rebuilt = 100.0 * np.exp(np.vstack([np.zeros(R.shape[1]), np.cumsum(back.returns, axis=0)]))
    np.testing.assert_allclose(rebuilt, p.prices, rtol=1e-12)


def test_shuffle_single_row_unchanged():
    r = ReturnPanel.from_array([[1.0, 2.0, 3.0]])
    assert np.array_equal(shuffle_returns(r, 3).returns, r.returns)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 40), st.integers(1, 5)),
              elements=st.floats(-5, 5, allow_nan=False)),
       st.integers(0, 2 ** 64 - 1))
def test_shuffle_preserves_sorted_columns(R, seed):
    r = ReturnPanel.from_array(R)
    s = shuffle_returns(r, seed)
    assert np.array_equal(np.sort(s.returns, axis=0), np.sort(R, axis=0))


def test_shuffle_is_deterministic_and_seed_sensitive():
    r = synth_gaussian(5, 50, seed=1)
    a, b = shuffle_returns(r, 7), shuffle_returns(r, 7)
    assert np.array_equal(a.returns, b.returns)
    assert not np.array_equal(a.returns, shuffle_returns(r, 8).returns)


def test_synth_shapes_and_labels():
    r = synth_gaussian(40, 125, 0.0, 2.0, seed=3)
    assert r.shape == (125, 40)
    assert r.tickers[0] == "R001" and r.tickers[-1] == "R040"
    assert synth_gaussian(2, 4, 0.0, 1.0, seed=3).shape == (4, 2)


def test_synth_is_bit_identical_for_equal_seeds():
    a = synth_gaussian(3, 10, 0.0, 2.0, seed=99)
    b = synth_gaussian(3, 10, 0.0, 2.0, seed=99)
    assert a.returns.tobytes() == b.returns.tobytes()


def test_synth_sample_mean():
    # 1e5 draws with std 2: standard error 0.0063, so 0.02 is over 3 sigma
    r = synth_gaussian(2, 50_000, 0.0, 2.0, seed=12345)
    assert abs(r.returns.mean()) < 0.02


@pytest.mark.parametrize("kwargs", [dict(std=0.0), dict(std=-1.0), dict(n_series=1), dict(length=3)])
def test_synth_rejects_bad_arguments(kwargs):
    args = dict(n_series=2, length=4, mean=0.0, std=1.0, seed=0) | kwargs
    with pytest.raises(DomainError):
        synth_gaussian(**args)


def test_slice_window_bounds():
    r = synth_gaussian(2, 10, seed=0)
    assert np.array_equal(slice_window(r, 0, 10).returns, r.returns)
    last = slice_window(r, 9, 1)
    assert last.shape == (1, 2) and np.array_equal(last.returns[0], r.returns[9])
    with pytest.raises(BoundsError):
        slice_window(r, 5, 6)


def test_return_and_price_csv_roundtrip():
    r = synth_gaussian(3, 20, seed=4)
    buf = io.StringIO()
    write_returns(r, buf)
    back = load_returns(buf.getvalue())
    assert back.tickers == r.tickers and back.dates == r.dates
    assert np.array_equal(back.returns, r.returns)

    p = prices_from_returns(r)
    buf = io.StringIO()
    write_prices(p, buf)
    back = load_panel(buf.getvalue())
    assert np.array_equal(back.prices, p.prices)


def test_degenerate_columns_flagged():
    r = ReturnPanel.from_array([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]], tickers=["A", "FLAT"])
    assert r.degenerate_columns() == ["FLAT"]
