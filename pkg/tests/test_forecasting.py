"""Persistence forecasts and the EV availability model."""
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lemsim.core import STEPS_PER_DAY
from lemsim.forecasting import (
    NO_PRICE,
    History,
    forecast_ev_close,
    forecast_naive,
    forecast_naive_average,
    forecast_perfect,
    forecast_price_naive,
)


class TestHistory:
    def test_append_and_read(self):
        hist = History()
        assert len(hist) == 0
        hist.append(5)
        hist.append(-3)
        assert len(hist) == 2
        assert hist.last() == -3
        np.testing.assert_array_equal(hist.values, [5, -3])

    def test_initial_values(self):
        hist = History([1, 2, 3])
        assert len(hist) == 3
        assert hist.last() == 3

    def test_values_view_is_read_only(self):
        hist = History([7])
        with pytest.raises(ValueError):
            hist.values[0] = 0

    def test_last_on_empty_raises(self):
        with pytest.raises(IndexError):
            History().last()

    def test_growth_beyond_initial_buffer(self):
        hist = History()
        for i in range(2500):
            hist.append(i)
        assert len(hist) == 2500
        assert hist.last() == 2499
        np.testing.assert_array_equal(hist.values, np.arange(2500))


class TestNaive:
    def test_empty_history_forecasts_zero(self):
        out = forecast_naive(History(), 5)
        np.testing.assert_array_equal(out, np.zeros(5, dtype=np.int64))

    def test_repeats_day_old_values(self):
        day = list(range(100, 100 + STEPS_PER_DAY))
        hist = History(day)
        out = forecast_naive(hist, STEPS_PER_DAY)
        np.testing.assert_array_equal(out, day)

    def test_short_history_falls_back_to_last_value(self):
        hist = History([10, 20, 30])
        out = forecast_naive(hist, 4)
        np.testing.assert_array_equal(out, [30, 30, 30, 30])

    def test_mixed_known_and_fallback(self):
        # a horizon longer than one day outruns the realized sources and
        # the tail falls back to the last observation
        vals = list(range(STEPS_PER_DAY))
        hist = History(vals)
        out = forecast_naive(hist, STEPS_PER_DAY + 4)
        np.testing.assert_array_equal(out[:STEPS_PER_DAY], vals)
        np.testing.assert_array_equal(out[STEPS_PER_DAY:], [vals[-1]] * 4)

    def test_zero_horizon(self):
        assert forecast_naive(History([1]), 0).shape == (0,)

    def test_negative_horizon_rejected(self):
        with pytest.raises(ValueError):
            forecast_naive(History(), -1)


class TestNaiveAverage:
    def test_single_day_behaves_like_naive(self):
        day = [3 * i for i in range(STEPS_PER_DAY)]
        hist = History(day)
        out = forecast_naive_average(hist, STEPS_PER_DAY)
        np.testing.assert_array_equal(out, day)

    def test_two_days_average_half_away(self):
        day1 = [3] * STEPS_PER_DAY
        day2 = [4] * STEPS_PER_DAY
        hist = History(day1 + day2)
        out = forecast_naive_average(hist, STEPS_PER_DAY)
        # (3 + 4) / 2 = 3.5 rounds away from zero to 4
        np.testing.assert_array_equal(out, [4] * STEPS_PER_DAY)

    def test_exact_mean_when_even(self):
        hist = History([10] * STEPS_PER_DAY + [20] * STEPS_PER_DAY)
        out = forecast_naive_average(hist, 1)
        assert out[0] == 15

    def test_empty_history_forecasts_zero(self):
        np.testing.assert_array_equal(forecast_naive_average(History(), 3),
                                      np.zeros(3, dtype=np.int64))

    @given(st.integers(min_value=0, max_value=5000),
           st.integers(min_value=1, max_value=8))
    def test_constant_history_is_fixed_point(self, value, horizon):
        hist = History([value] * (2 * STEPS_PER_DAY))
        out = forecast_naive_average(hist, horizon)
        assert (out == value).all()


class TestPerfect:
    def test_returns_future_slice(self):
        truth = np.arange(10)
        out = forecast_perfect(truth, 4, 3)
        np.testing.assert_array_equal(out, [4, 5, 6])

    def test_returns_a_copy(self):
        truth = np.arange(5)
        out = forecast_perfect(truth, 0, 5)
        out[0] = 99
        assert truth[0] == 0

    def test_too_short_truth_rejected(self):
        with pytest.raises(ValueError):
            forecast_perfect(np.arange(5), 3, 3)


class TestPriceNaive:
    def test_default_when_no_history(self):
        out = forecast_price_naive(History(), 4, 14700)
        np.testing.assert_array_equal(out, [14700] * 4)

    def test_carries_day_old_prices(self):
        prices = [11000 + i for i in range(STEPS_PER_DAY)]
        out = forecast_price_naive(History(prices), 3, 14700)
        np.testing.assert_array_equal(out, prices[:3])

    def test_uncleared_slots_use_default(self):
        prices = [11000, NO_PRICE, 12000] + [NO_PRICE] * (STEPS_PER_DAY - 3)
        out = forecast_price_naive(History(prices), 3, 14700)
        np.testing.assert_array_equal(out, [11000, 14700, 12000])


class TestEvClose:
    def test_away_vehicle_unknown(self):
        fc = forecast_ev_close(False, None, 40000, now=10, horizon=8)
        assert fc.requirement is None
        assert not fc.availability.any()

    def test_home_without_departure_stays_home(self):
        fc = forecast_ev_close(True, None, 40000, now=10, horizon=8)
        assert fc.requirement is None
        assert fc.availability.all()

    def test_departure_inside_horizon(self):
        # now=10, departure at step 16: offsets 0..4 cover steps 11..15
        fc = forecast_ev_close(True, 16, 40000, now=10, horizon=8)
        np.testing.assert_array_equal(fc.availability,
                                      [1, 1, 1, 1, 1, 0, 0, 0])
        assert fc.requirement == (5, 40000)

    def test_departure_at_horizon_edge_still_binds(self):
        fc = forecast_ev_close(True, 18, 40000, now=10, horizon=7)
        assert fc.availability.all()
        assert fc.requirement == (7, 40000)

    def test_departure_beyond_horizon_unconstrained(self):
        fc = forecast_ev_close(True, 19, 40000, now=10, horizon=7)
        assert fc.availability.all()
        assert fc.requirement is None

    def test_past_departure_treated_as_gone(self):
        fc = forecast_ev_close(True, 11, 40000, now=10, horizon=7)
        assert fc.requirement is None
        assert not fc.availability.any()
