"""Fixed-point arithmetic, value types, and config validation."""
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lemsim.core import (
    SHARE_LEVELS,
    STEPS_PER_DAY,
    STEPS_PER_WEEK,
    STEPS_PER_YEAR,
    TOPOLOGY_PRESETS,
    ConfigError,
    GridTopology,
    InconsistentPrices,
    MarketParams,
    MissingField,
    Scenario,
    TimeSeries,
    UnitOutOfRange,
    UnknownField,
    cash_microeur,
    config_dict,
    round_div_half_away,
    round_div_half_even,
    validate_config,
)


class TestTimeGrid:
    def test_steps_per_week(self):
        assert STEPS_PER_DAY == 96
        assert STEPS_PER_WEEK == 672
        assert STEPS_PER_YEAR == 672 * 52


class TestRounding:
    @pytest.mark.parametrize("num, den, want", [
        (5, 2, 3), (-5, 2, -3), (3, 2, 2), (-3, 2, -2),
        (7, 2, 4), (-7, 2, -4), (10, 4, 3), (14, 4, 4),
        (0, 7, 0), (1, 3, 0), (2, 3, 1),
    ])
    def test_half_away(self, num, den, want):
        assert round_div_half_away(num, den) == want

    @pytest.mark.parametrize("num, den, want", [
        (5, 2, 2), (-5, 2, -2), (3, 2, 2), (-3, 2, -2),
        (7, 2, 4), (10, 4, 2), (14, 4, 4), (1, 3, 0), (2, 3, 1),
    ])
    def test_half_even(self, num, den, want):
        assert round_div_half_even(num, den) == want

    def test_positive_denominator_required(self):
        with pytest.raises(ValueError):
            round_div_half_away(1, 0)
        with pytest.raises(ValueError):
            round_div_half_even(1, -2)

    @given(st.integers(-10**12, 10**12), st.integers(1, 10**6))
    def test_half_away_matches_fraction(self, num, den):
        exact = Fraction(num, den)
        got = round_div_half_away(num, den)
        assert abs(Fraction(got) - exact) <= Fraction(1, 2)
        if abs(Fraction(got) - exact) == Fraction(1, 2):
            assert abs(got) > abs(exact)        # tie went away from zero

    @given(st.integers(-10**12, 10**12), st.integers(1, 10**6))
    def test_half_even_matches_fraction(self, num, den):
        exact = Fraction(num, den)
        got = round_div_half_even(num, den)
        assert abs(Fraction(got) - exact) <= Fraction(1, 2)
        if abs(Fraction(got) - exact) == Fraction(1, 2):
            assert got % 2 == 0                 # tie went to the even side


class TestCash:
    def test_whole_kwh(self):
        assert cash_microeur(1000, 14700) == 147000

    def test_rounds_half_away(self):
        # 50 Wh at 14.70 ct = 7350 tenths of a microeuro, exactly half
        assert cash_microeur(50, 147) == 74
        assert cash_microeur(-50, 147) == -74

    def test_sign_symmetry(self):
        for qty in (1, 7, 333, 1850):
            assert cash_microeur(-qty, 14700) == -cash_microeur(qty, 14700)

    @given(st.integers(-10**7, 10**7), st.integers(0, 100_000))
    def test_cash_is_exact_rational_rounding(self, qty, price):
        got = cash_microeur(qty, price)
        exact = Fraction(qty * price, 100)
        assert abs(Fraction(got) - exact) <= Fraction(1, 2)


class TestTimeSeries:
    def test_window_and_at(self):
        ts = TimeSeries(10, (1, 2, 3, 4), "wh")
        assert len(ts) == 4 and ts.end == 14
        assert ts.at(12) == 3
        win = ts.window(11, 2)
        assert win.values == (2, 3) and win.start == 11

    def test_bounds_checked(self):
        ts = TimeSeries(0, (5, 6), "wh")
        with pytest.raises(IndexError):
            ts.at(2)
        with pytest.raises(IndexError):
            ts.window(1, 2)

    def test_coerces_values_to_tuple(self):
        ts = TimeSeries(0, [1, 2], "wh")
        assert ts.values == (1, 2)
        assert ts.total() == 3


class TestMarketParams:
    def test_defaults_are_valid(self, params):
        assert params.energy_price_buy == 14700
        assert params.feed_in_tariff == 8270
        assert params.levies == 22970
        assert params.balancing_price_buy == 15700
        assert params.balancing_price_sell == 7270
        assert params.clearing_horizon_steps == 96
        assert params.lem_price_floor == 8270
        assert params.lem_price_cap == 14700

    def test_balancing_must_penalize(self):
        with pytest.raises(InconsistentPrices):
            MarketParams(balancing_price_buy=14700).validate()
        with pytest.raises(InconsistentPrices):
            MarketParams(balancing_price_sell=8270).validate()

    def test_floor_above_cap_rejected(self):
        with pytest.raises(InconsistentPrices):
            MarketParams(lem_price_floor=15000).validate()

    def test_levies_must_exceed_spread(self):
        with pytest.raises(InconsistentPrices):
            MarketParams(levies=6000).validate()


class TestTopologies:
    def test_presets(self):
        assert set(TOPOLOGY_PRESETS) == {"countryside", "rural", "suburban",
                                         "urban"}
        rural = TOPOLOGY_PRESETS["rural"]
        assert rural.transformer_kva == 400
        assert rural.residential_count == 57
        assert rural.non_residential_count == 4
        assert rural.agent_count == 61

    def test_validation(self):
        with pytest.raises(UnitOutOfRange):
            GridTopology("x", 0, 10, 0, 1, 1, 1)
        with pytest.raises(UnitOutOfRange):
            GridTopology("x", 100, 0, 0, 1, 1, 1)


class TestScenario:
    def test_share_levels_enforced(self):
        topo = TOPOLOGY_PRESETS["rural"]
        with pytest.raises(UnitOutOfRange):
            Scenario(topo, 30, 0, 0, 1)
        s = Scenario(topo, 100, 50, 25, 7, ("summer",))
        assert s.scenario_id == "rural_pv100_ev50_hp25"

    def test_week_names_checked(self):
        topo = TOPOLOGY_PRESETS["rural"]
        with pytest.raises(UnitOutOfRange):
            Scenario(topo, 100, 0, 0, 1, ("spring",))

    def test_share_levels_constant(self):
        assert SHARE_LEVELS == (0, 25, 50, 75, 100)


class TestConfigValidation:
    def test_empty_document_gives_defaults(self, default_config):
        cfg = default_config
        assert len(cfg.topologies) == 4
        assert cfg.weeks == ("summer", "transition", "winter")
        assert cfg.seed == 1
        assert cfg.burn_in_days == 2
        assert cfg.share_triples is None

    def test_prices_come_in_ct(self):
        cfg = validate_config({"market": {"energy_price_buy_ct": 30.0,
                                          "balancing_price_buy_ct": 31.0,
                                          "levies_ct": 25.0,
                                          "lem_price_cap_ct": 30.0}})
        assert cfg.market.energy_price_buy == 30000
        assert cfg.market.balancing_price_buy == 31000
        assert cfg.market.levies == 25000
        assert cfg.market.lem_price_cap == 30000

    def test_unknown_field_rejected(self):
        with pytest.raises(UnknownField):
            validate_config({"market": {"price_of_tea": 1}})
        with pytest.raises(UnknownField):
            validate_config({"frobnicate": True})

    def test_topology_override_needs_all_fields(self):
        with pytest.raises(MissingField):
            validate_config({"topologies": [{"name": "bespoke"}]})
        cfg = validate_config(
            {"topologies": [{"name": "rural", "transformer_kva": 500}]})
        assert cfg.topologies[0].transformer_kva == 500
        assert cfg.topologies[0].residential_count == 57

    def test_scenarios_shares_validated(self):
        with pytest.raises(UnitOutOfRange):
            validate_config({"scenarios": [
                {"share_pv": 0, "share_ev": 0, "share_hp": 0}]})
        cfg = validate_config({"scenarios": [
            {"share_pv": 100, "share_ev": 50, "share_hp": 50}]})
        assert cfg.share_triples == ((100, 50, 50),)

    def test_trading_horizon_pair(self):
        cfg = validate_config({"hems": {"trading_horizon_steps": [12, 24]}})
        assert cfg.hems.trading_horizon_min == 12
        assert cfg.hems.trading_horizon_max == 24
        with pytest.raises(UnitOutOfRange):
            validate_config({"hems": {"trading_horizon_steps": [4, 8]}})

    def test_round_trip_through_dict(self, default_config):
        raw = config_dict(default_config)
        again = validate_config(raw)
        assert again == default_config

    def test_root_must_be_object(self):
        with pytest.raises(ConfigError):
            validate_config([1, 2, 3])
