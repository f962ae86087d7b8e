"""Base value types, fixed-point arithmetic and configuration handling.

All energy quantities are integer watt-hours (Wh), all prices integer
milli-cent per kWh (Mct, so 14.70 ct/kWh == 14700), and all cash flows
integer micro-euro.  Python ints never overflow silently, which makes the
settlement arithmetic exactly reproducible on every platform.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace

# ---------------------------------------------------------------------------
# time grid
# ---------------------------------------------------------------------------

STEP_MINUTES = 15
STEPS_PER_HOUR = 4
STEPS_PER_DAY = 96
STEPS_PER_WEEK = 7 * STEPS_PER_DAY          # 672
WEEKS_PER_YEAR = 52                         # calendar effects are not modelled
STEPS_PER_YEAR = STEPS_PER_WEEK * WEEKS_PER_YEAR

WEEK_NAMES = ("summer", "transition", "winter")

SHARE_LEVELS = (0, 25, 50, 75, 100)

# Converts a per-step energy in Wh to average power in W (15-minute steps).
WH_PER_STEP_TO_W = 4


# ---------------------------------------------------------------------------
# rounding and cash arithmetic
# ---------------------------------------------------------------------------

def round_div_half_away(num: int, den: int) -> int:
    """num / den rounded to the nearest integer, ties away from zero.

    den must be positive.  Works on exact integers, so the result never
    depends on binary float representation.
    """
    if den <= 0:
        raise ValueError("denominator must be positive")
    if num >= 0:
        return (2 * num + den) // (2 * den)
    return -((-2 * num + den) // (2 * den))


def round_div_half_even(num: int, den: int) -> int:
    """num / den rounded to the nearest integer, ties to the even neighbour."""
    if den <= 0:
        raise ValueError("denominator must be positive")
    sign = 1
    if num < 0:
        sign, num = -1, -num
    q, r = divmod(num, den)
    if 2 * r > den or (2 * r == den and q % 2 == 1):
        q += 1
    return sign * q


def cash_microeur(qty_wh: int, price_mct: int) -> int:
    """Cash flow in micro-euro for an energy quantity at a given price.

    1000 Wh at 14700 Mct is exactly 147000 micro-euro.  Negative quantities
    yield the mirrored negative cash flow (round half away from zero).
    """
    return round_div_half_away(qty_wh * price_mct, 100)


# ---------------------------------------------------------------------------
# time series
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class TimeSeries:
    """Immutable integer series anchored at an absolute timestep."""

    start: int
    values: tuple[int, ...]
    unit: str

    def __post_init__(self) -> None:
        if self.start < 0:
            raise ValueError("series start must be >= 0")
        if not isinstance(self.values, tuple):
            object.__setattr__(self, "values", tuple(int(v) for v in self.values))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end(self) -> int:
        """First timestep after the series."""
        return self.start + len(self.values)

    def at(self, t: int) -> int:
        """Value at absolute timestep t."""
        if not self.start <= t < self.end:
            raise IndexError(f"timestep {t} outside [{self.start}, {self.end})")
        return self.values[t - self.start]

    def window(self, start: int, length: int) -> "TimeSeries":
        """Sub-series of `length` steps beginning at absolute step `start`."""
        if start < self.start or start + length > self.end:
            raise IndexError("window outside series")
        off = start - self.start
        return TimeSeries(start, self.values[off:off + length], self.unit)

    def total(self) -> int:
        return sum(self.values)


# ---------------------------------------------------------------------------
# configuration errors
# ---------------------------------------------------------------------------

class ConfigError(ValueError):
    """Base class for configuration problems."""


class MissingField(ConfigError):
    pass


class UnknownField(ConfigError):
    pass


class UnitOutOfRange(ConfigError):
    pass


class InconsistentPrices(ConfigError):
    pass


# ---------------------------------------------------------------------------
# market and HEMS parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class MarketParams:
    """Tariffs (Mct) and clearing cadence of one simulated market area."""

    energy_price_buy: int = 14700       # retailer price for imported energy
    feed_in_tariff: int = 8270          # fixed price for exported energy
    levies: int = 22970                 # taxes and levies on every import
    balancing_price_buy: int = 15700    # under-coverage penalty price
    balancing_price_sell: int = 7270    # over-delivery penalty price
    clearing_horizon_steps: int = 96
    clearing_interval_steps: int = 1
    lem_price_floor: int = 8270
    lem_price_cap: int = 14700

    def validate(self) -> "MarketParams":
        for name in ("energy_price_buy", "feed_in_tariff", "levies",
                     "balancing_price_buy", "balancing_price_sell",
                     "lem_price_floor", "lem_price_cap"):
            if getattr(self, name) < 0:
                raise UnitOutOfRange(f"market.{name} must be >= 0")
        if self.clearing_horizon_steps < 1:
            raise UnitOutOfRange("market.clearing_horizon_steps must be >= 1")
        if not 1 <= self.clearing_interval_steps <= self.clearing_horizon_steps:
            raise UnitOutOfRange("market.clearing_interval_steps out of range")
        if self.lem_price_floor > self.lem_price_cap:
            raise InconsistentPrices("lem_price_floor above lem_price_cap")
        if self.balancing_price_buy <= self.energy_price_buy:
            raise InconsistentPrices(
                "balancing_price_buy must exceed energy_price_buy")
        if self.balancing_price_sell >= self.feed_in_tariff:
            raise InconsistentPrices(
                "balancing_price_sell must undercut feed_in_tariff")
        if self.feed_in_tariff > self.energy_price_buy:
            raise InconsistentPrices("feed_in_tariff above energy_price_buy")
        # Keeps every scheduling problem bounded: the dearest sell price an
        # agent can expect must stay below the cheapest possible buy price
        # once levies are added.
        if self.lem_price_floor + self.levies <= self.lem_price_cap:
            raise InconsistentPrices(
                "levies too small: buying plus levies must always cost more "
                "than selling earns")
        return self


FORECAST_METHODS = ("naive", "naive_average", "perfect")
EV_FORECAST_METHODS = ("ev_close", "perfect")
PRICE_FORECAST_METHODS = ("naive", "perfect")
STRATEGIES = ("linear",)

TRADING_HORIZON_MIN = 12    # 3 hours
TRADING_HORIZON_MAX = 96    # 24 hours


@dataclass(frozen=True, slots=True)
class HemsParams:
    """Per-agent controller settings."""

    forecast_load: str = "naive_average"
    forecast_heat: str = "naive_average"
    forecast_pv: str = "naive_average"
    forecast_ev: str = "ev_close"
    forecast_price: str = "naive"
    trading_horizon_steps: int = 96
    strategy: str = "linear"

    def validate(self) -> "HemsParams":
        for name in ("forecast_load", "forecast_heat", "forecast_pv"):
            if getattr(self, name) not in FORECAST_METHODS:
                raise UnitOutOfRange(f"hems.{name}: unknown method")
        if self.forecast_ev not in EV_FORECAST_METHODS:
            raise UnitOutOfRange("hems.forecast_ev: unknown method")
        if self.forecast_price not in PRICE_FORECAST_METHODS:
            raise UnitOutOfRange("hems.forecast_price: unknown method")
        if not TRADING_HORIZON_MIN <= self.trading_horizon_steps <= TRADING_HORIZON_MAX:
            raise UnitOutOfRange("hems.trading_horizon_steps out of [12, 96]")
        if self.strategy not in STRATEGIES:
            raise UnitOutOfRange("hems.strategy: unknown strategy")
        return self


# ---------------------------------------------------------------------------
# device specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class FixedLoadSpec:
    load_profile: str


@dataclass(frozen=True, slots=True)
class PvSpec:
    peak_power_w: int
    cf_profile: str                     # capacity factor series, per-mille

    def __post_init__(self) -> None:
        if self.peak_power_w <= 0:
            raise UnitOutOfRange("pv peak power must be > 0")


@dataclass(frozen=True, slots=True)
class BatterySpec:
    capacity_wh: int
    power_w: int
    eta_charge: float = 1.0
    eta_discharge: float = 1.0
    soc_init_wh: int = 0

    def __post_init__(self) -> None:
        if self.capacity_wh <= 0 or self.power_w <= 0:
            raise UnitOutOfRange("battery capacity and power must be > 0")
        if not (0.0 < self.eta_charge <= 1.0 and 0.0 < self.eta_discharge <= 1.0):
            raise UnitOutOfRange("battery efficiency must be in (0, 1]")
        if not 0 <= self.soc_init_wh <= self.capacity_wh:
            raise UnitOutOfRange("battery initial SoC outside capacity")

    @property
    def lossless(self) -> bool:
        return self.eta_charge == 1.0 and self.eta_discharge == 1.0


@dataclass(frozen=True, slots=True)
class EvSpec:
    capacity_wh: int
    charge_power_w: int
    itinerary_profile: str
    eta_charge: float = 1.0
    soc_init_wh: int = 0

    def __post_init__(self) -> None:
        if self.capacity_wh <= 0 or self.charge_power_w <= 0:
            raise UnitOutOfRange("ev capacity and charge power must be > 0")
        if not 0.0 < self.eta_charge <= 1.0:
            raise UnitOutOfRange("ev charge efficiency must be in (0, 1]")
        if not 0 <= self.soc_init_wh <= self.capacity_wh:
            raise UnitOutOfRange("ev initial SoC outside capacity")

    @property
    def lossless(self) -> bool:
        return self.eta_charge == 1.0


@dataclass(frozen=True, slots=True)
class HpSpec:
    """Heat pump with attached sensible thermal storage."""

    max_thermal_w: int
    cop_profile: str                    # centi-COP series (330 => 3.30)
    storage_capacity_wh: int            # thermal Wh
    storage_loss: float = 0.0           # per-step fraction lost
    storage_soc_init_wh: int = 0

    def __post_init__(self) -> None:
        if self.max_thermal_w <= 0:
            raise UnitOutOfRange("hp thermal power must be > 0")
        if self.storage_capacity_wh < 0:
            raise UnitOutOfRange("hp storage capacity must be >= 0")
        if not 0.0 <= self.storage_loss < 1.0:
            raise UnitOutOfRange("hp storage loss must be in [0, 1)")
        if not 0 <= self.storage_soc_init_wh <= max(self.storage_capacity_wh, 1):
            raise UnitOutOfRange("hp storage initial SoC outside capacity")

    @property
    def lossless(self) -> bool:
        return self.storage_loss == 0.0


@dataclass(frozen=True, slots=True)
class HeatDemandSpec:
    heat_profile: str                   # thermal Wh per step


DeviceSpec = (FixedLoadSpec | PvSpec | BatterySpec | EvSpec | HpSpec
              | HeatDemandSpec)


# ---------------------------------------------------------------------------
# grid topologies
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class GridTopology:
    """A representative low-voltage grid with annual demand totals."""

    name: str
    transformer_kva: int
    residential_count: int
    non_residential_count: int
    annual_elec_kwh: int
    annual_heat_kwh: int
    annual_ev_kwh: int

    def __post_init__(self) -> None:
        if self.transformer_kva <= 0:
            raise UnitOutOfRange("transformer rating must be > 0")
        if self.residential_count < 1:
            raise UnitOutOfRange("topology needs at least one residential agent")
        if self.non_residential_count < 0:
            raise UnitOutOfRange("non_residential_count must be >= 0")
        for name in ("annual_elec_kwh", "annual_heat_kwh", "annual_ev_kwh"):
            if getattr(self, name) < 0:
                raise UnitOutOfRange(f"topology.{name} must be >= 0")

    @property
    def agent_count(self) -> int:
        return self.residential_count + self.non_residential_count


TOPOLOGY_PRESETS: dict[str, GridTopology] = {
    "countryside": GridTopology("countryside", 630, 13, 1, 90_000, 875_000, 13_000),
    "rural": GridTopology("rural", 400, 57, 4, 228_000, 1_821_000, 52_000),
    "suburban": GridTopology("suburban", 400, 186, 3, 692_000, 4_866_000, 179_000),
    "urban": GridTopology("urban", 630, 378, 61, 1_581_000, 6_921_000, 212_000),
}


# ---------------------------------------------------------------------------
# scenario description
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Scenario:
    """One point of the sweep: a topology plus device penetration shares."""

    topology: GridTopology
    share_pv: int
    share_ev: int
    share_hp: int
    seed: int
    weeks: tuple[str, ...] = WEEK_NAMES
    lem_enabled: bool = True

    def __post_init__(self) -> None:
        for name in ("share_pv", "share_ev", "share_hp"):
            if getattr(self, name) not in SHARE_LEVELS:
                raise UnitOutOfRange(f"{name} must be one of {SHARE_LEVELS}")
        if not self.weeks:
            raise UnitOutOfRange("scenario needs at least one week")
        for w in self.weeks:
            if w not in WEEK_NAMES:
                raise UnitOutOfRange(f"unknown week kind {w!r}")
        if not isinstance(self.weeks, tuple):
            object.__setattr__(self, "weeks", tuple(self.weeks))

    @property
    def scenario_id(self) -> str:
        return (f"{self.topology.name}_pv{self.share_pv}"
                f"_ev{self.share_ev}_hp{self.share_hp}")


# ---------------------------------------------------------------------------
# device defaults used when instantiating agents
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class DeviceDefaults:
    """Sizing applied to every equipped household.

    The source regions were dimensioned with a cost-optimal planning model on
    proprietary data; at desk scale the sizes below are plain config values
    with typical central European magnitudes.
    """

    pv_peak_w: int = 7000
    battery_capacity_wh: int = 7000
    battery_power_w: int = 4000
    battery_eta_charge: float = 1.0
    battery_eta_discharge: float = 1.0
    ev_capacity_wh: int = 40_000
    ev_charge_power_w: int = 7400
    ev_eta_charge: float = 1.0
    hp_max_thermal_w: int = 12_000
    hp_storage_capacity_wh: int = 12_000
    hp_storage_loss: float = 0.0
    cop_summer_centi: int = 380
    cop_transition_centi: int = 330
    cop_winter_centi: int = 280
    annual_elec_kwh: int = 2900
    annual_heat_kwh: int = 15_000
    ev_weekly_away_kwh: int = 50

    def cop_centi(self, week: str) -> int:
        return {"summer": self.cop_summer_centi,
                "transition": self.cop_transition_centi,
                "winter": self.cop_winter_centi}[week]

    def validate(self) -> "DeviceDefaults":
        for name in ("pv_peak_w", "battery_capacity_wh", "battery_power_w",
                     "ev_capacity_wh", "ev_charge_power_w", "hp_max_thermal_w",
                     "hp_storage_capacity_wh", "cop_summer_centi",
                     "cop_transition_centi", "cop_winter_centi",
                     "annual_elec_kwh", "annual_heat_kwh"):
            if getattr(self, name) <= 0:
                raise UnitOutOfRange(f"devices.{name} must be > 0")
        if self.ev_weekly_away_kwh < 0:
            raise UnitOutOfRange("devices.ev_weekly_away_kwh must be >= 0")
        for name in ("battery_eta_charge", "battery_eta_discharge",
                     "ev_eta_charge"):
            if not 0.0 < getattr(self, name) <= 1.0:
                raise UnitOutOfRange(f"devices.{name} must be in (0, 1]")
        if not 0.0 <= self.hp_storage_loss < 1.0:
            raise UnitOutOfRange("devices.hp_storage_loss must be in [0, 1)")
        return self


@dataclass(frozen=True, slots=True)
class HemsDefaults:
    """Config-level HEMS settings; the trading horizon is drawn per agent."""

    forecast_load: str = "naive_average"
    forecast_heat: str = "naive_average"
    forecast_pv: str = "naive_average"
    forecast_ev: str = "ev_close"
    forecast_price: str = "naive"
    trading_horizon_min: int = TRADING_HORIZON_MIN
    trading_horizon_max: int = TRADING_HORIZON_MAX
    strategy: str = "linear"

    def validate(self) -> "HemsDefaults":
        HemsParams(self.forecast_load, self.forecast_heat, self.forecast_pv,
                   self.forecast_ev, self.forecast_price,
                   self.trading_horizon_min, self.strategy).validate()
        if not (TRADING_HORIZON_MIN <= self.trading_horizon_min
                <= self.trading_horizon_max <= TRADING_HORIZON_MAX):
            raise UnitOutOfRange("hems trading horizon range out of [12, 96]")
        return self

    def for_agent(self, trading_horizon_steps: int) -> HemsParams:
        return HemsParams(self.forecast_load, self.forecast_heat,
                          self.forecast_pv, self.forecast_ev,
                          self.forecast_price, trading_horizon_steps,
                          self.strategy).validate()


@dataclass(frozen=True, slots=True)
class SimConfig:
    """Validated top-level configuration of a study."""

    market: MarketParams
    hems: HemsDefaults
    devices: DeviceDefaults
    topologies: tuple[GridTopology, ...]
    weeks: tuple[str, ...]
    seed: int
    burn_in_days: int = 2
    share_triples: tuple[tuple[int, int, int], ...] | None = None


# ---------------------------------------------------------------------------
# raw-dict validation
# ---------------------------------------------------------------------------

_PRICE_KEYS = {
    "energy_price_buy_ct": "energy_price_buy",
    "feed_in_tariff_ct": "feed_in_tariff",
    "levies_ct": "levies",
    "balancing_price_buy_ct": "balancing_price_buy",
    "balancing_price_sell_ct": "balancing_price_sell",
    "lem_price_floor_ct": "lem_price_floor",
    "lem_price_cap_ct": "lem_price_cap",
}
_MARKET_INT_KEYS = ("clearing_horizon_steps", "clearing_interval_steps")


def _ct_to_mct(value: float, key: str) -> int:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise UnitOutOfRange(f"market.{key} must be a number (ct/kWh)")
    if value < 0 or value > 1000:
        raise UnitOutOfRange(f"market.{key} out of [0, 1000] ct/kWh")
    return round(value * 1000)


def _check_keys(section: str, raw: dict, allowed: set[str]) -> None:
    for key in raw:
        if key not in allowed:
            raise UnknownField(f"{section}.{key} is not a known field")


def _validate_market(raw: dict) -> MarketParams:
    _check_keys("market", raw, set(_PRICE_KEYS) | set(_MARKET_INT_KEYS))
    kwargs = {}
    for key, attr in _PRICE_KEYS.items():
        if key in raw:
            kwargs[attr] = _ct_to_mct(raw[key], key)
    for key in _MARKET_INT_KEYS:
        if key in raw:
            if not isinstance(raw[key], int) or isinstance(raw[key], bool):
                raise UnitOutOfRange(f"market.{key} must be an integer")
            kwargs[key] = raw[key]
    return MarketParams(**kwargs).validate()


def _validate_hems(raw: dict) -> HemsDefaults:
    allowed = {"forecast_load", "forecast_heat", "forecast_pv", "forecast_ev",
               "forecast_price", "trading_horizon_steps", "strategy"}
    _check_keys("hems", raw, allowed)
    kwargs = {k: raw[k] for k in allowed - {"trading_horizon_steps"} if k in raw}
    if "trading_horizon_steps" in raw:
        rng = raw["trading_horizon_steps"]
        if (not isinstance(rng, (list, tuple)) or len(rng) != 2
                or not all(isinstance(v, int) for v in rng)):
            raise UnitOutOfRange(
                "hems.trading_horizon_steps must be a [min, max] pair")
        kwargs["trading_horizon_min"], kwargs["trading_horizon_max"] = rng
    return HemsDefaults(**kwargs).validate()


def _validate_devices(raw: dict) -> DeviceDefaults:
    allowed = {f.name for f in fields(DeviceDefaults)}
    _check_keys("devices", raw, allowed)
    for key, value in raw.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise UnitOutOfRange(f"devices.{key} must be a number")
    return DeviceDefaults(**raw).validate()


def _validate_topology(entry) -> GridTopology:
    if isinstance(entry, str):
        if entry not in TOPOLOGY_PRESETS:
            raise UnitOutOfRange(f"unknown topology {entry!r}")
        return TOPOLOGY_PRESETS[entry]
    if not isinstance(entry, dict):
        raise UnitOutOfRange("topology entries must be names or objects")
    if "name" not in entry:
        raise MissingField("topologies[].name is required")
    allowed = {f.name for f in fields(GridTopology)}
    _check_keys("topologies[]", entry, allowed)
    name = entry["name"]
    base = TOPOLOGY_PRESETS.get(name)
    values = {f.name: getattr(base, f.name) for f in fields(GridTopology)} \
        if base else {}
    values.update(entry)
    missing = {f.name for f in fields(GridTopology)} - set(values)
    if missing:
        raise MissingField(f"topologies[{name!r}] lacks {sorted(missing)}")
    for key, value in values.items():
        if key != "name" and (isinstance(value, bool) or not isinstance(value, int)):
            raise UnitOutOfRange(f"topologies[].{key} must be an integer")
    return GridTopology(**values)


def _validate_share_triple(entry: dict) -> tuple[int, int, int]:
    allowed = {"share_pv", "share_ev", "share_hp"}
    if not isinstance(entry, dict):
        raise UnitOutOfRange("scenarios entries must be objects")
    missing = allowed - set(entry)
    if missing:
        raise MissingField(f"scenarios[] lacks {sorted(missing)}")
    _check_keys("scenarios[]", entry, allowed)
    triple = (entry["share_pv"], entry["share_ev"], entry["share_hp"])
    for name, value in zip(("share_pv", "share_ev", "share_hp"), triple):
        if value not in SHARE_LEVELS:
            raise UnitOutOfRange(f"scenarios[].{name} must be one of {SHARE_LEVELS}")
    if triple[0] == 0:
        raise UnitOutOfRange(
            "scenarios[].share_pv must be > 0: without generation there is "
            "no price formation to simulate")
    return triple


def validate_config(raw: dict) -> SimConfig:
    """Validate a raw config document; every field is optional.

    An empty document yields the full default study (all four preset
    topologies, three weeks, default tariffs).
    """
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    allowed = {"market", "hems", "devices", "topologies", "weeks", "seed",
               "burn_in_days", "scenarios"}
    _check_keys("config", raw, allowed)

    market = _validate_market(raw.get("market", {}))
    hems = _validate_hems(raw.get("hems", {}))
    devices = _validate_devices(raw.get("devices", {}))

    topo_raw = raw.get("topologies", list(TOPOLOGY_PRESETS))
    if not isinstance(topo_raw, list) or not topo_raw:
        raise UnitOutOfRange("topologies must be a non-empty list")
    topologies = tuple(_validate_topology(t) for t in topo_raw)
    if len({t.name for t in topologies}) != len(topologies):
        raise UnitOutOfRange("topology names must be unique")

    weeks_raw = raw.get("weeks", list(WEEK_NAMES))
    if not isinstance(weeks_raw, list) or not weeks_raw:
        raise UnitOutOfRange("weeks must be a non-empty list")
    for w in weeks_raw:
        if w not in WEEK_NAMES:
            raise UnitOutOfRange(f"unknown week kind {w!r}")

    seed = raw.get("seed", 1)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise UnitOutOfRange("seed must be a non-negative integer")

    burn_in = raw.get("burn_in_days", 2)
    if isinstance(burn_in, bool) or not isinstance(burn_in, int) or burn_in < 0:
        raise UnitOutOfRange("burn_in_days must be a non-negative integer")

    share_triples = None
    if "scenarios" in raw:
        if not isinstance(raw["scenarios"], list):
            raise UnitOutOfRange("scenarios must be a list")
        share_triples = tuple(_validate_share_triple(s) for s in raw["scenarios"])

    return SimConfig(market=market, hems=hems, devices=devices,
                     topologies=topologies, weeks=tuple(weeks_raw),
                     seed=seed, burn_in_days=burn_in,
                     share_triples=share_triples)


def config_with(config: SimConfig, **changes) -> SimConfig:
    """Functional update helper for SimConfig."""
    return replace(config, **changes)


def config_dict(config: SimConfig) -> dict:
    """Raw-document form of a SimConfig; validate_config inverts it.

    Prices are emitted in ct/kWh, the unit config files use.
    """
    market = {key: getattr(config.market, attr) / 1000
              for key, attr in _PRICE_KEYS.items()}
    for key in _MARKET_INT_KEYS:
        market[key] = getattr(config.market, key)
    hems = {
        "forecast_load": config.hems.forecast_load,
        "forecast_heat": config.hems.forecast_heat,
        "forecast_pv": config.hems.forecast_pv,
        "forecast_ev": config.hems.forecast_ev,
        "forecast_price": config.hems.forecast_price,
        "trading_horizon_steps": [config.hems.trading_horizon_min,
                                  config.hems.trading_horizon_max],
        "strategy": config.hems.strategy,
    }
    devices = {f.name: getattr(config.devices, f.name)
               for f in fields(DeviceDefaults)}
    raw = {
        "market": market,
        "hems": hems,
        "devices": devices,
        "topologies": [{f.name: getattr(t, f.name) for f in fields(GridTopology)}
                       for t in config.topologies],
        "weeks": list(config.weeks),
        "seed": config.seed,
        "burn_in_days": config.burn_in_days,
    }
    if config.share_triples is not None:
        raw["scenarios"] = [{"share_pv": pv, "share_ev": ev, "share_hp": hp}
                            for pv, ev, hp in config.share_triples]
    return raw
