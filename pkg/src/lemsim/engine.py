"""Scenario execution: per-step market cycle, meters, and persistence.

Each selected week is simulated independently with fresh state: a
burn-in of config.burn_in_days replaying the week's first days warms up
histories and device charge, then the full week runs.  Steps are
indexed on one local timeline (burn-in first); persisted results carry
the concatenated timeline and record which steps are metered.

With the market enabled every step runs the agent cycle (ingest
results, dispatch, refresh forecasts, re-plan, repost orders), clears
every open delivery slot, settles the next slot's residual at wholesale
terms, and prices this step's deviation at balancing terms.  Without a
market only dispatch runs and the metered exchange settles at wholesale
terms directly, so the imbalance is zero by construction.

Prices are endogenous, so the "perfect" method applies to exogenous
series only; a perfect price forecast falls back to the naive rule.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    STEPS_PER_DAY,
    STEPS_PER_WEEK,
    WH_PER_STEP_TO_W,
    BatterySpec,
    EvSpec,
    FixedLoadSpec,
    HeatDemandSpec,
    HpSpec,
    MarketParams,
    PvSpec,
    Scenario,
    SimConfig,
    cash_microeur,
)
from .forecasting import (
    NO_PRICE,
    EvForecast,
    History,
    forecast_ev_close,
    forecast_naive,
    forecast_naive_average,
)
from .hems import (
    Actuals,
    AgentDevices,
    DeviceState,
    DispatchPlan,
    ForecastBundle,
    make_orders,
    plan_schedule,
    realtime_dispatch,
)
from .market import (
    OrderBook,
    clear_auction,
    settle_balancing,
    wholesale_gate,
)
from .profiles import EvItinerary, EvTrip, ProfileSet, pv_generation
from .scenarios import Agent, AgentRoster, assign_devices

CLEARING_RULE = "midpoint"

# margin added to the feed-in tariff when valuing battery charge that a
# plan still holds at its horizon edge; any positive value breaks the
# tie between selling now and keeping the energy, see plan_schedule
HOLD_MARGIN_MCT = 100

LEDGER_FIELDS = (
    "grid_import_wh", "grid_export_wh",
    "pv_generated_wh", "pv_curtailed_wh", "pv_exported_wh",
    "self_consumed_wh",
    "lem_buy_wh", "lem_sell_wh", "lem_buy_cash", "lem_sell_cash",
    "wholesale_buy_wh", "wholesale_sell_wh",
    "wholesale_buy_cash", "wholesale_sell_cash",
    "balancing_buy_wh", "balancing_sell_wh",
    "balancing_buy_cash", "balancing_sell_cash",
)


@dataclass(frozen=True)
class TradeRow:
    delivery_step: int
    clearing_step: int
    buyer: str
    seller: str
    qty_wh: int
    price_mct: int


@dataclass
class RunResult:
    """Everything one scenario run produced, on one concatenated timeline."""

    scenario_id: str
    topology: str
    shares: tuple[int, int, int]
    lem_enabled: bool
    seed: int
    weeks: tuple[str, ...]
    burn_in_steps: int                  # per week
    steps_per_week: int                 # burn-in + metered
    agent_ids: tuple[str, ...]
    fields: dict[str, np.ndarray]       # (n_agents, total_steps) int64
    flow_w: np.ndarray                  # signed W per step, + = into the grid
    trades: tuple[TradeRow, ...]
    market: MarketParams

    @property
    def total_steps(self) -> int:
        return len(self.flow_w)

    def metered_mask(self) -> np.ndarray:
        steps = np.arange(self.total_steps)
        return (steps % self.steps_per_week) >= self.burn_in_steps

    def net_exchange(self) -> np.ndarray:
        return self.fields["grid_import_wh"] - self.fields["grid_export_wh"]


def transformer_flow(grid_import_wh: np.ndarray,
                     grid_export_wh: np.ndarray) -> np.ndarray:
    """Signed transformer power in W from per-agent step energies."""
    net = np.asarray(grid_import_wh, np.int64) - np.asarray(grid_export_wh,
                                                            np.int64)
    if net.ndim == 2:
        net = net.sum(axis=0)
    return net * WH_PER_STEP_TO_W


# ---------------------------------------------------------------------------
# local-timeline preparation
# ---------------------------------------------------------------------------

def _replay(values, burn_in: int) -> np.ndarray:
    """Week series extended to the local timeline: first days replayed."""
    arr = np.asarray(values, np.int64)
    return np.concatenate([arr[:burn_in], arr])


def _local_itinerary(itinerary: EvItinerary, burn_in: int) -> EvItinerary:
    """Itinerary on the local timeline; trips crossing the seam dropped."""
    trips = [t for t in itinerary.trips if t.arrive_step <= burn_in]
    trips += [EvTrip(t.depart_step + burn_in, t.arrive_step + burn_in,
                     t.away_wh) for t in itinerary.trips]
    return EvItinerary(tuple(trips))


def _hems_devices(agent: Agent) -> AgentDevices:
    pv = agent.find(PvSpec)
    return AgentDevices(
        pv_peak_w=pv.peak_power_w if pv else 0,
        battery=agent.find(BatterySpec),
        ev=agent.find(EvSpec),
        hp=agent.find(HpSpec),
        has_heat_demand=agent.find(HeatDemandSpec) is not None)


class _Runtime:
    """Mutable per-agent state for one simulated week."""

    __slots__ = ("idx", "agent", "devices", "state", "load", "pv", "heat",
                 "itinerary", "was_home", "plan", "contracted",
                 "load_hist", "pv_hist", "heat_hist")

    def __init__(self, idx: int, agent: Agent, devices: AgentDevices,
                 load: np.ndarray, pv: np.ndarray, heat: np.ndarray,
                 itinerary: EvItinerary | None, total_steps: int) -> None:
        self.idx = idx
        self.agent = agent
        self.devices = devices
        batt = devices.battery
        ev = devices.ev
        hp = devices.hp
        self.state = DeviceState(
            battery_soc=batt.soc_init_wh if batt else 0,
            ev_soc=ev.soc_init_wh if ev else 0,
            ev_present=itinerary.is_home(0) if itinerary else True,
            thermal_soc=hp.storage_soc_init_wh if hp else 0)
        self.load = load
        self.pv = pv
        self.heat = heat
        self.itinerary = itinerary
        self.was_home = self.state.ev_present
        self.plan: DispatchPlan | None = None
        self.contracted = np.zeros(total_steps, np.int64)
        self.load_hist = History()
        self.pv_hist = History()
        self.heat_hist = History()


# ---------------------------------------------------------------------------
# one week of simulation
# ---------------------------------------------------------------------------

class WeekSim:
    """Drives one week (burn-in + metered) for every agent of a roster."""

    def __init__(self, roster: AgentRoster, profiles: ProfileSet, week: str,
                 params: MarketParams, lem_enabled: bool,
                 burn_in_steps: int) -> None:
        self.params = params
        self.lem_enabled = lem_enabled
        self.burn_in = burn_in_steps
        self.total = burn_in_steps + STEPS_PER_WEEK
        self.week = week
        self.hold_value = params.feed_in_tariff + HOLD_MARGIN_MCT
        self.cop_centi = 0
        self.agents: list[_Runtime] = []
        self._by_id: dict[str, _Runtime] = {}
        for idx, agent in enumerate(roster.agents):
            devices = _hems_devices(agent)
            load_spec = agent.find(FixedLoadSpec)
            load = _replay(
                profiles.series(load_spec.load_profile, week).values,
                burn_in_steps)
            if devices.pv_peak_w:
                pv_spec = agent.find(PvSpec)
                cf = profiles.series(pv_spec.cf_profile, week)
                pv = _replay(pv_generation(pv_spec.peak_power_w, cf).values,
                             burn_in_steps)
            else:
                pv = np.zeros(self.total, np.int64)
            heat_spec = agent.find(HeatDemandSpec)
            heat = _replay(
                profiles.series(heat_spec.heat_profile, week).values,
                burn_in_steps) if heat_spec else np.zeros(self.total, np.int64)
            if devices.hp is not None:
                self.cop_centi = int(
                    profiles.series(devices.hp.cop_profile, week).values[0])
            itinerary = None
            if devices.ev is not None:
                itinerary = _local_itinerary(
                    profiles.itinerary(devices.ev.itinerary_profile, week),
                    burn_in_steps)
            rt = _Runtime(idx, agent, devices, load, pv, heat, itinerary,
                          self.total)
            self.agents.append(rt)
            self._by_id[agent.agent_id] = rt
        self.fields = {name: np.zeros((len(self.agents), self.total), np.int64)
                       for name in LEDGER_FIELDS}
        self.book = OrderBook()
        self.price_hist = History()
        self.slot_price = np.full(self.total, NO_PRICE, np.int64)
        self.trades: list[TradeRow] = []

    # -- forecasting ------------------------------------------------------

    def _series_forecast(self, method: str, hist: History, truth: np.ndarray,
                         now: int, horizon: int) -> np.ndarray:
        if method == "naive":
            return forecast_naive(hist, horizon)
        if method == "naive_average":
            return forecast_naive_average(hist, horizon)
        return truth[now + 1:now + 1 + horizon].copy()

    def _ev_forecast(self, rt: _Runtime, now: int,
                     horizon: int) -> EvForecast | None:
        ev = rt.devices.ev
        if ev is None or rt.itinerary is None:
            return None
        method = rt.agent.hems.forecast_ev
        home = rt.itinerary.is_home(now)
        if method == "perfect":
            avail = np.asarray(
                [1 if rt.itinerary.is_home(now + 1 + k) else 0
                 for k in range(horizon)], np.int64)
            nxt = rt.itinerary.next_departure(now + 1)
            requirement = None
            if nxt is not None:
                dep_off = nxt - (now + 1)
                if 1 <= dep_off <= horizon:
                    requirement = (dep_off, ev.capacity_wh)
            return EvForecast(avail, requirement)
        departure = rt.itinerary.next_departure(now + 1) if home else None
        return forecast_ev_close(home, departure, ev.capacity_wh, now,
                                 horizon)

    def _bundle(self, rt: _Runtime, now: int, horizon: int) -> ForecastBundle:
        hems = rt.agent.hems
        load = self._series_forecast(hems.forecast_load, rt.load_hist,
                                     rt.load, now, horizon)
        if rt.devices.pv_peak_w:
            pv = self._series_forecast(hems.forecast_pv, rt.pv_hist, rt.pv,
                                       now, horizon)
            # plan against a low quantile, not the point estimate: a sale
            # committed on sunshine that fails costs the balancing spread
            # plus levies, while sunshine beyond the plan is banked by the
            # battery and sold later at the same price, so the cheap side
            # of the forecast error is the only safe side to plan on
            pv -= pv // 10
        else:
            pv = np.zeros(horizon, np.int64)
        if rt.devices.hp is not None:
            heat = self._series_forecast(hems.forecast_heat, rt.heat_hist,
                                         rt.heat, now, horizon)
        else:
            heat = np.zeros(horizon, np.int64)
        # plans price the grid at what settlement guarantees: buys at the
        # wholesale tariff plus levies, sells at feed-in.  A clearing-price
        # forecast is not a secured price, and treating it as one makes
        # every household chase the same slot: levies exceed the whole
        # floor-to-cap spread, so storage arbitrage against forecast dips
        # is always a net loss once the energy is bought back, and selling
        # stored energy into a forecast spike strands it at the feed-in
        # gate when the whole fleet dumps at once.  Orders still discover
        # real prices through the bidding strategy; the plan just refuses
        # to bet storage on them
        buy = np.full(horizon, self.params.energy_price_buy
                      + self.params.levies, np.int64)
        sell = np.full(horizon, self.params.feed_in_tariff, np.int64)
        return ForecastBundle(load, pv, heat, buy, sell,
                              self._ev_forecast(rt, now, horizon),
                              self.cop_centi)

    # -- the cycle ---------------------------------------------------------

    def step(self, now: int) -> None:
        params = self.params
        lem = self.lem_enabled
        f = self.fields

        for rt in self.agents:
            # vehicle arrivals reveal the energy consumed while away
            if rt.itinerary is not None:
                home = rt.itinerary.is_home(now)
                if home and not rt.was_home:
                    trip = self._trip_just_ended(rt, now)
                    if trip is not None:
                        rt.state.ev_soc = max(0, rt.state.ev_soc
                                              - trip.away_wh)
                rt.was_home = home

            # (2) dispatch for delivery at `now` and meter the outcome
            steps_to_dep = None
            if rt.itinerary is not None:
                nxt = rt.itinerary.next_departure(now)
                if nxt is not None:
                    steps_to_dep = nxt - now
            actual = Actuals(int(rt.load[now]), int(rt.pv[now]),
                             int(rt.heat[now]),
                             rt.itinerary.is_home(now) if rt.itinerary
                             else True,
                             steps_to_dep, self.cop_centi)
            dispatch, _imb, rt.state = realtime_dispatch(
                rt.state, rt.devices, actual, int(rt.contracted[now]),
                params, lem)
            ai = rt.idx
            f["grid_import_wh"][ai, now] = dispatch.grid_import
            f["grid_export_wh"][ai, now] = dispatch.grid_export
            f["pv_generated_wh"][ai, now] = actual.pv_wh
            f["pv_curtailed_wh"][ai, now] = dispatch.pv_curtail
            exported = actual.pv_wh - dispatch.pv_curtail - dispatch.pv_use
            f["pv_exported_wh"][ai, now] = exported
            f["self_consumed_wh"][ai, now] = dispatch.pv_use
            rt.load_hist.append(actual.load_wh)
            rt.pv_hist.append(actual.pv_wh)
            rt.heat_hist.append(actual.heat_wh)

        if lem:
            # (3) refresh forecasts: slot `now` saw its last auction in the
            # previous cycle, so its price history entry is final
            self.price_hist.append(int(self.slot_price[now]))
            horizon = min(STEPS_PER_DAY, self.total - 1 - now)
            if horizon > 0:
                for rt in self.agents:
                    # (4) re-optimize the schedule over the horizon.  The
                    # hold value keeps battery charge at the horizon edge
                    # worth slightly more than an in-horizon sale, so the
                    # plan liquidates storage only when the battery is
                    # actually full; without it every plan dumps the pack
                    # before the vehicle returns or the evening load hits
                    bundle = self._bundle(rt, now, horizon)
                    rt.plan = plan_schedule(rt.state, rt.devices, bundle,
                                            horizon,
                                            hold_value=self.hold_value)
                    # (5) repost orders: cancel-replace every open slot
                    intents = make_orders(
                        rt.plan, lambda s, c=rt.contracted: int(c[s]), now,
                        rt.agent.hems.trading_horizon_steps, params)
                    window = min(rt.agent.hems.trading_horizon_steps,
                                 len(rt.plan))
                    for k in range(1, window + 1):
                        self.book.cancel(rt.agent.agent_id, now + k)
                    for it in intents:
                        self.book.post(rt.agent.agent_id, it.side,
                                       it.delivery_step, it.qty_wh,
                                       it.limit_mct, now)
            else:
                for rt in self.agents:
                    rt.plan = None

            # clear every open delivery slot inside the clearing horizon
            last = min(now + params.clearing_horizon_steps, self.total - 1)
            for slot in self.book.open_slots():
                if not now < slot <= last:
                    continue
                result = clear_auction(self.book, slot, now)
                if result.price_mct is None:
                    continue
                self.slot_price[slot] = result.price_mct
                for trade in result.trades:
                    self._apply_trade(trade)

            # wholesale gate for the next delivery step, after its final
            # auction: the planned residual settles at wholesale terms
            gate = now + 1
            if gate < self.total:
                for rt in self.agents:
                    if rt.plan is None:
                        continue
                    residual = rt.plan.net(0) - int(rt.contracted[gate])
                    leg = wholesale_gate(residual, params)
                    ai = rt.idx
                    f["wholesale_buy_wh"][ai, gate] = leg.buy_wh
                    f["wholesale_sell_wh"][ai, gate] = leg.sell_wh
                    if leg.buy_wh:
                        f["wholesale_buy_cash"][ai, gate] = leg.cash_mueur
                    elif leg.sell_wh:
                        f["wholesale_sell_cash"][ai, gate] = -leg.cash_mueur
                    rt.contracted[gate] += residual
                self.book.purge_slot(gate)

            # balancing settles the metered deviation of this step
            for rt in self.agents:
                ai = rt.idx
                metered = int(f["grid_import_wh"][ai, now]
                              - f["grid_export_wh"][ai, now])
                leg = settle_balancing(metered, int(rt.contracted[now]),
                                       params, True)
                f["balancing_buy_wh"][ai, now] = leg.buy_wh
                f["balancing_sell_wh"][ai, now] = leg.sell_wh
                if leg.buy_wh:
                    f["balancing_buy_cash"][ai, now] = leg.cash_mueur
                elif leg.sell_wh:
                    f["balancing_sell_cash"][ai, now] = -leg.cash_mueur
        else:
            # without a market the metered exchange settles at wholesale
            for rt in self.agents:
                ai = rt.idx
                metered = int(f["grid_import_wh"][ai, now]
                              - f["grid_export_wh"][ai, now])
                leg = wholesale_gate(metered, params)
                f["wholesale_buy_wh"][ai, now] = leg.buy_wh
                f["wholesale_sell_wh"][ai, now] = leg.sell_wh
                if leg.buy_wh:
                    f["wholesale_buy_cash"][ai, now] = leg.cash_mueur
                elif leg.sell_wh:
                    f["wholesale_sell_cash"][ai, now] = -leg.cash_mueur
                rt.contracted[now] = metered

    def _trip_just_ended(self, rt: _Runtime, now: int) -> EvTrip | None:
        for t in rt.itinerary.trips:
            if t.depart_step <= now - 1 < t.arrive_step:
                return t
        return None

    def _apply_trade(self, trade) -> None:
        cash = cash_microeur(trade.qty_wh, trade.price_mct)
        buyer = self._by_id[trade.buyer]
        seller = self._by_id[trade.seller]
        t = trade.delivery_step
        f = self.fields
        f["lem_buy_wh"][buyer.idx, t] += trade.qty_wh
        f["lem_buy_cash"][buyer.idx, t] += cash
        buyer.contracted[t] += trade.qty_wh
        f["lem_sell_wh"][seller.idx, t] += trade.qty_wh
        f["lem_sell_cash"][seller.idx, t] += cash
        seller.contracted[t] -= trade.qty_wh
        self.trades.append(TradeRow(t, trade.cleared_at, trade.buyer,
                                    trade.seller, trade.qty_wh,
                                    trade.price_mct))

    def run(self) -> None:
        for now in range(self.total):
            self.step(now)


# ---------------------------------------------------------------------------
# scenario runner
# ---------------------------------------------------------------------------

def run_scenario(scenario: Scenario, profiles: ProfileSet, config: SimConfig,
                 lem_enabled: bool | None = None) -> RunResult:
    """Simulate every selected week and concatenate the outcomes."""
    lem = scenario.lem_enabled if lem_enabled is None else lem_enabled
    roster = assign_devices(
        scenario.topology,
        (scenario.share_pv, scenario.share_ev, scenario.share_hp),
        profiles, scenario.seed, config.devices, config.hems, scenario.weeks)
    burn_in = config.burn_in_days * STEPS_PER_DAY
    per_week = burn_in + STEPS_PER_WEEK
    fields = {name: [] for name in LEDGER_FIELDS}
    flows: list[np.ndarray] = []
    trades: list[TradeRow] = []
    for w, week in enumerate(scenario.weeks):
        sim = WeekSim(roster, profiles, week, config.market, lem, burn_in)
        sim.run()
        offset = w * per_week
        for name in LEDGER_FIELDS:
            fields[name].append(sim.fields[name])
        flows.append(transformer_flow(sim.fields["grid_import_wh"],
                                      sim.fields["grid_export_wh"]))
        trades.extend(TradeRow(tr.delivery_step + offset,
                               tr.clearing_step + offset, tr.buyer,
                               tr.seller, tr.qty_wh, tr.price_mct)
                      for tr in sim.trades)
    return RunResult(
        scenario_id=scenario.scenario_id,
        topology=scenario.topology.name,
        shares=(scenario.share_pv, scenario.share_ev, scenario.share_hp),
        lem_enabled=lem,
        seed=scenario.seed,
        weeks=tuple(scenario.weeks),
        burn_in_steps=burn_in,
        steps_per_week=per_week,
        agent_ids=tuple(a.agent_id for a in roster.agents),
        fields={name: np.hstack(parts) for name, parts in fields.items()},
        flow_w=np.concatenate(flows),
        trades=tuple(trades),
        market=config.market)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def persist_run(result: RunResult, out_dir: str | Path) -> Path:
    """Write ledger.csv, trades.csv, flow.csv, and meta.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "ledger.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("agent", "step") + LEDGER_FIELDS)
        for ai, aid in enumerate(result.agent_ids):
            cols = [result.fields[name][ai] for name in LEDGER_FIELDS]
            for t in range(result.total_steps):
                writer.writerow([aid, t] + [int(c[t]) for c in cols])
    with (out / "trades.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("delivery_step", "clearing_step", "buyer", "seller",
                         "qty_wh", "price_mct"))
        for tr in result.trades:
            writer.writerow((tr.delivery_step, tr.clearing_step, tr.buyer,
                             tr.seller, tr.qty_wh, tr.price_mct))
    with (out / "flow.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("step", "flow_w"))
        for t, v in enumerate(result.flow_w):
            writer.writerow((t, int(v)))
    meta = {
        "scenario_id": result.scenario_id,
        "topology": result.topology,
        "shares": {"pv": result.shares[0], "ev": result.shares[1],
                   "hp": result.shares[2]},
        "lem_enabled": result.lem_enabled,
        "seed": result.seed,
        "weeks": list(result.weeks),
        "burn_in_steps": result.burn_in_steps,
        "steps_per_week": result.steps_per_week,
        "clearing_rule": CLEARING_RULE,
        "agents": list(result.agent_ids),
        "market": {
            "energy_price_buy": result.market.energy_price_buy,
            "feed_in_tariff": result.market.feed_in_tariff,
            "levies": result.market.levies,
            "balancing_price_buy": result.market.balancing_price_buy,
            "balancing_price_sell": result.market.balancing_price_sell,
            "lem_price_floor": result.market.lem_price_floor,
            "lem_price_cap": result.market.lem_price_cap,
            "clearing_horizon_steps": result.market.clearing_horizon_steps,
            "clearing_interval_steps": result.market.clearing_interval_steps,
        },
    }
    with (out / "meta.json").open("w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


def load_run(run_dir: str | Path) -> RunResult:
    """Read a persisted run back into memory."""
    run = Path(run_dir)
    with (run / "meta.json").open() as fh:
        meta = json.load(fh)
    agent_ids = tuple(meta["agents"])
    index = {aid: i for i, aid in enumerate(agent_ids)}
    flow = []
    with (run / "flow.csv").open(newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            flow.append(int(row[1]))
    total = len(flow)
    fields = {name: np.zeros((len(agent_ids), total), np.int64)
              for name in LEDGER_FIELDS}
    with (run / "ledger.csv").open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = {name: header.index(name) for name in LEDGER_FIELDS}
        for row in reader:
            ai = index[row[0]]
            t = int(row[1])
            for name, ci in cols.items():
                fields[name][ai, t] = int(row[ci])
    trades = []
    with (run / "trades.csv").open(newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            trades.append(TradeRow(int(row[0]), int(row[1]), row[2], row[3],
                                   int(row[4]), int(row[5])))
    market = MarketParams(
        energy_price_buy=meta["market"]["energy_price_buy"],
        feed_in_tariff=meta["market"]["feed_in_tariff"],
        levies=meta["market"]["levies"],
        balancing_price_buy=meta["market"]["balancing_price_buy"],
        balancing_price_sell=meta["market"]["balancing_price_sell"],
        lem_price_floor=meta["market"]["lem_price_floor"],
        lem_price_cap=meta["market"]["lem_price_cap"],
        clearing_horizon_steps=meta["market"]["clearing_horizon_steps"],
        clearing_interval_steps=meta["market"]["clearing_interval_steps"])
    return RunResult(
        scenario_id=meta["scenario_id"],
        topology=meta["topology"],
        shares=(meta["shares"]["pv"], meta["shares"]["ev"],
                meta["shares"]["hp"]),
        lem_enabled=meta["lem_enabled"],
        seed=meta["seed"],
        weeks=tuple(meta["weeks"]),
        burn_in_steps=meta["burn_in_steps"],
        steps_per_week=meta["steps_per_week"],
        agent_ids=agent_ids,
        fields=fields,
        flow_w=np.asarray(flow, np.int64),
        trades=tuple(trades),
        market=market)
