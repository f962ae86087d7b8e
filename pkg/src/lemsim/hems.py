"""Per-household controller: schedule optimization, orders, dispatch.

Each agent runs the same loop every step: optimize an operation schedule
over the coming horizon against forecast prices, derive residual orders
for every tradable delivery slot, and at delivery adjust the flexible
devices toward the committed net exchange.  Scheduling is an exact LP in
integer Wh; the default lossless device parameters let it run on the
min-cost-flow kernel, anything lossy falls back to a float LP plus an
integer repair pass.

Thermal quantities enter the scheduler in electrical-equivalent units
(thermal Wh scaled by 100/COP), which keeps the LP a pure flow problem;
the real-time controller operates on true thermal Wh.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._schedule_lp import solve_lp
from ._schedule_mcf import solve_mcf
from .core import (
    MarketParams,
    BatterySpec,
    EvSpec,
    HpSpec,
    round_div_half_away,
)
from .forecasting import EvForecast


class PlanningError(ValueError):
    pass


@dataclass
class DeviceState:
    """Mutable per-agent state carried between steps."""

    battery_soc: int = 0
    ev_soc: int = 0
    ev_present: bool = True
    thermal_soc: int = 0


@dataclass(frozen=True)
class AgentDevices:
    """The device fleet of one agent; None means not installed."""

    pv_peak_w: int = 0
    battery: BatterySpec | None = None
    ev: EvSpec | None = None
    hp: HpSpec | None = None
    has_heat_demand: bool = False


@dataclass(frozen=True)
class ForecastBundle:
    """Everything plan_schedule needs to see about the future.

    Arrays cover horizon steps now+1 .. now+H.  Prices are final trade
    prices per kWh: price_buy already includes levies.  heat_wh is
    thermal; cop_centi converts it for the scheduler.
    """

    load_wh: np.ndarray
    pv_wh: np.ndarray
    heat_wh: np.ndarray
    price_buy_mct: np.ndarray
    price_sell_mct: np.ndarray
    ev: EvForecast | None
    cop_centi: int = 0


@dataclass(frozen=True)
class ScheduleInstance:
    """Integer scheduling problem, thermal already electrical-equivalent."""

    horizon: int
    load: np.ndarray
    pv: np.ndarray
    price_buy: np.ndarray
    price_sell: np.ndarray
    batt_cap: int = 0
    batt_pow: int = 0
    batt_soc0: int = 0
    eta_charge: float = 1.0
    eta_discharge: float = 1.0
    ev_len: int = 0
    ev_avail: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    ev_cap: int = 0
    ev_pow: int = 0
    ev_soc0: int = 0
    ev_req: bool = False
    ev_target: int = 0
    eta_ev: float = 1.0
    th_cap: int = 0
    th_pow: int = 0
    th_soc0: int = 0
    th_dem: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    th_loss: float = 0.0

    @property
    def has_battery(self) -> bool:
        return self.batt_cap > 0

    @property
    def has_thermal(self) -> bool:
        return self.th_cap > 0 or self.th_pow > 0

    @property
    def lossless(self) -> bool:
        return (self.eta_charge == 1.0 and self.eta_discharge == 1.0
                and self.eta_ev == 1.0 and self.th_loss == 0.0)


@dataclass(frozen=True)
class DispatchPlan:
    """Planned operation per horizon step, all quantities in Wh >= 0."""

    pv_use: np.ndarray
    pv_curtail: np.ndarray
    batt_charge: np.ndarray
    batt_discharge: np.ndarray
    ev_charge: np.ndarray
    hp_elec: np.ndarray
    buy: np.ndarray
    sell: np.ndarray
    objective_microeur: int
    flagged: bool = False

    def __len__(self) -> int:
        return len(self.buy)

    def net(self, k: int) -> int:
        """Signed planned exchange for horizon offset k (+ = buy)."""
        return int(self.buy[k] - self.sell[k])


def step_limit_wh(power_w: int) -> int:
    """Energy one step of continuous operation at power_w delivers."""
    return power_w // 4


def thermal_to_elec(qty_wh_th: int, cop_centi: int) -> int:
    """Thermal Wh to electrical-equivalent Wh at a fixed COP."""
    return round_div_half_away(qty_wh_th * 100, cop_centi)


def elec_to_thermal(qty_wh: int, cop_centi: int) -> int:
    return round_div_half_away(qty_wh * cop_centi, 100)


def hp_elec_step_limit(max_thermal_w: int, cop_centi: int) -> int:
    """Electrical Wh one step of full HP output draws (thermal cap / COP)."""
    return round_div_half_away(max_thermal_w * 25, cop_centi)


def build_instance(state: DeviceState, devices: AgentDevices,
                   forecasts: ForecastBundle, horizon: int) -> ScheduleInstance:
    """Assemble the integer LP instance for the coming horizon."""
    if horizon <= 0:
        raise PlanningError("horizon must be positive")
    load = np.asarray(forecasts.load_wh[:horizon], np.int64)
    pv = np.asarray(forecasts.pv_wh[:horizon], np.int64)
    pb = np.asarray(forecasts.price_buy_mct[:horizon], np.int64)
    ps = np.asarray(forecasts.price_sell_mct[:horizon], np.int64)
    if not (len(load) == len(pv) == len(pb) == len(ps) == horizon):
        raise PlanningError("forecasts shorter than the horizon")

    kw: dict = {}
    batt = devices.battery
    if batt is not None:
        kw.update(batt_cap=batt.capacity_wh, batt_pow=step_limit_wh(batt.power_w),
                  batt_soc0=min(state.battery_soc, batt.capacity_wh),
                  eta_charge=batt.eta_charge, eta_discharge=batt.eta_discharge)

    ev_fc = forecasts.ev
    if devices.ev is not None and ev_fc is not None:
        avail = np.asarray(ev_fc.availability[:horizon], np.int64)
        if ev_fc.requirement is not None:
            dep_off, target = ev_fc.requirement
            ev_len = min(dep_off, horizon)
            req = dep_off <= horizon
        else:
            ev_len = horizon
            req = False
            target = 0
        if ev_len > 0 and int(avail[:ev_len].sum()) == 0:
            ev_len = 0
            req = False
        if ev_len > 0:
            kw.update(ev_len=ev_len, ev_avail=avail,
                      ev_cap=devices.ev.capacity_wh,
                      ev_pow=step_limit_wh(devices.ev.charge_power_w),
                      ev_soc0=min(state.ev_soc, devices.ev.capacity_wh),
                      ev_req=req, ev_target=target, eta_ev=devices.ev.eta_charge)

    hp = devices.hp
    if hp is not None:
        cop = forecasts.cop_centi
        if cop <= 0:
            raise PlanningError("heat pump present but no COP in forecasts")
        dem = np.asarray(
            [thermal_to_elec(int(q), cop) for q in forecasts.heat_wh[:horizon]],
            np.int64)
        kw.update(th_cap=thermal_to_elec(hp.storage_capacity_wh, cop),
                  th_pow=hp_elec_step_limit(hp.max_thermal_w, cop),
                  th_soc0=thermal_to_elec(min(state.thermal_soc,
                                              hp.storage_capacity_wh), cop),
                  th_dem=dem, th_loss=hp.storage_loss)

    return ScheduleInstance(horizon, load, pv, pb, ps, **kw)


def plan_schedule(state: DeviceState, devices: AgentDevices,
                  forecasts: ForecastBundle, horizon: int,
                  hold_value: int = 0) -> DispatchPlan:
    """Optimize the operation schedule; exact optimum of the LP.

    Infeasible EV deadlines or heat demands are relaxed with a large
    penalty and the returned plan is flagged instead of raising.

    hold_value credits battery charge still stored at the horizon end,
    in the same unit as the price forecasts.  The default of zero
    optimizes exactly the stated trading objective.  A rolling-horizon
    controller passes the sale price plus a small margin, which makes
    the plan keep charge for the day beyond the horizon instead of
    liquidating storage at the horizon edge; the reported objective
    still counts grid flows at their true prices.  The value must stay
    below every purchase price.
    """
    inst = build_instance(state, devices, forecasts, horizon)
    H = inst.horizon
    if hold_value < 0:
        raise PlanningError("hold value must not be negative")
    if (hold_value and inst.has_battery
            and hold_value >= int(inst.price_buy.min())):
        raise PlanningError("hold value must stay below every purchase "
                            "price or plans would buy energy just to hold")
    if not inst.has_battery and inst.ev_len == 0 and not inst.has_thermal:
        # nothing to decide: trade the forecast net load directly
        net = inst.load - inst.pv
        buy = np.maximum(net, 0)
        sell = np.maximum(-net, 0)
        zero = np.zeros(H, np.int64)
        obj = int(np.dot(buy, inst.price_buy) - np.dot(sell, inst.price_sell))
        return DispatchPlan(inst.pv.copy(), zero, zero.copy(), zero.copy(),
                            zero.copy(), zero.copy(), buy, sell,
                            round_div_half_away(obj, 100), False)
    if inst.lossless:
        return _plan_mcf(inst, hold_value)
    return _plan_lp_repair(inst, hold_value)


def _plan_mcf(inst: ScheduleInstance, hold_value: int) -> DispatchPlan:
    H = inst.horizon
    avail = inst.ev_avail if inst.ev_len > 0 else np.zeros(H, np.int64)
    dem = inst.th_dem if inst.has_thermal else np.zeros(H, np.int64)
    status, obj, slack, imp, exp, bch, bdis, evch, hpe = solve_mcf(
        H, inst.load, inst.pv, inst.price_buy, inst.price_sell,
        1 if inst.has_battery else 0, inst.batt_cap, inst.batt_pow,
        inst.batt_soc0, hold_value,
        inst.ev_len, avail, inst.ev_cap, inst.ev_pow, inst.ev_soc0,
        1 if inst.ev_req else 0, inst.ev_target,
        1 if inst.has_thermal else 0, inst.th_cap, inst.th_pow, inst.th_soc0,
        dem)
    if status != 1:
        raise PlanningError(f"flow solver failed with status {status}")
    return DispatchPlan(inst.pv.copy(), np.zeros(H, np.int64), bch, bdis,
                        evch, hpe, imp, exp,
                        round_div_half_away(int(obj), 100), slack > 0)


def _plan_lp_repair(inst: ScheduleInstance, hold_value: int) -> DispatchPlan:
    """Float LP plus a rounding repair that restores integer feasibility."""
    H = inst.horizon
    avail = inst.ev_avail if inst.ev_len > 0 else np.zeros(H, np.int64)
    dem = inst.th_dem if inst.has_thermal else np.zeros(H, np.int64)
    sol = solve_lp(
        H, inst.load, inst.pv, inst.price_buy, inst.price_sell,
        1 if inst.has_battery else 0, inst.batt_cap, inst.batt_pow,
        inst.batt_soc0, hold_value, inst.eta_charge, inst.eta_discharge,
        inst.ev_len, avail, inst.ev_cap, inst.ev_pow, inst.ev_soc0,
        1 if inst.ev_req else 0, inst.ev_target, inst.eta_ev,
        1 if inst.has_thermal else 0, inst.th_cap, inst.th_pow, inst.th_soc0,
        dem, inst.th_loss)
    if not sol.ok:
        raise PlanningError("LP solver failed")
    flagged = sol.ev_slack > 0.5 or float(np.sum(sol.th_slack)) > 0.5

    bch = np.zeros(H, np.int64)
    bdis = np.zeros(H, np.int64)
    evch = np.zeros(H, np.int64)
    hpe = np.zeros(H, np.int64)
    soc = inst.batt_soc0
    esoc = inst.ev_soc0
    tsoc = inst.th_soc0
    for t in range(H):
        if inst.has_battery:
            c = int(round(sol.bch[t]))
            d = int(round(sol.bdis[t]))
            w = min(c, d)
            c, d = c - w, d - w
            c = max(0, min(c, inst.batt_pow))
            d = max(0, min(d, inst.batt_pow))
            stored = round_div_half_away(round(c * inst.eta_charge * 100), 100)
            while soc + stored - d > inst.batt_cap and c > 0:
                c -= 1
                stored = round_div_half_away(round(c * inst.eta_charge * 100),
                                             100)
            if soc + stored - d < 0:
                d = soc + stored
            soc = soc + stored - d
            bch[t], bdis[t] = c, round_div_half_away(
                round(d * inst.eta_discharge * 100), 100)
        if t < inst.ev_len and avail[t] > 0:
            c = max(0, min(int(round(sol.evch[t])), inst.ev_pow))
            stored = round_div_half_away(round(c * inst.eta_ev * 100), 100)
            while esoc + stored > inst.ev_cap and c > 0:
                c -= 1
                stored = round_div_half_away(round(c * inst.eta_ev * 100), 100)
            esoc += stored
            evch[t] = c
        if inst.has_thermal:
            e = max(0, min(int(round(sol.hpe[t])), inst.th_pow))
            decay = round_div_half_away(round(tsoc * inst.th_loss * 100), 100)
            room = inst.th_cap - (tsoc - decay) + int(dem[t])
            while e > room and e > 0:
                e -= 1
            tsoc = tsoc - decay + e - int(dem[t])
            if tsoc < 0:
                tsoc = 0          # unmet demand, plan already flagged
                flagged = True
            hpe[t] = e

    net = inst.load - inst.pv + bch - bdis + evch + hpe
    buy = np.maximum(net, 0)
    sell = np.maximum(-net, 0)
    obj = int(np.dot(buy, inst.price_buy) - np.dot(sell, inst.price_sell))
    return DispatchPlan(inst.pv.copy(), np.zeros(H, np.int64), bch, bdis,
                        evch, hpe, buy, sell,
                        round_div_half_away(obj, 100), flagged)


def check_plan(inst: ScheduleInstance, plan: DispatchPlan,
               tol_wh: int = 0) -> list[str]:
    """Verify a plan against every scheduling constraint.

    Returns a list of violation descriptions; empty means feasible.  A
    nonzero tol_wh admits rounding slack from the lossy repair path.
    """
    bad: list[str] = []
    H = inst.horizon
    arrays = (plan.pv_use, plan.pv_curtail, plan.batt_charge,
              plan.batt_discharge, plan.ev_charge, plan.hp_elec,
              plan.buy, plan.sell)
    if any(len(a) != H for a in arrays):
        return [f"plan arrays do not all have horizon length {H}"]
    for name, a in zip(("pv_use", "pv_curtail", "batt_charge",
                        "batt_discharge", "ev_charge", "hp_elec", "buy",
                        "sell"), arrays):
        if np.any(np.asarray(a) < 0):
            bad.append(f"{name} has negative entries")

    soc = inst.batt_soc0
    esoc = inst.ev_soc0
    tsoc = inst.th_soc0
    for t in range(H):
        if plan.pv_use[t] + plan.pv_curtail[t] != inst.pv[t]:
            bad.append(f"step {t}: pv split != forecast generation")
        lhs = int(plan.pv_use[t] + plan.batt_discharge[t] + plan.buy[t])
        rhs = int(inst.load[t] + plan.batt_charge[t] + plan.ev_charge[t]
                  + plan.hp_elec[t] + plan.sell[t])
        if abs(lhs - rhs) > tol_wh:
            bad.append(f"step {t}: bus balance off by {lhs - rhs} Wh")
        if inst.has_battery:
            if plan.batt_charge[t] > inst.batt_pow + tol_wh:
                bad.append(f"step {t}: battery charge above power limit")
            if plan.batt_discharge[t] > inst.batt_pow + tol_wh:
                bad.append(f"step {t}: battery discharge above power limit")
            stored = round_div_half_away(
                round(plan.batt_charge[t] * inst.eta_charge * 100), 100)
            drawn = round_div_half_away(
                round(plan.batt_discharge[t] / inst.eta_discharge * 100), 100)
            soc = soc + stored - drawn
            if not -tol_wh <= soc <= inst.batt_cap + tol_wh:
                bad.append(f"step {t}: battery soc {soc} out of bounds")
        elif plan.batt_charge[t] or plan.batt_discharge[t]:
            bad.append(f"step {t}: battery use without a battery")
        if t < inst.ev_len:
            limit = inst.ev_pow * int(inst.ev_avail[t])
            if plan.ev_charge[t] > limit + tol_wh:
                bad.append(f"step {t}: EV charge above limit {limit}")
            esoc += round_div_half_away(
                round(plan.ev_charge[t] * inst.eta_ev * 100), 100)
            if esoc > inst.ev_cap + tol_wh:
                bad.append(f"step {t}: EV soc above capacity")
        elif plan.ev_charge[t]:
            bad.append(f"step {t}: EV charge outside availability window")
        if inst.has_thermal:
            if plan.hp_elec[t] > inst.th_pow + tol_wh:
                bad.append(f"step {t}: HP above thermal power limit")
            decay = round_div_half_away(round(tsoc * inst.th_loss * 100), 100)
            tsoc = tsoc - decay + int(plan.hp_elec[t]) - int(inst.th_dem[t])
            if tsoc < -tol_wh and not plan.flagged:
                bad.append(f"step {t}: heat demand not met")
            tsoc = max(tsoc, 0)
            if tsoc > inst.th_cap + tol_wh:
                bad.append(f"step {t}: thermal storage above capacity")
        elif plan.hp_elec[t]:
            bad.append(f"step {t}: HP use without a heat pump")
    if inst.ev_req and not plan.flagged:
        if esoc < inst.ev_target - tol_wh:
            bad.append(f"EV misses target {inst.ev_target} (soc {esoc})")
    return bad


# ---------------------------------------------------------------------------
# order generation
# ---------------------------------------------------------------------------

def linear_limit_price(side: str, steps_remaining: int, trading_horizon: int,
                       params: MarketParams) -> int:
    """Limit price of the linear bidding strategy.

    Buyers start at the price floor when delivery is far away and walk
    linearly up to the cap one step before delivery; sellers mirror.
    Rounded half away from zero on the exact rational value.
    """
    s, h = steps_remaining, trading_horizon
    if h < 2:
        raise PlanningError("trading horizon must be at least 2 steps")
    if not 1 <= s <= h:
        raise PlanningError(f"steps_remaining {s} outside [1, {h}]")
    cap, floor = params.lem_price_cap, params.lem_price_floor
    if side == "buy":
        return round_div_half_away(cap * (h - s) + floor * (s - 1), h - 1)
    if side == "sell":
        return round_div_half_away(floor * (h - s) + cap * (s - 1), h - 1)
    raise PlanningError(f"unknown side {side!r}")


@dataclass(frozen=True)
class OrderIntent:
    side: str
    delivery_step: int
    qty_wh: int
    limit_mct: int


def make_orders(plan: DispatchPlan, committed_net, now: int,
                trading_horizon: int, params: MarketParams) -> list[OrderIntent]:
    """Residual orders for every delivery slot in the trading window.

    committed_net maps absolute delivery step to the signed net energy
    already traded.  The caller supersedes any previously open orders in
    the window (cancel-replace), so a zero residual simply yields none.
    """
    intents: list[OrderIntent] = []
    window = min(trading_horizon, len(plan))
    for k in range(1, window + 1):
        step = now + k
        residual = plan.net(k - 1) - int(committed_net(step))
        if residual > 0:
            intents.append(OrderIntent(
                "buy", step, residual,
                linear_limit_price("buy", k, trading_horizon, params)))
        elif residual < 0:
            intents.append(OrderIntent(
                "sell", step, -residual,
                linear_limit_price("sell", k, trading_horizon, params)))
    return intents


# ---------------------------------------------------------------------------
# real-time dispatch
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Dispatch:
    """Realized device operation of one step, all Wh >= 0."""

    pv_use: int
    pv_curtail: int
    batt_charge: int
    batt_discharge: int
    ev_charge: int
    hp_elec: int
    heat_served: int
    grid_import: int
    grid_export: int


@dataclass(frozen=True)
class Actuals:
    load_wh: int
    pv_wh: int
    heat_wh: int
    ev_present: bool
    ev_steps_until_departure: int | None  # None = no departure known
    cop_centi: int = 0


def _ev_reserve(state: DeviceState, ev: EvSpec,
                steps_until_departure: int | None) -> int:
    """Minimum charge this step that keeps the departure target reachable."""
    need = max(0, ev.capacity_wh - state.ev_soc)
    if need == 0:
        return 0
    if steps_until_departure is None:
        return 0
    later = max(0, steps_until_departure - 1) * step_limit_wh(ev.charge_power_w)
    return max(0, min(need - later, step_limit_wh(ev.charge_power_w), need))


def _serve_heat(state: DeviceState, hp: HpSpec, heat_wh: int,
                cop_centi: int) -> tuple[int, int, int]:
    """Baseline heat service: HP direct, storage covers the shortfall.

    Returns (hp_thermal, storage_discharge, unserved)."""
    hp_th_max = hp.max_thermal_w // 4
    direct = min(heat_wh, hp_th_max)
    short = heat_wh - direct
    from_store = min(short, state.thermal_soc)
    return direct, from_store, short - from_store


def realtime_dispatch(state: DeviceState, devices: AgentDevices,
                      actual: Actuals, committed_now: int,
                      params: MarketParams,
                      lem_enabled: bool) -> tuple[Dispatch, int, DeviceState]:
    """Dispatch devices at delivery; returns (dispatch, imbalance, state').

    Load and heat are always served.  With a market the flexible devices
    move the metered net exchange toward committed_now in priority order
    battery, EV, heat-pump storage, PV curtailment; the leftover signed
    deviation is the imbalance (+ = extra energy drawn).  Without a
    market a greedy self-consumption policy applies and the imbalance is
    zero by construction.
    """
    new = DeviceState(state.battery_soc, state.ev_soc, actual.ev_present,
                      state.thermal_soc)
    load = actual.load_wh
    pvg = actual.pv_wh

    hp = devices.hp
    hp_th = store_dis = 0
    hp_e = 0
    unserved = 0
    if hp is not None:
        hp_th, store_dis, unserved = _serve_heat(new, hp, actual.heat_wh,
                                                 actual.cop_centi)
        new.thermal_soc -= store_dis
        hp_e = thermal_to_elec(hp_th, actual.cop_centi)
    heat_served = actual.heat_wh - unserved

    ev = devices.ev
    ev_min = 0
    evch = 0
    if ev is not None and actual.ev_present:
        ev_min = min(_ev_reserve(new, ev, actual.ev_steps_until_departure),
                     ev.capacity_wh - new.ev_soc)
        # flat tariffs give charging no better hour, so the desired rate
        # is the full-power pull of the greedy policy in both modes; with
        # a market it is modulated down toward the deadline reserve when
        # honoring the committed position requires it
        evch = min(step_limit_wh(ev.charge_power_w),
                   ev.capacity_wh - new.ev_soc)

    batt = devices.battery
    bch = bdis = 0
    curtail = 0

    if lem_enabled:
        net0 = load + hp_e + evch - pvg
        gap = committed_now - net0
        if gap > 0:
            # bought more than the baseline needs: absorb it
            if batt is not None:
                bch = min(gap, step_limit_wh(batt.power_w),
                          batt.capacity_wh - new.battery_soc)
                gap -= bch
            if gap > 0 and ev is not None and actual.ev_present:
                extra = min(gap, step_limit_wh(ev.charge_power_w) - evch,
                            ev.capacity_wh - new.ev_soc - evch)
                if extra > 0:
                    evch += extra
                    gap -= extra
            if gap > 0 and hp is not None:
                hp_th_max = hp.max_thermal_w // 4
                room_th = min(hp_th_max - hp_th,
                              hp.storage_capacity_wh - new.thermal_soc)
                extra_e = 0
                if room_th > 0:
                    extra_e = min(gap, hp_elec_step_limit(hp.max_thermal_w,
                                                          actual.cop_centi)
                                  - hp_e)
                    extra_th = elec_to_thermal(extra_e, actual.cop_centi)
                    while extra_th > room_th and extra_e > 0:
                        extra_e -= 1
                        extra_th = elec_to_thermal(extra_e, actual.cop_centi)
                    hp_th += extra_th
                    new.thermal_soc += extra_th
                    hp_e += extra_e
                    gap -= extra_e
            if gap > 0:
                # curtail only against injection beyond the committed sale
                net1 = load + hp_e + evch + bch - bdis - pvg
                over = max(0, -net1 - max(0, -committed_now))
                curtail = min(gap, over)
        elif gap < 0:
            # need more than was bought: shed
            need = -gap
            if batt is not None:
                bdis = min(need, step_limit_wh(batt.power_w), new.battery_soc)
                need -= bdis
            if need > 0 and evch > ev_min:
                # slow the vehicle down to the deadline reserve
                cut = min(need, evch - ev_min)
                evch -= cut
                need -= cut
            if need > 0 and hp is not None and hp_th > 0:
                # serve heat from storage instead of the heat pump
                shift = min(hp_th, new.thermal_soc)
                want_th = elec_to_thermal(need, actual.cop_centi)
                shift = min(shift, want_th)
                new_e = thermal_to_elec(hp_th - shift, actual.cop_centi)
                while shift > 0 and hp_e - new_e > need:
                    shift -= 1
                    new_e = thermal_to_elec(hp_th - shift, actual.cop_centi)
                if shift > 0:
                    hp_th -= shift
                    new.thermal_soc -= shift
                    store_dis += shift
                    hp_e = new_e
    else:
        # greedy self-consumption around the full-power vehicle pull
        surplus = pvg - load - hp_e - evch
        if surplus > 0 and batt is not None:
            bch = min(surplus, step_limit_wh(batt.power_w),
                      batt.capacity_wh - new.battery_soc)
            surplus -= bch
        if surplus > 0 and hp is not None:
            hp_th_max = hp.max_thermal_w // 4
            room_th = min(hp_th_max - hp_th,
                          hp.storage_capacity_wh - new.thermal_soc)
            if room_th > 0:
                extra_e = min(surplus,
                              hp_elec_step_limit(hp.max_thermal_w,
                                                 actual.cop_centi) - hp_e)
                extra_th = elec_to_thermal(extra_e, actual.cop_centi)
                while extra_th > room_th and extra_e > 0:
                    extra_e -= 1
                    extra_th = elec_to_thermal(extra_e, actual.cop_centi)
                hp_th += extra_th
                new.thermal_soc += extra_th
                hp_e += extra_e
        elif surplus < 0 and batt is not None:
            bdis = min(-surplus, step_limit_wh(batt.power_w), new.battery_soc)

    if batt is not None:
        new.battery_soc += bch - bdis
    if evch:
        new.ev_soc += evch

    net = load + hp_e + evch + bch - bdis - (pvg - curtail)
    grid_import = max(net, 0)
    grid_export = max(-net, 0)
    # exports never exceed post-curtail PV: everything else is consumption
    pv_use = pvg - curtail - min(grid_export, pvg - curtail)
    imbalance = (net - committed_now) if lem_enabled else 0
    dispatch = Dispatch(pv_use, curtail, bch, bdis, evch, hp_e, heat_served,
                        grid_import, grid_export)
    return dispatch, imbalance, new
