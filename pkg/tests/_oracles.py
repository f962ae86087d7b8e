"""Brute-force reference implementations the tests compare against.

Kept separate from any test module so both the unit tests and the
acceptance checks can drive them at different sample sizes.
"""
import math
from functools import lru_cache

import numpy as np

from lemsim.core import BatterySpec, EvSpec, round_div_half_away
from lemsim.forecasting import EvForecast
from lemsim.hems import AgentDevices, DeviceState, ForecastBundle

GRID_WH = 500


# ---------------------------------------------------------------------------
# auction oracle
# ---------------------------------------------------------------------------

def max_crossing_volume(orders) -> int:
    """Largest volume a uniform price can match in one slot's book.

    orders: iterable of (side, qty_wh, limit_mct).  Demand at price p is
    the bid quantity limited at or above p, supply the ask quantity at or
    below p; the optimum sits at one of the quoted limits.
    """
    bids = [(q, p) for side, q, p in orders if side == "buy"]
    asks = [(q, p) for side, q, p in orders if side == "sell"]
    best = 0
    for _, p in bids + asks:
        demand = sum(q for q, lim in bids if lim >= p)
        supply = sum(q for q, lim in asks if lim <= p)
        best = max(best, min(demand, supply))
    return best


def random_book(rng) -> list[tuple[str, int, int]]:
    """Up to six one-slot orders with tariff-band limits."""
    n = int(rng.integers(1, 7))
    book = []
    for _ in range(n):
        side = "buy" if rng.integers(2) else "sell"
        qty = int(rng.integers(1, 5001))
        limit = int(rng.integers(8270, 14701))
        book.append((side, qty, limit))
    return book


# ---------------------------------------------------------------------------
# scheduling oracle
# ---------------------------------------------------------------------------

def dp_schedule_cost(load, pv, pb, ps, b_cap, b_pow_wh, b_soc0,
                     ev_len=0, ev_avail=(), ev_cap=0, ev_pow_wh=0,
                     ev_soc0=0, ev_target=0) -> int:
    """Exact minimum trading cost in microeur on a 500 Wh decision grid.

    Exhaustive search over battery charge or discharge per step plus EV
    charging during the availability window, with the vehicle target
    enforced at its departure offset.  Only sensible for tiny horizons.
    """
    H = len(load)
    avail = tuple(int(a) for a in ev_avail)

    @lru_cache(maxsize=None)
    def best(t: int, soc: int, esoc: int) -> float:
        if ev_len and t == ev_len and esoc < ev_target:
            return math.inf
        if t == H:
            return 0.0
        lo = -min(b_pow_wh, soc)
        hi = min(b_pow_wh, b_cap - soc)
        ev_hi = ev_pow_wh if t < ev_len and avail[t] else 0
        ev_hi = min(ev_hi, ev_cap - esoc)
        out = math.inf
        for delta in range(lo, hi + 1, GRID_WH):
            for ech in range(0, ev_hi + 1, GRID_WH):
                net = int(load[t]) - int(pv[t]) + delta + ech
                cost = net * int(pb[t]) if net > 0 else net * int(ps[t])
                rest = best(t + 1, soc + delta, esoc + ech)
                if cost + rest < out:
                    out = cost + rest
        return out

    total = best(0, b_soc0, ev_soc0)
    if not math.isfinite(total):
        raise ValueError("oracle instance is infeasible")
    return round_div_half_away(int(total), 100)


def random_toy(rng):
    """One feasible scheduling toy whose optimum lies on the decision grid.

    Every energy quantity is a multiple of 500 Wh, so the continuous
    optimum is attained at a grid point and the exhaustive search above
    is a true oracle.  Returns (state, devices, bundle, horizon, kwargs)
    with kwargs ready for dp_schedule_cost.
    """
    H = int(rng.integers(1, 5))
    b_cap = GRID_WH * int(rng.integers(2, 9))
    b_pow = GRID_WH * int(rng.integers(1, 4))
    b_soc0 = GRID_WH * int(rng.integers(0, b_cap // GRID_WH + 1))
    load = GRID_WH * rng.integers(0, 7, H, dtype=np.int64)
    if rng.integers(2):
        pv = GRID_WH * rng.integers(0, 7, H, dtype=np.int64)
    else:
        pv = np.zeros(H, np.int64)
    pb = rng.integers(9000, 40001, H, dtype=np.int64)
    ps = np.array([int(rng.integers(1000, int(p) + 1)) for p in pb],
                  dtype=np.int64)

    ev_spec = None
    ev_fc = None
    ev_soc0 = 0
    kwargs = dict(load=load, pv=pv, pb=pb, ps=ps, b_cap=b_cap,
                  b_pow_wh=b_pow, b_soc0=b_soc0)
    if rng.integers(2):
        ev_cap = GRID_WH * int(rng.integers(2, 9))
        ev_pow = GRID_WH * int(rng.integers(1, 3))
        ev_soc0 = GRID_WH * int(rng.integers(0, ev_cap // GRID_WH + 1))
        ev_spec = EvSpec(ev_cap, 4 * ev_pow, "toy")
        dep_off = int(rng.integers(1, H + 1))
        avail = np.zeros(H, np.int64)
        avail[:dep_off] = 1
        if rng.integers(2):
            room = min(ev_cap - ev_soc0, ev_pow * dep_off)
            target = ev_soc0 + GRID_WH * int(
                rng.integers(0, room // GRID_WH + 1))
            ev_fc = EvForecast(avail, (dep_off, target))
            kwargs.update(ev_len=dep_off, ev_avail=avail, ev_cap=ev_cap,
                          ev_pow_wh=ev_pow, ev_soc0=ev_soc0,
                          ev_target=target)
        else:
            ev_fc = EvForecast(avail, None)
            kwargs.update(ev_len=H, ev_avail=avail, ev_cap=ev_cap,
                          ev_pow_wh=ev_pow, ev_soc0=ev_soc0, ev_target=0)

    devices = AgentDevices(pv_peak_w=7000 if pv.any() else 0,
                           battery=BatterySpec(b_cap, 4 * b_pow),
                           ev=ev_spec)
    state = DeviceState(battery_soc=b_soc0, ev_soc=ev_soc0, ev_present=True)
    bundle = ForecastBundle(load, pv, np.zeros(H, np.int64), pb, ps, ev_fc, 0)
    return state, devices, bundle, H, kwargs
