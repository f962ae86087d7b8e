"""Persistence forecasts over realized history.

Every forecaster sees only values that were realized before the forecast is
made, mirroring what a household controller can actually know.  Forecasts
cover the steps len(history) .. len(history)+horizon-1 and return int64
arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import STEPS_PER_DAY


class History:
    """Append-only record of realized integer values from step 0."""

    __slots__ = ("_buf", "_n")

    def __init__(self, initial=None) -> None:
        self._buf = np.zeros(1024, dtype=np.int64)
        self._n = 0
        if initial is not None:
            for v in initial:
                self.append(int(v))

    def append(self, value: int) -> None:
        if self._n == len(self._buf):
            self._buf = np.concatenate([self._buf, np.zeros_like(self._buf)])
        self._buf[self._n] = value
        self._n += 1

    def __len__(self) -> int:
        return self._n

    @property
    def values(self) -> np.ndarray:
        """Read-only view of the realized values."""
        view = self._buf[:self._n]
        view.flags.writeable = False
        return view

    def last(self) -> int:
        if self._n == 0:
            raise IndexError("empty history")
        return int(self._buf[self._n - 1])


def _fallback(history: History) -> int:
    return int(history._buf[len(history) - 1]) if len(history) else 0


def forecast_naive(history: History, horizon: int) -> np.ndarray:
    """Repeat the value observed one day earlier for each target step.

    Steps whose day-old source is not yet realized fall back to the last
    observed value; an empty history forecasts zeros.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    n = len(history)
    out = np.full(horizon, _fallback(history), dtype=np.int64)
    src = np.arange(n, n + horizon) - STEPS_PER_DAY
    known = (src >= 0) & (src < n)
    if known.any():
        out[known] = history._buf[src[known]]
    return out


def forecast_naive_average(history: History, horizon: int) -> np.ndarray:
    """Average of the two prior-day values, rounded half away from zero.

    Slots with only one prior day fall back to the day-old value alone;
    slots with none use the last observed value (zeros when empty).
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    n = len(history)
    out = np.full(horizon, _fallback(history), dtype=np.int64)
    src1 = np.arange(n, n + horizon) - STEPS_PER_DAY
    src2 = src1 - STEPS_PER_DAY
    one = (src1 >= 0) & (src1 < n)
    both = one & (src2 >= 0)
    if one.any():
        out[one] = history._buf[src1[one]]
    if both.any():
        total = history._buf[src1[both]] + history._buf[src2[both]]
        # round half away from zero; realized energy values are >= 0 but
        # keep the signed form so the helper stays general
        away = np.where(total >= 0, (total + 1) // 2, -((-total + 1) // 2))
        out[both] = away
    return out


def forecast_perfect(truth: np.ndarray, now_len: int, horizon: int) -> np.ndarray:
    """Test-only oracle: the actual future values."""
    truth = np.asarray(truth, dtype=np.int64)
    if now_len + horizon > len(truth):
        raise ValueError("truth series too short for requested horizon")
    return truth[now_len:now_len + horizon].copy()


# ---------------------------------------------------------------------------
# market price forecast
# ---------------------------------------------------------------------------

NO_PRICE = -1   # sentinel in price histories for slots that never cleared


def forecast_price_naive(price_history: History, horizon: int,
                         default_price: int) -> np.ndarray:
    """Yesterday's clearing price per slot; default where none was formed."""
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    n = len(price_history)
    out = np.full(horizon, default_price, dtype=np.int64)
    src = np.arange(n, n + horizon) - STEPS_PER_DAY
    known = (src >= 0) & (src < n)
    if known.any():
        vals = price_history._buf[src[known]]
        out[known] = np.where(vals == NO_PRICE, default_price, vals)
    return out


# ---------------------------------------------------------------------------
# EV availability forecast
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class EvForecast:
    """What the controller knows about the vehicle for the next horizon.

    availability[k] refers to step now+1+k.  requirement is
    (step_offset, target_soc_wh): the SoC the vehicle must reach by the
    start of that offset (its next known departure), or None when no
    departure is known inside the horizon.
    """

    availability: np.ndarray
    requirement: tuple[int, int] | None


def forecast_ev_close(present: bool, known_departure: int | None,
                      capacity_wh: int, now: int, horizon: int) -> EvForecast:
    """Availability is revealed on arrival: while the vehicle is away the
    controller knows nothing; once home, it knows the next departure and
    plans for a full battery by then."""
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    avail = np.zeros(horizon, dtype=np.int64)
    if not present:
        return EvForecast(avail, None)
    if known_departure is None:
        avail[:] = 1
        return EvForecast(avail, None)
    # offsets 0..horizon-1 map to steps now+1..now+horizon
    dep_off = known_departure - (now + 1)
    if dep_off <= 0:
        return EvForecast(avail, None)
    avail[:min(dep_off, horizon)] = 1
    # the requirement binds the SoC reached after the last pre-departure
    # charging slot, expressible only while that slot is inside the horizon
    requirement = (dep_off, capacity_wh) if dep_off <= horizon else None
    return EvForecast(avail, requirement)
