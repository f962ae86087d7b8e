"""Demand, generation and mobility profiles.

Profiles come from CSV files or from the seeded synthesizers below.  All
synthesizers are pure functions of their seed arguments, draw from
numpy's SeedSequence-keyed PCG64 streams, and emit integer series, so the
same inputs reproduce bit-identical profiles on every platform.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    STEPS_PER_DAY,
    STEPS_PER_WEEK,
    STEPS_PER_YEAR,
    WEEK_NAMES,
    TimeSeries,
    round_div_half_away,
)


class ProfileError(ValueError):
    """Base class for profile problems."""


class ParseError(ProfileError):
    pass


class NonMonotonicSteps(ProfileError):
    pass


class NegativeLoad(ProfileError):
    pass


class ZeroSourceSum(ProfileError):
    pass


class ProfileMissing(ProfileError, KeyError):
    pass


# Seed-stream tags so each profile kind draws from an independent stream.
_KIND_HOUSEHOLD = 1
_KIND_PV = 2
_KIND_HEAT = 3
_KIND_EV = 4
_KIND_BUSINESS = 5

_WEEK_CODE = {name: i + 1 for i, name in enumerate(WEEK_NAMES)}


def _rng(seed: int, kind: int, week: str, extra: int = 0) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([seed, kind, _WEEK_CODE[week], extra]))


# ---------------------------------------------------------------------------
# CSV input
# ---------------------------------------------------------------------------

def read_profile_csv(path: str | Path, unit: str) -> TimeSeries:
    """Read a `step,value` CSV into an integer series starting at step 0.

    Steps must run 0..n-1 without gaps.  Values are converted to integer
    base units (round half away from zero); negative values are rejected
    for load-like units.
    """
    path = Path(path)
    values: list[int] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header[:2]] != ["step", "value"]:
            raise ParseError(f"{path}: expected header 'step,value'")
        for lineno, row in enumerate(reader):
            if len(row) < 2:
                raise ParseError(f"{path}:{lineno + 2}: expected two columns")
            try:
                step = int(row[0])
                raw = float(row[1])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno + 2}: {exc}") from None
            if step != lineno:
                raise NonMonotonicSteps(
                    f"{path}:{lineno + 2}: expected step {lineno}, got {step}")
            if not math.isfinite(raw):
                raise ParseError(f"{path}:{lineno + 2}: non-finite value")
            value = math.floor(raw + 0.5) if raw >= 0 else -math.floor(-raw + 0.5)
            if value < 0:
                raise NegativeLoad(f"{path}:{lineno + 2}: negative value")
            values.append(value)
    if not values:
        raise ParseError(f"{path}: no data rows")
    return TimeSeries(0, tuple(values), unit)


# ---------------------------------------------------------------------------
# exact integer rescaling
# ---------------------------------------------------------------------------

def apportion(values, target_total: int) -> tuple[int, ...]:
    """Scale non-negative integers so they sum exactly to target_total.

    Largest-remainder rounding: each value gets floor(v * T / S), leftover
    units go to the largest fractional remainders, earliest index first on
    ties.  Zeros stay zero and the relative order of values is preserved.
    """
    values = [int(v) for v in values]
    if any(v < 0 for v in values):
        raise NegativeLoad("apportion expects non-negative values")
    if target_total < 0:
        raise ValueError("target_total must be >= 0")
    src = sum(values)
    if src == 0:
        raise ZeroSourceSum("cannot rescale an all-zero series")
    base = [v * target_total // src for v in values]
    remainders = [v * target_total % src for v in values]
    leftover = target_total - sum(base)
    if leftover:
        order = sorted(range(len(values)), key=lambda i: (-remainders[i], i))
        for i in order[:leftover]:
            base[i] += 1
    return tuple(base)


def scale_to_annual(ts: TimeSeries, target_annual: int) -> TimeSeries:
    """Rescale a series to its year-fraction share of an annual total.

    A one-week series covering 672 of the 34944 steps of the 52-week model
    year is scaled so its sum equals round(target_annual / 52) exactly.
    """
    target = round_div_half_away(target_annual * len(ts.values), STEPS_PER_YEAR)
    return TimeSeries(ts.start, apportion(ts.values, target), ts.unit)


# ---------------------------------------------------------------------------
# synthetic household electricity demand
# ---------------------------------------------------------------------------

def _household_shape(step: int, weekend: bool) -> float:
    hour = (step % STEPS_PER_DAY) / 4.0
    if hour < 5.5:
        base = 0.12
    elif hour < 9.0:
        base = 0.40 if not weekend else 0.22
    elif hour < 17.0:
        base = 0.22 if not weekend else 0.34
    elif hour < 22.0:
        base = 0.52
    else:
        base = 0.20
    return base


def synth_household_load(seed: int, annual_wh: int, week: str) -> TimeSeries:
    """One week of 15-minute household demand, scaled to annual_wh / 52."""
    rng = _rng(seed, _KIND_HOUSEHOLD, week)
    weights = np.empty(STEPS_PER_WEEK)
    noise = rng.random(STEPS_PER_WEEK)
    spikes = rng.random(STEPS_PER_WEEK)
    for s in range(STEPS_PER_WEEK):
        weekend = (s // STEPS_PER_DAY) >= 5
        hour = (s % STEPS_PER_DAY) / 4.0
        base = _household_shape(s, weekend)
        if hour < 5.5 or hour >= 23.0:
            # overnight demand is appliance base load and close to flat
            w = base * (0.95 + 0.1 * noise[s])
        else:
            w = base * (0.8 + 0.4 * noise[s])
            if spikes[s] < 0.05:                  # cooking / washing burst
                w += 0.9 + 1.2 * spikes[s] * 16
        weights[s] = w
    target = round_div_half_away(annual_wh * STEPS_PER_WEEK, STEPS_PER_YEAR)
    scaled = apportion(np.rint(weights * 1000).astype(np.int64), target)
    return TimeSeries(0, scaled, "Wh")


def synth_business_load(seed: int, annual_wh: int, week: str) -> TimeSeries:
    """One week of 15-minute demand of a non-residential building."""
    rng = _rng(seed, _KIND_BUSINESS, week)
    noise = rng.random(STEPS_PER_WEEK)
    weights = np.empty(STEPS_PER_WEEK)
    for s in range(STEPS_PER_WEEK):
        hour = (s % STEPS_PER_DAY) / 4.0
        weekend = (s // STEPS_PER_DAY) >= 5
        if 7.0 <= hour < 18.0 and not weekend:
            w = 1.0
        elif 7.0 <= hour < 14.0 and weekend:
            w = 0.45
        else:
            w = 0.18
        weights[s] = w * (0.8 + 0.4 * noise[s])
    target = round_div_half_away(annual_wh * STEPS_PER_WEEK, STEPS_PER_YEAR)
    scaled = apportion(np.rint(weights * 1000).astype(np.int64), target)
    return TimeSeries(0, scaled, "Wh")


# ---------------------------------------------------------------------------
# synthetic PV capacity factors
# ---------------------------------------------------------------------------

_PV_SEASON = {
    # amplitude (per-mille), sunrise hour, sunset hour, cloud exponent
    "summer": (760, 5.5, 21.0, 2.0),
    "transition": (520, 6.5, 19.0, 1.4),
    "winter": (240, 8.0, 16.5, 1.0),
}


def synth_pv_capacity_factor(seed: int, week: str) -> TimeSeries:
    """One week of per-mille PV capacity factors (0..1000), zero at night."""
    amplitude, sunrise, sunset, clear_exp = _PV_SEASON[week]
    rng = _rng(seed, _KIND_PV, week)
    # weather regimes persist for days at a time, which is what makes a
    # two-day-average forecast usable at all; independent daily draws
    # would overstate day-to-day swings several-fold
    draws = rng.random(7)
    cloud = np.empty(7)
    level = draws[0]
    for d in range(7):
        if d:
            level = 0.65 * level + 0.35 * draws[d]
        cloud[d] = 1.0 - 0.7 * level ** clear_exp
    flicker = rng.random(STEPS_PER_WEEK)
    values = np.zeros(STEPS_PER_WEEK, dtype=np.int64)
    for s in range(STEPS_PER_WEEK):
        hour = (s % STEPS_PER_DAY + 0.5) / 4.0
        if not sunrise <= hour < sunset:
            continue
        x = math.sin(math.pi * (hour - sunrise) / (sunset - sunrise))
        cf = amplitude * cloud[s // STEPS_PER_DAY] * (x ** 1.3)
        cf *= 0.92 + 0.08 * flicker[s]
        values[s] = min(1000, max(0, int(cf + 0.5)))
    return TimeSeries(0, tuple(int(v) for v in values), "pm")


def pv_generation(peak_power_w: int, cf: TimeSeries) -> TimeSeries:
    """Energy per step (Wh) of a PV plant from its capacity-factor series."""
    vals = tuple(round_div_half_away(peak_power_w * v, 4000) for v in cf.values)
    return TimeSeries(cf.start, vals, "Wh")


# ---------------------------------------------------------------------------
# synthetic heat demand
# ---------------------------------------------------------------------------

_HEAT_WEEK_FACTOR = {"summer": 0.25, "transition": 1.00, "winter": 1.80}


def synth_heat_demand(seed: int, annual_wh: int, week: str) -> TimeSeries:
    """One week of thermal demand; winter weeks carry the highest totals."""
    rng = _rng(seed, _KIND_HEAT, week)
    day_wobble = 0.7 + 0.6 * rng.random(7)
    noise = rng.random(STEPS_PER_WEEK)
    weights = np.empty(STEPS_PER_WEEK)
    for s in range(STEPS_PER_WEEK):
        hour = (s % STEPS_PER_DAY) / 4.0
        if hour < 5.0:
            w = 0.55
        elif hour < 9.0:
            w = 1.30
        elif hour < 16.0:
            w = 0.85
        elif hour < 23.0:
            w = 1.25
        else:
            w = 0.70
        weights[s] = w * day_wobble[s // STEPS_PER_DAY] * (0.85 + 0.3 * noise[s])
    weekly = round_div_half_away(
        round_div_half_away(annual_wh * STEPS_PER_WEEK, STEPS_PER_YEAR)
        * round(1000 * _HEAT_WEEK_FACTOR[week]), 1000)
    scaled = apportion(np.rint(weights * 1000).astype(np.int64), weekly)
    return TimeSeries(0, scaled, "Wh_th")


# ---------------------------------------------------------------------------
# synthetic EV itineraries
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class EvTrip:
    depart_step: int
    arrive_step: int
    away_wh: int                      # drawn from the pack while away

    def __post_init__(self) -> None:
        if not 0 <= self.depart_step < self.arrive_step:
            raise ValueError("trip must depart before it arrives")
        if self.away_wh < 0:
            raise ValueError("trip consumption must be >= 0")


@dataclass(frozen=True, slots=True)
class EvItinerary:
    """Ordered, non-overlapping away intervals of one vehicle over a week."""

    trips: tuple[EvTrip, ...]

    def __post_init__(self) -> None:
        prev_end = -1
        for trip in self.trips:
            if trip.depart_step <= prev_end:
                raise ValueError("trips must be ordered and non-overlapping")
            prev_end = trip.arrive_step

    def is_home(self, step: int) -> bool:
        for trip in self.trips:
            if trip.depart_step <= step < trip.arrive_step:
                return False
        return True

    def trip_departing(self, step: int) -> EvTrip | None:
        for trip in self.trips:
            if trip.depart_step == step:
                return trip
        return None

    def trip_arriving(self, step: int) -> EvTrip | None:
        for trip in self.trips:
            if trip.arrive_step == step:
                return trip
        return None

    def next_departure(self, step: int) -> int | None:
        """First departure at or after `step`, None if none remains."""
        for trip in self.trips:
            if trip.depart_step >= step:
                return trip.depart_step
        return None


def synth_ev_itinerary(seed: int, week: str, capacity_wh: int,
                       weekly_away_wh: int) -> EvItinerary:
    """Commute and leisure trips; total consumption equals weekly_away_wh.

    Per-trip consumption never exceeds the battery capacity.
    """
    rng = _rng(seed, _KIND_EV, week)
    intervals: list[tuple[int, int]] = []
    weights: list[int] = []
    for day in range(7):
        base = day * STEPS_PER_DAY
        if day < 5:
            depart = base + int(rng.integers(28, 35))      # 07:00 - 08:30
            arrive = base + int(rng.integers(64, 75))      # 16:00 - 18:30
            weight = int(rng.integers(80, 121))
        else:
            if rng.random() < 0.35:
                continue
            depart = base + int(rng.integers(38, 47))      # 09:30 - 11:30
            arrive = depart + int(rng.integers(10, 25))
            weight = int(rng.integers(40, 100))
        intervals.append((depart, arrive))
        weights.append(weight)
    if not intervals:                                       # stay-home week
        intervals = [(5 * STEPS_PER_DAY + 40, 5 * STEPS_PER_DAY + 56)]
        weights = [1]
    packs = apportion(weights, weekly_away_wh) if weekly_away_wh else \
        tuple(0 for _ in weights)
    trips = tuple(
        EvTrip(dep, arr, min(int(wh), capacity_wh))
        for (dep, arr), wh in zip(intervals, packs))
    return EvItinerary(trips)


# ---------------------------------------------------------------------------
# profile container
# ---------------------------------------------------------------------------

class ProfileSet:
    """Profiles keyed by (profile_id, week): integer series or itineraries."""

    def __init__(self) -> None:
        self._series: dict[tuple[str, str], TimeSeries] = {}
        self._itineraries: dict[tuple[str, str], EvItinerary] = {}

    def add_series(self, profile_id: str, week: str, ts: TimeSeries) -> None:
        self._series[(profile_id, week)] = ts

    def add_itinerary(self, profile_id: str, week: str,
                      itinerary: EvItinerary) -> None:
        self._itineraries[(profile_id, week)] = itinerary

    def series(self, profile_id: str, week: str) -> TimeSeries:
        try:
            return self._series[(profile_id, week)]
        except KeyError:
            raise ProfileMissing(f"no series {profile_id!r} for week {week!r}") \
                from None

    def itinerary(self, profile_id: str, week: str) -> EvItinerary:
        try:
            return self._itineraries[(profile_id, week)]
        except KeyError:
            raise ProfileMissing(
                f"no itinerary {profile_id!r} for week {week!r}") from None

    def has_series(self, profile_id: str, week: str) -> bool:
        return (profile_id, week) in self._series

    def has_itinerary(self, profile_id: str, week: str) -> bool:
        return (profile_id, week) in self._itineraries
