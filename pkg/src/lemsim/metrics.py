"""Outcome metrics: average energy price, operational peak power, ratios.

Both metrics are computed from integer ledgers with a single float
division at the end, so fixture values reproduce bit for bit.  Burn-in
steps never count; the run's metered mask excludes them.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import STEPS_PER_WEEK, cash_microeur
from .engine import RunResult

DEFAULT_PEAK_FRACTION = 0.15


class MetricsError(ValueError):
    pass


class NoEnergy(MetricsError):
    """No energy was self-consumed or bought; the price is undefined."""


class ScenarioMismatch(MetricsError):
    pass


class DivByZero(MetricsError):
    pass


@dataclass(frozen=True)
class WeekMetrics:
    week: str
    aep_eur_per_kwh: float | None     # None when the week moved no energy
    opp_kw: float
    k_used: int


@dataclass(frozen=True)
class MetricsReport:
    scenario_id: str
    lem_enabled: bool
    aep_eur_per_kwh: float
    opp_kw: float
    k_used: int
    fraction: float
    include_balancing: bool
    weeks: tuple[WeekMetrics, ...]


def _aep_value(fields: dict, market, mask: np.ndarray,
               include_balancing: bool) -> float:
    self_wh = int(fields["self_consumed_wh"][:, mask].sum())
    buys_wh = int(fields["lem_buy_wh"][:, mask].sum()
                  + fields["wholesale_buy_wh"][:, mask].sum())
    buy_cash = int(fields["lem_buy_cash"][:, mask].sum()
                   + fields["wholesale_buy_cash"][:, mask].sum())
    if include_balancing:
        buys_wh += int(fields["balancing_buy_wh"][:, mask].sum())
        buy_cash += int(fields["balancing_buy_cash"][:, mask].sum())
    den_wh = self_wh + buys_wh
    if den_wh == 0:
        raise NoEnergy("no self-consumed or purchased energy in the window")
    num = (cash_microeur(self_wh, market.feed_in_tariff) + buy_cash
           + cash_microeur(buys_wh, market.levies))
    return num / (den_wh * 1000.0)


def compute_aep(run: RunResult, include_balancing: bool = True,
                mask: np.ndarray | None = None) -> float:
    """Average price of consumed energy in €/kWh over metered steps.

    Self-consumed PV is priced at the feed-in tariff (its lost revenue);
    every bought Wh carries its realized price plus levies.  Balancing
    purchases count by default; the toggle is recorded in reports.
    """
    if mask is None:
        mask = run.metered_mask()
    return _aep_value(run.fields, run.market, mask, include_balancing)


def compute_opp(flow_w, fraction: float = DEFAULT_PEAK_FRACTION
                ) -> tuple[float, int]:
    """Mean of the top fraction of absolute transformer flows, in kW.

    k = max(1, floor(fraction·n)); ties sort by earlier step.  The tiny
    epsilon keeps products like 0.15·40 from flooring one short.
    """
    flow = np.asarray(flow_w, np.int64)
    n = len(flow)
    if n == 0:
        raise MetricsError("flow series is empty")
    if not 0.0 < fraction <= 1.0:
        raise MetricsError("fraction must be in (0, 1]")
    k = max(1, math.floor(fraction * n + 1e-9))
    top = np.sort(np.abs(flow))[n - k:]
    return int(top.sum()) / (k * 1000.0), k


def _week_masks(run: RunResult) -> list[tuple[str, np.ndarray]]:
    masks = []
    for w, week in enumerate(run.weeks):
        mask = np.zeros(run.total_steps, bool)
        start = w * run.steps_per_week + run.burn_in_steps
        mask[start:start + STEPS_PER_WEEK] = True
        masks.append((week, mask))
    return masks


def report_for_run(run: RunResult, fraction: float = DEFAULT_PEAK_FRACTION,
                   include_balancing: bool = True) -> MetricsReport:
    metered = run.metered_mask()
    aep = compute_aep(run, include_balancing, metered)
    opp, k = compute_opp(run.flow_w[metered], fraction)
    weeks = []
    for week, mask in _week_masks(run):
        try:
            w_aep = _aep_value(run.fields, run.market, mask,
                               include_balancing)
        except NoEnergy:
            w_aep = None
        w_opp, w_k = compute_opp(run.flow_w[mask], fraction)
        weeks.append(WeekMetrics(week, w_aep, w_opp, w_k))
    return MetricsReport(run.scenario_id, run.lem_enabled, aep, opp, k,
                         fraction, include_balancing, tuple(weeks))


def compare_runs(with_lem: MetricsReport,
                 without_lem: MetricsReport) -> tuple[float, float]:
    """(aep_ratio, opp_ratio) of a LEM run against its no-LEM twin."""
    if with_lem.scenario_id != without_lem.scenario_id:
        raise ScenarioMismatch(
            f"{with_lem.scenario_id!r} vs {without_lem.scenario_id!r}")
    if without_lem.aep_eur_per_kwh == 0.0 or without_lem.opp_kw == 0.0:
        raise DivByZero("reference run has a zero metric")
    return (with_lem.aep_eur_per_kwh / without_lem.aep_eur_per_kwh,
            with_lem.opp_kw / without_lem.opp_kw)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _report_dict(report: MetricsReport) -> dict:
    return {
        "scenario_id": report.scenario_id,
        "lem_enabled": report.lem_enabled,
        "aep_eur_per_kwh": report.aep_eur_per_kwh,
        "opp_kw": report.opp_kw,
        "k_used": report.k_used,
        "weeks": [{"week": w.week, "aep_eur_per_kwh": w.aep_eur_per_kwh,
                   "opp_kw": w.opp_kw, "k_used": w.k_used}
                  for w in report.weeks],
    }


def pair_metrics(run_with: RunResult, run_without: RunResult,
                 fraction: float = DEFAULT_PEAK_FRACTION,
                 include_balancing: bool = True) -> dict:
    """The metrics.json payload for one LEM-on/off scenario pair."""
    rep_with = report_for_run(run_with, fraction, include_balancing)
    rep_without = report_for_run(run_without, fraction, include_balancing)
    aep_ratio, opp_ratio = compare_runs(rep_with, rep_without)
    return {
        "scenario_id": rep_with.scenario_id,
        "fraction": fraction,
        "include_balancing": include_balancing,
        "with_lem": _report_dict(rep_with),
        "without_lem": _report_dict(rep_without),
        "aep_ratio": aep_ratio,
        "opp_ratio": opp_ratio,
    }


def write_metrics_json(payload: dict, path: str | Path) -> None:
    with Path(path).open("w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


SUMMARY_COLUMNS = ("topology", "pv", "ev", "hp", "aep_with", "aep_without",
                   "aep_ratio", "opp_with", "opp_without", "opp_ratio")


def summary_row(topology: str, shares: tuple[int, int, int],
                payload: dict) -> dict:
    return {
        "topology": topology,
        "pv": shares[0], "ev": shares[1], "hp": shares[2],
        "aep_with": payload["with_lem"]["aep_eur_per_kwh"],
        "aep_without": payload["without_lem"]["aep_eur_per_kwh"],
        "aep_ratio": payload["aep_ratio"],
        "opp_with": payload["with_lem"]["opp_kw"],
        "opp_without": payload["without_lem"]["opp_kw"],
        "opp_ratio": payload["opp_ratio"],
    }


def write_summary_csv(rows: list[dict], path: str | Path) -> None:
    """Sweep summary, one row per scenario, ordered like the sweep."""
    with Path(path).open("w", newline="") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(repr(row[c]) if isinstance(row[c], float)
                              else str(row[c]) for c in SUMMARY_COLUMNS)
                     + "\n")
