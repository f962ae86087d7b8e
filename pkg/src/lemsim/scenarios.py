"""Scenario matrix enumeration and deterministic device assignment.

A scenario is one topology plus penetration shares for PV, EV, and heat
pumps.  Assignment is reproducible: three independent seeded shuffles of
the residential index list decide who gets which technology, so raising
one share never reshuffles another technology and never strips a device
from a previously equipped household (prefix property).  All scenarios
of one topology share a seed, which keeps share sweeps comparable.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from .core import (
    STEPS_PER_WEEK,
    SHARE_LEVELS,
    WEEK_NAMES,
    BatterySpec,
    DeviceDefaults,
    DeviceSpec,
    EvSpec,
    FixedLoadSpec,
    GridTopology,
    HeatDemandSpec,
    HemsDefaults,
    HemsParams,
    HpSpec,
    PvSpec,
    Scenario,
    TimeSeries,
    round_div_half_even,
)
from .profiles import (
    ProfileError,
    ProfileMissing,
    ProfileSet,
    synth_business_load,
    synth_ev_itinerary,
    synth_heat_demand,
    synth_household_load,
    synth_pv_capacity_factor,
)

# sub-stream tags for the assignment draws
_STREAM_PV = 11
_STREAM_EV = 12
_STREAM_HP = 13
_STREAM_HORIZON = 14
_STREAM_RES_AGENT = 21
_STREAM_NONRES_AGENT = 22

PV_CF_PROFILE = "pvcf/shared"
COP_PROFILE = "cop/shared"


def _sub_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def topology_seed(seed: int, topology_name: str) -> int:
    """Seed shared by every scenario of one topology (order independent)."""
    return _sub_seed(seed, 101, zlib.crc32(topology_name.encode()))


def share_grid() -> tuple[tuple[int, int, int], ...]:
    """The full (pv, ev, hp) share cross product, 125 triples."""
    return tuple((pv, ev, hp)
                 for pv in SHARE_LEVELS
                 for ev in SHARE_LEVELS
                 for hp in SHARE_LEVELS)


def enumerate_scenarios(topologies, weeks=WEEK_NAMES, seed: int = 0,
                        share_triples=None) -> list[Scenario]:
    """All runnable scenarios, ordered by (topology, pv, ev, hp).

    Triples with zero PV cannot trade locally and are filtered out; use
    raw_scenario_count for the unfiltered matrix size.
    """
    triples = sorted(share_triples) if share_triples is not None \
        else share_grid()
    out: list[Scenario] = []
    for topo in topologies:
        tseed = topology_seed(seed, topo.name)
        for pv, ev, hp in triples:
            if pv <= 0:
                continue
            out.append(Scenario(topo, pv, ev, hp, tseed, tuple(weeks)))
    return out


def raw_scenario_count(topologies, share_triples=None) -> int:
    n = len(share_triples) if share_triples is not None else len(share_grid())
    return len(topologies) * n


def manifest_dict(scenario: Scenario) -> dict:
    """JSON-ready description of one scenario."""
    return {
        "id": scenario.scenario_id,
        "topology": scenario.topology.name,
        "shares": {"pv": scenario.share_pv, "ev": scenario.share_ev,
                   "hp": scenario.share_hp},
        "seed": scenario.seed,
        "weeks": list(scenario.weeks),
    }


# ---------------------------------------------------------------------------
# agent roster
# ---------------------------------------------------------------------------

RESIDENTIAL = "residential"
NON_RESIDENTIAL = "non_residential"


@dataclass(frozen=True)
class Agent:
    agent_id: str
    building_class: str
    devices: tuple[DeviceSpec, ...]
    hems: HemsParams

    def find(self, spec_type) -> DeviceSpec | None:
        for dev in self.devices:
            if isinstance(dev, spec_type):
                return dev
        return None


@dataclass(frozen=True)
class AgentRoster:
    topology: GridTopology
    shares: tuple[int, int, int]
    seed: int
    agents: tuple[Agent, ...]

    def count_with(self, spec_type) -> int:
        return sum(1 for a in self.agents if a.find(spec_type) is not None)

    def residential(self) -> tuple[Agent, ...]:
        return tuple(a for a in self.agents
                     if a.building_class == RESIDENTIAL)


def _equipped(seed: int, stream: int, n: int, share: int) -> set[int]:
    count = round_div_half_even(share * n, 100)
    order = np.arange(n)
    rng = np.random.default_rng(np.random.SeedSequence([seed, stream]))
    rng.shuffle(order)
    return set(int(i) for i in order[:count])


def residential_id(index: int) -> str:
    return f"res{index + 1:03d}"


def non_residential_id(index: int) -> str:
    return f"nr{index + 1:02d}"


def assign_devices(topology: GridTopology, shares: tuple[int, int, int],
                   profile_set: ProfileSet, seed: int,
                   defaults: DeviceDefaults = DeviceDefaults(),
                   hems: HemsDefaults = HemsDefaults(),
                   weeks=WEEK_NAMES) -> AgentRoster:
    """Equip the topology's households for one share triple.

    Residential agents all carry a fixed load and a heat demand; PV
    (always with a battery), EV, and HP are granted to seeded-shuffle
    prefixes of the residential list.  Non-residential agents carry only
    a fixed load plus an uncoupled heat demand.  Trading horizons come
    from one dedicated stream covering all agents in id order.
    """
    share_pv, share_ev, share_hp = shares
    n_res = topology.residential_count
    pv_set = _equipped(seed, _STREAM_PV, n_res, share_pv)
    ev_set = _equipped(seed, _STREAM_EV, n_res, share_ev)
    hp_set = _equipped(seed, _STREAM_HP, n_res, share_hp)

    hrng = np.random.default_rng(np.random.SeedSequence([seed, _STREAM_HORIZON]))
    horizons = hrng.integers(hems.trading_horizon_min,
                             hems.trading_horizon_max + 1,
                             size=topology.agent_count)

    agents: list[Agent] = []
    for i in range(n_res):
        aid = residential_id(i)
        devices: list[DeviceSpec] = [FixedLoadSpec(f"load/{aid}"),
                                     HeatDemandSpec(f"heat/{aid}")]
        if i in pv_set:
            devices.append(PvSpec(defaults.pv_peak_w, PV_CF_PROFILE))
            devices.append(BatterySpec(defaults.battery_capacity_wh,
                                       defaults.battery_power_w,
                                       defaults.battery_eta_charge,
                                       defaults.battery_eta_discharge))
        if i in ev_set:
            devices.append(EvSpec(defaults.ev_capacity_wh,
                                  defaults.ev_charge_power_w,
                                  f"ev/{aid}", defaults.ev_eta_charge))
        if i in hp_set:
            devices.append(HpSpec(defaults.hp_max_thermal_w, COP_PROFILE,
                                  defaults.hp_storage_capacity_wh,
                                  defaults.hp_storage_loss))
        agents.append(Agent(aid, RESIDENTIAL, tuple(devices),
                            hems.for_agent(int(horizons[i]))))
    for j in range(topology.non_residential_count):
        aid = non_residential_id(j)
        devices = [FixedLoadSpec(f"load/{aid}"), HeatDemandSpec(f"heat/{aid}")]
        agents.append(Agent(aid, NON_RESIDENTIAL, tuple(devices),
                            hems.for_agent(int(horizons[n_res + j]))))

    roster = AgentRoster(topology, (share_pv, share_ev, share_hp), seed,
                         tuple(agents))
    _check_profiles(roster, profile_set, weeks)
    return roster


def _check_profiles(roster: AgentRoster, profile_set: ProfileSet,
                    weeks) -> None:
    for agent in roster.agents:
        for week in weeks:
            for dev in agent.devices:
                if isinstance(dev, FixedLoadSpec):
                    wanted = dev.load_profile
                elif isinstance(dev, HeatDemandSpec):
                    wanted = dev.heat_profile
                elif isinstance(dev, PvSpec):
                    wanted = dev.cf_profile
                elif isinstance(dev, HpSpec):
                    wanted = dev.cop_profile
                elif isinstance(dev, EvSpec):
                    if not profile_set.has_itinerary(dev.itinerary_profile,
                                                     week):
                        raise ProfileMissing(
                            f"{agent.agent_id}: no itinerary "
                            f"{dev.itinerary_profile!r} for {week!r}")
                    continue
                else:
                    continue
                if not profile_set.has_series(wanted, week):
                    raise ProfileMissing(
                        f"{agent.agent_id}: no series {wanted!r} for {week!r}")


# ---------------------------------------------------------------------------
# profile synthesis for a topology
# ---------------------------------------------------------------------------

def _split_nonres(total_kwh: int, res_count: int, per_res_kwh: int,
                  nonres_count: int, what: str) -> list[int]:
    """Equal split (in Wh) of the non-residential remainder of a total."""
    if nonres_count == 0:
        return []
    remainder_wh = (total_kwh - res_count * per_res_kwh) * 1000
    if remainder_wh < 0:
        raise ProfileError(
            f"topology annual {what} below the residential defaults")
    base, extra = divmod(remainder_wh, nonres_count)
    return [base + (1 if j < extra else 0) for j in range(nonres_count)]


def build_profiles(topology: GridTopology, seed: int,
                   defaults: DeviceDefaults = DeviceDefaults(),
                   weeks=WEEK_NAMES) -> ProfileSet:
    """Synthesize every profile the topology's agents can reference.

    The set is share independent: it covers all residential agents with
    load, heat, and an EV itinerary, shared PV capacity factors and COP
    series, and non-residential loads sized so the topology's annual
    totals are met.
    """
    ps = ProfileSet()
    res_load_wh = defaults.annual_elec_kwh * 1000
    res_heat_wh = defaults.annual_heat_kwh * 1000
    nonres_load = _split_nonres(topology.annual_elec_kwh,
                                topology.residential_count,
                                defaults.annual_elec_kwh,
                                topology.non_residential_count, "electricity")
    nonres_heat = _split_nonres(topology.annual_heat_kwh,
                                topology.residential_count,
                                defaults.annual_heat_kwh,
                                topology.non_residential_count, "heat")
    away_wh = defaults.ev_weekly_away_kwh * 1000
    for week in weeks:
        ps.add_series(PV_CF_PROFILE, week,
                      synth_pv_capacity_factor(seed, week))
        cop = defaults.cop_centi(week)
        ps.add_series(COP_PROFILE, week,
                      TimeSeries(0, (cop,) * STEPS_PER_WEEK, "centi"))
        for i in range(topology.residential_count):
            aid = residential_id(i)
            aseed = _sub_seed(seed, _STREAM_RES_AGENT, i)
            ps.add_series(f"load/{aid}", week,
                          synth_household_load(aseed, res_load_wh, week))
            ps.add_series(f"heat/{aid}", week,
                          synth_heat_demand(aseed, res_heat_wh, week))
            ps.add_itinerary(f"ev/{aid}", week,
                             synth_ev_itinerary(aseed, week,
                                                defaults.ev_capacity_wh,
                                                away_wh))
        for j in range(topology.non_residential_count):
            aid = non_residential_id(j)
            aseed = _sub_seed(seed, _STREAM_NONRES_AGENT, j)
            ps.add_series(f"load/{aid}", week,
                          synth_business_load(aseed, nonres_load[j], week))
            ps.add_series(f"heat/{aid}", week,
                          synth_heat_demand(aseed, nonres_heat[j], week))
    return ps
