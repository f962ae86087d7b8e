"""Exact integer scheduling kernel based on min-cost flow.

With lossless storage the receding-horizon scheduling problem of one
household is a pure network flow: every Wh moves between the grid node,
the house bus of each step, and the storage chains of battery, vehicle
and heat buffer.  Solving it as an integer min-cost flow gives
bit-identical plans on every platform and is far faster than a general
LP solver, which matters when every agent re-plans every quarter hour
of a simulated year.

Quantities are int64 Wh, prices int64 milli-cent per kWh.  The search
runs successive shortest paths, but augments along every shortest path
found by a blocking-flow pass over the zero-reduced-cost subgraph before
computing new potentials, so the number of Dijkstra rounds stays small.
The initial potentials are analytic (zero everywhere except the grid
node at minus the best sale price or the battery hold value, whichever
is larger); they are dual feasible because the cheapest purchase price,
floor plus levies, exceeds both by construction, so no Bellman-Ford
warm-up is required.

Battery charge remaining at the end of the horizon drains through a
terminal arc whose cost is minus ``b_hold``.  With the default of zero
the end state is worthless and every surplus is sold inside the
horizon.  A rolling-horizon controller instead passes the sale price
plus a small margin: energy a household can export at any time is never
worth less than the feed-in rate, so the plan keeps charge for the day
beyond the horizon edge instead of liquidating it, which is also what
keeps the vehicle's return or a clouded afternoon from forcing a
buy-back at full tariff.  The hold value must stay below every purchase
price or the plan would buy energy just to hold it.

Price forecasts are flat most of the time, which leaves the money-only
problem massively degenerate: buying now and storing costs exactly the
same as buying at delivery, so naive solvers pick arbitrary timings that
synchronize across households into artificial grid peaks.  The kernel
therefore solves twice.  The first pass minimizes true cost; by
complementary slackness its potentials fix every arc that no optimal
plan may use (positive reduced cost) or must saturate (negative reduced
cost), so the remaining zero-reduced-cost network is exactly the set of
cost-optimal plans.  The second pass picks, among those, the plan that
(a) charges the vehicle as early as possible, mirroring the plug-in
behaviour a household shows without any market, (b) levels surplus
injection over time, absorbing the steepest injection peaks into
storage first, which is what actually caps the feeder peak on sunny
days, and (c) sells and discharges as late as equal cost allows, so the
battery rides as full as the leveling permits and its charge doubles as
a reserve against forecast misses at delivery; heat storage instead
runs just in time.  The reported objective is computed from the final
flows at true prices, so the tie-break never changes what a plan costs,
only which optimum is returned.
"""
from __future__ import annotations

import numpy as np
from numba import njit

INF_CAP = 1 << 40
PENALTY_MCT = 10_000_000

# tie-break weights (second pass only).  Injection is priced
# progressively in blocks of EXPORT_TIER_WH, each block EXPORT_TIER_PERT
# dearer than the one below; the rising price makes storage absorb the
# very highest injection steps first and spreads the remaining sales
# into the flat hours, which is what actually caps the feeder peak on
# sunny days.  Within a block, selling and discharging pay a bias that
# falls linearly with time, so among equal-cost plans the battery keeps
# its charge as long as possible: the held energy doubles as a reserve
# against forecast misses at delivery.  Vehicle charging at step t costs
# 2t per Wh, which both plugs in early (the behaviour a household shows
# without a market) and dominates the discharge bias, so a transfer from
# battery to vehicle still lands right after arrival.  Heat storage
# instead pays 1 per Wh held per step and runs just in time, since a
# warm buffer has no delivery to back.  A single block increment beats
# any of the time biases over a 96-step day, so flattening wins whenever
# the storages have room
EXPORT_TIER_WH = 500
EXPORT_TIER_PERT = 1000
N_EXPORT_TIERS = 6
CARRY_PERT = 1

_HEAP_SHIFT = 12          # heap keys are dist << 12 | node, so node < 4096
_BIG = 1 << 62


@njit(cache=True)
def _ssp(n_nodes, m, au, av, ac, aw, excess, pi):
    """Successive shortest paths; mutates excess and pi.

    Returns (status, cap) with status 1 on success and cap the residual
    capacities (forward arc i at slot 2i, reverse at 2i + 1), so the
    flow on arc i is cap[2i + 1].
    """
    n_slots = 2 * m
    cap = np.zeros(n_slots, np.int64)
    cost = np.zeros(n_slots, np.int64)
    to = np.zeros(n_slots, np.int32)
    tail = np.zeros(n_slots, np.int32)
    for i in range(m):
        s = 2 * i
        to[s] = av[i]
        tail[s] = au[i]
        cap[s] = ac[i]
        cost[s] = aw[i]
        r = s + 1
        to[r] = au[i]
        tail[r] = av[i]
        cost[r] = -aw[i]

    start = np.zeros(n_nodes + 1, np.int32)
    for s in range(n_slots):
        start[tail[s] + 1] += 1
    for v in range(n_nodes):
        start[v + 1] += start[v]
    fill = start[:-1].copy()
    adj = np.zeros(n_slots, np.int32)
    for s in range(n_slots):
        adj[fill[tail[s]]] = s
        fill[tail[s]] += 1

    remaining = np.int64(0)
    for v in range(n_nodes):
        if excess[v] > 0:
            remaining += excess[v]

    dist = np.empty(n_nodes, np.int64)
    heap = np.empty(4 * n_slots + 2 * n_nodes + 16, np.int64)
    cur = np.empty(n_nodes, np.int32)
    stamp = np.zeros(n_nodes, np.int64)
    mark = np.int64(0)
    stack_node = np.empty(n_nodes + 1, np.int32)
    stack_arc = np.empty(n_nodes + 1, np.int32)

    while remaining > 0:
        # Dijkstra from all excess nodes over reduced costs.  The search
        # runs until the whole distance tier of the nearest deficit is
        # finalized, so the blocking pass below can feed every deficit
        # tied at that distance in a single round; capping the potential
        # update at that tier keeps the remaining labels valid
        for v in range(n_nodes):
            dist[v] = _BIG
        hn = 0
        for v in range(n_nodes):
            if excess[v] > 0:
                dist[v] = 0
                heap[hn] = v
                i = hn
                hn += 1
                while i > 0:
                    p = (i - 1) >> 1
                    if heap[p] <= heap[i]:
                        break
                    heap[p], heap[i] = heap[i], heap[p]
                    i = p
        sink_d = _BIG
        while hn > 0:
            key = heap[0]
            hn -= 1
            heap[0] = heap[hn]
            i = 0
            while True:
                l = 2 * i + 1
                if l >= hn:
                    break
                if l + 1 < hn and heap[l + 1] < heap[l]:
                    l += 1
                if heap[i] <= heap[l]:
                    break
                heap[i], heap[l] = heap[l], heap[i]
                i = l
            d = key >> _HEAP_SHIFT
            u = np.int32(key & ((1 << _HEAP_SHIFT) - 1))
            if d > sink_d:
                break
            if d > dist[u]:
                continue
            if excess[u] < 0 and sink_d == _BIG:
                sink_d = d
            for k in range(start[u], start[u + 1]):
                a = adj[k]
                if cap[a] > 0:
                    v = to[a]
                    nd = d + cost[a] + pi[u] - pi[v]
                    if nd < dist[v]:
                        dist[v] = nd
                        if hn >= heap.shape[0]:
                            return -1, cap
                        heap[hn] = (nd << _HEAP_SHIFT) | v
                        i = hn
                        hn += 1
                        while i > 0:
                            p = (i - 1) >> 1
                            if heap[p] <= heap[i]:
                                break
                            heap[p], heap[i] = heap[i], heap[p]
                            i = p
        if sink_d == _BIG:
            return -2, cap
        for v in range(n_nodes):
            dv = dist[v]
            if dv > sink_d:
                dv = sink_d
            pi[v] += dv

        pushed = remaining
        # blocking pass: push along every augmenting path that uses only
        # zero-reduced-cost arcs, restarting Dijkstra once none is left
        for v in range(n_nodes):
            cur[v] = start[v]
        for s in range(n_nodes):
            while excess[s] > 0:
                mark += 1
                sn = 0
                stack_node[0] = s
                stamp[s] = mark
                found = -1
                while sn >= 0:
                    u = stack_node[sn]
                    if excess[u] < 0 and sn > 0:
                        found = sn
                        break
                    advanced = False
                    k = cur[u]
                    while k < start[u + 1]:
                        a = adj[k]
                        v = to[a]
                        if (cap[a] > 0 and stamp[v] != mark
                                and cost[a] + pi[u] - pi[v] == 0):
                            cur[u] = k
                            sn += 1
                            stack_node[sn] = v
                            stack_arc[sn] = a
                            stamp[v] = mark
                            advanced = True
                            break
                        k += 1
                    if not advanced:
                        cur[u] = start[u + 1]
                        sn -= 1
                if found < 0:
                    break
                t_node = stack_node[found]
                f = -excess[t_node]
                if excess[s] < f:
                    f = excess[s]
                for i in range(1, found + 1):
                    a = stack_arc[i]
                    if cap[a] < f:
                        f = cap[a]
                for i in range(1, found + 1):
                    a = stack_arc[i]
                    cap[a] -= f
                    cap[a ^ 1] += f
                excess[s] -= f
                excess[t_node] += f
                remaining -= f
        if remaining == pushed:
            # nothing moved: no deficit is reachable from any excess node
            return -2, cap
    return 1, cap


@njit(cache=True)
def solve_mcf(H, load, pv, pb, ps,
              has_batt, b_cap, b_pow, b_soc0, b_hold,
              ev_len, ev_avail, ev_cap, ev_pow, ev_soc0, ev_req, ev_target,
              has_th, th_cap, th_pow, th_soc0, th_dem):
    """Solve one scheduling instance; see hems.plan_schedule for the wrapper.

    Returns (status, obj_mct_wh, slack_wh, imp, exp, bch, bdis, evch, hpe)
    where status is 1 on success and obj excludes any slack penalty.
    """
    n_batt = H if has_batt else 0
    n_th = H if has_th else 0
    off_bus = 1
    off_b = off_bus + H
    off_e = off_b + n_batt
    off_th = off_e + ev_len
    n_nodes = off_th + n_th

    m_max = ((1 + N_EXPORT_TIERS) * H + 3 * H + 1 + 2 * ev_len + 2
             + 3 * H + 1 + 4)
    au = np.zeros(m_max, np.int32)
    av = np.zeros(m_max, np.int32)
    ac = np.zeros(m_max, np.int64)
    aw = np.zeros(m_max, np.int64)      # true cost, first pass
    ap = np.zeros(m_max, np.int64)      # tie-break cost, second pass
    m = 0

    imp_arc = np.full(H, -1, np.int32)
    exp_arc = np.full((N_EXPORT_TIERS, H), -1, np.int32)
    bch_arc = np.full(H, -1, np.int32)
    bdis_arc = np.full(H, -1, np.int32)
    evch_arc = np.full(H, -1, np.int32)
    hpe_arc = np.full(H, -1, np.int32)
    slack_arcs = np.full(H + 1, -1, np.int32)
    n_slack = 0

    for t in range(H):
        au[m] = 0
        av[m] = off_bus + t
        ac[m] = INF_CAP
        aw[m] = pb[t]
        imp_arc[t] = m
        m += 1
        for k in range(N_EXPORT_TIERS):
            au[m] = off_bus + t
            av[m] = 0
            ac[m] = EXPORT_TIER_WH if k + 1 < N_EXPORT_TIERS else INF_CAP
            aw[m] = -ps[t]
            ap[m] = k * EXPORT_TIER_PERT + (H - 1 - t)
            exp_arc[k, t] = m
            m += 1

    if has_batt:
        for t in range(H):
            au[m] = off_bus + t
            av[m] = off_b + t
            ac[m] = b_pow
            bch_arc[t] = m
            m += 1
            au[m] = off_b + t
            av[m] = off_bus + t
            ac[m] = b_pow
            ap[m] = H - 1 - t
            bdis_arc[t] = m
            m += 1
            if t + 1 < H:
                au[m] = off_b + t
                av[m] = off_b + t + 1
                ac[m] = b_cap
                m += 1
        au[m] = off_b + H - 1
        av[m] = 0
        ac[m] = b_cap
        aw[m] = -b_hold
        m += 1

    if ev_len > 0:
        for t in range(ev_len):
            if ev_avail[t] > 0:
                au[m] = off_bus + t
                av[m] = off_e + t
                ac[m] = ev_pow
                ap[m] = 2 * t
                evch_arc[t] = m
                m += 1
            if t + 1 < ev_len:
                au[m] = off_e + t
                av[m] = off_e + t + 1
                ac[m] = ev_cap
                m += 1
        au[m] = off_e + ev_len - 1
        av[m] = 0
        ac[m] = ev_cap
        m += 1
        if ev_req:
            au[m] = 0
            av[m] = off_e + ev_len - 1
            ac[m] = ev_target
            aw[m] = PENALTY_MCT
            slack_arcs[n_slack] = m
            n_slack += 1
            m += 1

    if has_th:
        for t in range(H):
            au[m] = off_bus + t
            av[m] = off_th + t
            ac[m] = th_pow
            hpe_arc[t] = m
            m += 1
            if t + 1 < H:
                au[m] = off_th + t
                av[m] = off_th + t + 1
                ac[m] = th_cap
                ap[m] = CARRY_PERT
                m += 1
            if th_dem[t] > 0:
                au[m] = 0
                av[m] = off_th + t
                ac[m] = th_dem[t]
                aw[m] = PENALTY_MCT
                slack_arcs[n_slack] = m
                n_slack += 1
                m += 1
        au[m] = off_th + H - 1
        av[m] = 0
        ac[m] = th_cap
        m += 1

    # node balances; the grid node absorbs whatever is left over
    excess = np.zeros(n_nodes, np.int64)
    for t in range(H):
        excess[off_bus + t] = pv[t] - load[t]
    if has_batt:
        excess[off_b] += b_soc0
    if ev_len > 0:
        excess[off_e] += ev_soc0
        if ev_req:
            excess[off_e + ev_len - 1] -= ev_target
    if has_th:
        excess[off_th] += th_soc0
        for t in range(H):
            excess[off_th + t] -= th_dem[t]
    total = np.int64(0)
    for v in range(1, n_nodes):
        total += excess[v]
    excess[0] = -total

    pi = np.zeros(n_nodes, np.int64)
    max_ps = np.int64(0)
    for t in range(H):
        if ps[t] > max_ps:
            max_ps = ps[t]
    if has_batt and b_hold > max_ps:
        max_ps = b_hold
    pi[0] = -max_ps

    fail = np.zeros(H, np.int64)
    status, _ = _ssp(n_nodes, m, au, av, ac, aw, excess, pi)
    if status != 1:
        return (status, np.int64(0), np.int64(0),
                fail, fail, fail, fail, fail, fail)

    # second pass over the optimal face: arcs with positive reduced cost
    # are banned from every optimum, negative ones are saturated in every
    # optimum (their flow moves into the node balances), and what remains
    # is re-solved for the cheapest tie-break cost
    forced = np.zeros(m, np.int64)
    ac2 = np.zeros(m, np.int64)
    # the first pass consumed its excess array; rebuild the balances
    excess2 = np.zeros(n_nodes, np.int64)
    for t in range(H):
        excess2[off_bus + t] = pv[t] - load[t]
    if has_batt:
        excess2[off_b] += b_soc0
    if ev_len > 0:
        excess2[off_e] += ev_soc0
        if ev_req:
            excess2[off_e + ev_len - 1] -= ev_target
    if has_th:
        excess2[off_th] += th_soc0
        for t in range(H):
            excess2[off_th + t] -= th_dem[t]
    total = np.int64(0)
    for v in range(1, n_nodes):
        total += excess2[v]
    excess2[0] = -total

    for i in range(m):
        rc = aw[i] + pi[au[i]] - pi[av[i]]
        if rc > 0:
            ac2[i] = 0
        elif rc < 0:
            forced[i] = ac[i]
            excess2[au[i]] -= ac[i]
            excess2[av[i]] += ac[i]
        else:
            ac2[i] = ac[i]

    pi2 = np.zeros(n_nodes, np.int64)
    status, cap2 = _ssp(n_nodes, m, au, av, ac2, ap, excess2, pi2)
    if status != 1:
        # cannot happen: the first-pass optimum is feasible here
        return (-3, np.int64(0), np.int64(0),
                fail, fail, fail, fail, fail, fail)

    imp = np.zeros(H, np.int64)
    exp_ = np.zeros(H, np.int64)
    bch = np.zeros(H, np.int64)
    bdis = np.zeros(H, np.int64)
    evch = np.zeros(H, np.int64)
    hpe = np.zeros(H, np.int64)
    for t in range(H):
        imp[t] = forced[imp_arc[t]] + cap2[2 * imp_arc[t] + 1]
        for k in range(N_EXPORT_TIERS):
            a = exp_arc[k, t]
            exp_[t] += forced[a] + cap2[2 * a + 1]
        if bch_arc[t] >= 0:
            bch[t] = forced[bch_arc[t]] + cap2[2 * bch_arc[t] + 1]
            bdis[t] = forced[bdis_arc[t]] + cap2[2 * bdis_arc[t] + 1]
            w = bch[t] if bch[t] < bdis[t] else bdis[t]
            bch[t] -= w
            bdis[t] -= w
        if evch_arc[t] >= 0:
            evch[t] = forced[evch_arc[t]] + cap2[2 * evch_arc[t] + 1]
        if hpe_arc[t] >= 0:
            hpe[t] = forced[hpe_arc[t]] + cap2[2 * hpe_arc[t] + 1]
        # buying and exporting in one step wastes money, net that out too
        w = imp[t] if imp[t] < exp_[t] else exp_[t]
        imp[t] -= w
        exp_[t] -= w

    slack = np.int64(0)
    for i in range(n_slack):
        a = slack_arcs[i]
        slack += forced[a] + cap2[2 * a + 1]

    obj = np.int64(0)
    for t in range(H):
        obj += imp[t] * pb[t] - exp_[t] * ps[t]
    return (1, obj, slack, imp, exp_, bch, bdis, evch, hpe)
