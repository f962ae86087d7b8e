"""General LP fallback for scheduling with storage losses.

The min-cost-flow kernel covers the default lossless devices.  When a
configuration introduces charge or discharge efficiencies below one, or
heat storage standby loss, the problem stops being a pure flow and is
handed to scipy's HiGHS backend instead.  This module builds and solves
that LP in floats; the integer repair of its solution lives next to the
feasibility checker in the hems module.

Variable units match the kernel: Wh per step and milli-cent per kWh.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from ._schedule_mcf import PENALTY_MCT


@dataclass(frozen=True)
class LpSolution:
    ok: bool
    objective_mct_wh: float
    imp: np.ndarray
    exp: np.ndarray
    bch: np.ndarray
    bdis: np.ndarray
    evch: np.ndarray
    hpe: np.ndarray
    ev_slack: float
    th_slack: np.ndarray


def solve_lp(H, load, pv, pb, ps,
             has_batt, b_cap, b_pow, b_soc0, b_hold, eta_c, eta_d,
             ev_len, ev_avail, ev_cap, ev_pow, ev_soc0, ev_req, ev_target,
             eta_e,
             has_th, th_cap, th_pow, th_soc0, th_dem, th_loss):
    """Solve one scheduling instance as a float LP.

    Returns an LpSolution; flows are continuous and still need rounding
    into an integer plan by the caller.
    """
    n_imp = 0
    n_exp = H
    off = 2 * H
    if has_batt:
        o_bch, o_bdis, o_bsoc = off, off + H, off + 2 * H
        off += 3 * H
    else:
        o_bch = o_bdis = o_bsoc = -1
    if ev_len > 0:
        o_evch, o_evsoc = off, off + ev_len
        off += 2 * ev_len
        if ev_req:
            o_evslack = off
            off += 1
        else:
            o_evslack = -1
    else:
        o_evch = o_evsoc = o_evslack = -1
    if has_th:
        o_hpe, o_thsoc, o_thslack = off, off + H, off + 2 * H
        off += 3 * H
    else:
        o_hpe = o_thsoc = o_thslack = -1
    n_var = off

    cost = np.zeros(n_var)
    cost[n_imp:n_imp + H] = np.asarray(pb, dtype=float)
    cost[n_exp:n_exp + H] = -np.asarray(ps, dtype=float)
    if has_batt:
        # credit for charge still stored at the horizon end; zero unless
        # the caller values the end state, see plan_schedule
        cost[o_bsoc + H - 1] = -float(b_hold)
    if o_evslack >= 0:
        cost[o_evslack] = PENALTY_MCT
    if o_thslack >= 0:
        cost[o_thslack:o_thslack + H] = PENALTY_MCT

    lb = np.zeros(n_var)
    ub = np.full(n_var, np.inf)
    if has_batt:
        ub[o_bch:o_bch + H] = b_pow
        ub[o_bdis:o_bdis + H] = b_pow
        ub[o_bsoc:o_bsoc + H] = b_cap
    if ev_len > 0:
        for t in range(ev_len):
            ub[o_evch + t] = ev_pow if ev_avail[t] > 0 else 0.0
        ub[o_evsoc:o_evsoc + ev_len] = ev_cap
        if o_evslack >= 0:
            ub[o_evslack] = ev_target
    if has_th:
        ub[o_hpe:o_hpe + H] = th_pow
        ub[o_thsoc:o_thsoc + H] = th_cap
        for t in range(H):
            ub[o_thslack + t] = th_dem[t]

    rows, cols, vals, rhs = [], [], [], []

    def put(r, c, v):
        rows.append(r)
        cols.append(c)
        vals.append(v)

    r = 0
    for t in range(H):
        put(r, n_imp + t, 1.0)
        put(r, n_exp + t, -1.0)
        if has_batt:
            put(r, o_bch + t, -1.0)
            put(r, o_bdis + t, eta_d)
        if 0 <= t < ev_len:
            put(r, o_evch + t, -1.0)
        if has_th:
            put(r, o_hpe + t, -1.0)
        rhs.append(float(load[t] - pv[t]))
        r += 1
    if has_batt:
        for t in range(H):
            put(r, o_bsoc + t, 1.0)
            put(r, o_bch + t, -eta_c)
            put(r, o_bdis + t, 1.0)
            if t > 0:
                put(r, o_bsoc + t - 1, -1.0)
                rhs.append(0.0)
            else:
                rhs.append(float(b_soc0))
            r += 1
    for t in range(ev_len):
        put(r, o_evsoc + t, 1.0)
        put(r, o_evch + t, -eta_e)
        if t > 0:
            put(r, o_evsoc + t - 1, -1.0)
            rhs.append(0.0)
        else:
            rhs.append(float(ev_soc0))
        r += 1
    if has_th:
        keep = 1.0 - th_loss
        for t in range(H):
            put(r, o_thsoc + t, 1.0)
            put(r, o_hpe + t, -1.0)
            put(r, o_thslack + t, -1.0)
            if t > 0:
                put(r, o_thsoc + t - 1, -keep)
                rhs.append(-float(th_dem[t]))
            else:
                rhs.append(keep * float(th_soc0) - float(th_dem[t]))
            r += 1
    a_eq = sparse.coo_matrix((vals, (rows, cols)), shape=(r, n_var)).tocsc()
    b_eq = np.asarray(rhs)

    a_ub = None
    b_ub = None
    if ev_len > 0 and ev_req:
        iu_rows = [0, 0]
        iu_cols = [o_evsoc + ev_len - 1, o_evslack]
        iu_vals = [-1.0, -1.0]
        a_ub = sparse.coo_matrix((iu_vals, (iu_rows, iu_cols)),
                                 shape=(1, n_var)).tocsc()
        b_ub = np.asarray([-float(ev_target)])

    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                  bounds=np.column_stack([lb, ub]), method="highs")
    if not res.success:
        zero = np.zeros(H)
        return LpSolution(False, 0.0, zero, zero, zero, zero, zero, zero,
                          0.0, zero)

    x = res.x
    imp = x[n_imp:n_imp + H]
    exp_ = x[n_exp:n_exp + H]
    bch = x[o_bch:o_bch + H] if has_batt else np.zeros(H)
    bdis = x[o_bdis:o_bdis + H] if has_batt else np.zeros(H)
    evch = np.zeros(H)
    if ev_len > 0:
        evch[:ev_len] = x[o_evch:o_evch + ev_len]
    hpe = x[o_hpe:o_hpe + H] if has_th else np.zeros(H)
    ev_slack = float(x[o_evslack]) if o_evslack >= 0 else 0.0
    th_slack = x[o_thslack:o_thslack + H] if has_th else np.zeros(H)
    econ = float(np.dot(imp, np.asarray(pb, dtype=float))
                 - np.dot(exp_, np.asarray(ps, dtype=float)))
    return LpSolution(True, econ, imp, exp_, bch, bdis, evch, hpe,
                      ev_slack, th_slack)
