"""Builds the baseline and flexible MILPs from a plant config and prices.

Baseline model, per slot: storage mass balance with demand outflow, power
balance, machine min-on/min-off transition rows (with truncated sums at the
horizon tail and a carried previous state at slot 1), cumulative battery
energy bounds, and box constraints. Objective: day-ahead energy cost plus
battery cycling and storage holding costs.

The flexible model reuses the same rows, adds a sign-free intraday trade
variable to the power balance, prices it inside the trading window, caps its
magnitude by the trade limit, and pins grid purchases to the baseline
schedule through the window's closing slot (they are free to re-adjust
afterwards, day-ahead only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from flexsched.errors import InfeasibleByConstruction, NumericalBreakdown, SolutionIncomplete
from flexsched.linmodel import BINARY, EQ, GE, INF, LE, LinearModel
from flexsched.market_calendar import TradingWindow
from flexsched.plant import PlantConfig, demand_prescan
from flexsched.prices import PriceSet
from flexsched.schedule import Schedule

INT_TOL = 1e-7
COST_MATCH_RTOL = 1e-6


@dataclass
class VariableMap:
    """Column indices of every model variable, one handle per (symbol, slot)."""

    grid: np.ndarray  # (N,)
    surplus: np.ndarray  # (N,)
    charge: np.ndarray  # (N,)
    discharge: np.ndarray  # (N,)
    on: np.ndarray  # (K, N)
    store: np.ndarray  # (S, N)
    trade: np.ndarray = None  # (N,), flexible model only
    prod_split: np.ndarray = None  # (S, N) when S > 1
    dem_split: np.ndarray = None
    startup: np.ndarray = None  # (K, N) auxiliary startup indicators

    @property
    def n_slots(self):
        return len(self.grid)


def default_machine_init(config):
    """Standalone-solve convention: machines OFF with no residual obligation."""
    return [(False, 0) for _ in config.machines]


def expected_row_count(config: PlantConfig, flexible=False):
    """Documented row-count formula; the builders produce exactly this many.

    power balance: N; mass balance: N (one silo) or S*N + 2N coupling rows;
    optional demand-cover floor: N rows only with multiple silos (folded
    into storage bounds otherwise); per machine: N-1 min-on rows when
    min_on >= 2 and N-1 min-off rows when min_off >= 2 (transition rows
    for slots 1..N-1, the slot-N row being vacuous); battery: 2N cumulative
    energy rows when present. The flexible model adds no rows: window,
    magnitude cap, and grid pins are all variable bounds.

    Machines with a run-length constraint (min_on or min_off >= 2) also get
    continuous startup-indicator columns and the standard valid tightening
    rows (N indicator-definition rows, N startup-window rows when
    min_on >= 2, N - min_off shutdown-window rows when min_off >= 2).
    Single-machine plants additionally get 2N cumulative running-hours
    rounding rows. Both families leave the integer feasible set untouched
    but close most of the relaxation gap, keeping branch & bound trees
    small.
    """
    n, s = config.horizon_slots, len(config.silos)
    rows = n  # power balance
    rows += n if s == 1 else s * n + 2 * n
    if config.demand_cover_floor and s > 1:
        rows += n
    if len(config.machines) == 1:
        rows += 2 * n
    for mac in config.machines:
        if mac.min_on_slots >= 2:
            rows += n - 1
        if mac.min_off_slots >= 2:
            rows += n - 1
        if mac.min_on_slots >= 2 or mac.min_off_slots >= 2:
            rows += n  # startup-indicator definition
            if mac.min_on_slots >= 2:
                rows += n
            if mac.min_off_slots >= 2:
                rows += max(0, n - mac.min_off_slots)
    if not config.battery.is_null:
        rows += 2 * n
    return rows


def _check_inputs(config, prices, initial):
    n = config.horizon_slots
    if prices.n_slots != n:
        raise ValueError(f"price series has {prices.n_slots} slots, model needs {n}")
    if not np.all(np.isfinite(prices.day_ahead)):
        raise ValueError("day-ahead prices must be finite over the whole horizon")
    if len(initial) != len(config.machines):
        raise ValueError("one initial state per machine required")
    storage0 = [s.initial_t for s in config.silos]
    scan = demand_prescan(config, storage0)
    if scan is not None:
        raise InfeasibleByConstruction(str(scan))


def _build_core(config: PlantConfig, prices: PriceSet, initial, window=None,
                pinned_grid=None, name="baseline"):
    n = config.horizon_slots
    dt = config.slot_hours
    k_n = len(config.machines)
    s_n = len(config.silos)
    pi_b = prices.day_ahead
    bat = config.battery
    model = LinearModel(name=f"{name}_{config.name}")

    grid = np.empty(n, dtype=np.int64)
    surplus = np.empty(n, dtype=np.int64)
    charge = np.empty(n, dtype=np.int64)
    discharge = np.empty(n, dtype=np.int64)
    trade = np.empty(n, dtype=np.int64) if window is not None else None
    on = np.empty((k_n, n), dtype=np.int64)
    store = np.empty((s_n, n), dtype=np.int64)

    chg_cap = 0.0 if bat.is_null else bat.max_charge_mw
    dis_cap = 0.0 if bat.is_null else bat.max_discharge_mw
    lc1 = config.sidc_trade_limit_mw
    for t in range(n):
        g_lo, g_up = 0.0, config.grid_limit_mw
        if pinned_grid is not None and (t + 1) <= window.tau2:
            g_lo = g_up = float(pinned_grid[t])
        grid[t] = model.add_var(f"grid_{t+1}", g_lo, g_up, obj=pi_b[t] * dt)
        surplus[t] = model.add_var(f"sur_{t+1}", 0.0, INF)
        charge[t] = model.add_var(f"chg_{t+1}", 0.0, chg_cap, obj=bat.cycle_cost * dt)
        discharge[t] = model.add_var(f"dis_{t+1}", 0.0, dis_cap, obj=bat.cycle_cost * dt)
        if window is not None:
            in_window = window.tau1 <= (t + 1) <= window.tau2
            t_bound = lc1 if in_window else 0.0
            t_obj = prices.sidc[t] * dt if in_window else 0.0
            trade[t] = model.add_var(f"trade_{t+1}", -t_bound, t_bound, obj=t_obj)

    for k, mac in enumerate(config.machines):
        prev_on, obligation = initial[k]
        for t in range(n):
            lo, up = 0.0, 1.0
            if t < obligation:  # carried mid-run obligation from the previous day
                lo = up = 1.0 if prev_on else 0.0
            on[k, t] = model.add_var(f"on{k}_{t+1}", lo, up, kind=BINARY)

    for i, silo in enumerate(config.silos):
        for t in range(n):
            lo = silo.floor_t
            if config.demand_cover_floor and s_n == 1:
                lo = max(lo, config.demand_tph[t] * dt)
            store[i, t] = model.add_var(f"inv{i}_{t+1}", lo, silo.capacity_t,
                                        obj=silo.storage_cost * dt)

    prod_split = dem_split = None
    if s_n > 1:
        prod_split = np.empty((s_n, n), dtype=np.int64)
        dem_split = np.empty((s_n, n), dtype=np.int64)
        for i in range(s_n):
            for t in range(n):
                prod_split[i, t] = model.add_var(f"psplit{i}_{t+1}", 0.0, INF)
                dem_split[i, t] = model.add_var(f"dsplit{i}_{t+1}", 0.0, INF)

    # power balance: grid (+ trade) + discharge + pv = surplus + charge + machine draw
    for t in range(n):
        terms = [(int(grid[t]), 1.0), (int(discharge[t]), 1.0),
                 (int(surplus[t]), -1.0), (int(charge[t]), -1.0)]
        if trade is not None:
            terms.append((int(trade[t]), 1.0))
        terms += [(int(on[k, t]), -config.machines[k].power_mw) for k in range(k_n)]
        model.add_row(terms, EQ, -config.pv_profile_mw[t], name=f"bal_{t+1}")

    # mass balance with demand outflow
    if s_n == 1:
        silo = config.silos[0]
        for t in range(n):
            terms = [(int(store[0, t]), 1.0)]
            rhs = -config.demand_tph[t] * dt
            if t == 0:
                rhs += silo.initial_t
            else:
                terms.append((int(store[0, t - 1]), -1.0))
            terms += [(int(on[k, t]), -config.machines[k].production_tph * dt)
                      for k in range(k_n)]
            model.add_row(terms, EQ, rhs, name=f"mass0_{t+1}")
    else:
        for i, silo in enumerate(config.silos):
            for t in range(n):
                terms = [(int(store[i, t]), 1.0), (int(prod_split[i, t]), -1.0),
                         (int(dem_split[i, t]), 1.0)]
                rhs = 0.0
                if t == 0:
                    rhs += silo.initial_t
                else:
                    terms.append((int(store[i, t - 1]), -1.0))
                model.add_row(terms, EQ, rhs, name=f"mass{i}_{t+1}")
        for t in range(n):
            terms = [(int(prod_split[i, t]), 1.0) for i in range(s_n)]
            terms += [(int(on[k, t]), -config.machines[k].production_tph * dt)
                      for k in range(k_n)]
            model.add_row(terms, EQ, 0.0, name=f"mprod_{t+1}")
            model.add_row([(int(dem_split[i, t]), 1.0) for i in range(s_n)],
                          EQ, config.demand_tph[t] * dt, name=f"mdem_{t+1}")
        if config.demand_cover_floor:
            for t in range(n):
                model.add_row([(int(store[i, t]), 1.0) for i in range(s_n)],
                              GE, config.demand_tph[t] * dt, name=f"cover_{t+1}")

    # machine run-length rows: a startup at slot tau must hold for
    # min(min_on, N - tau + 1) slots; symmetric for shutdowns
    for k, mac in enumerate(config.machines):
        prev_on, _ = initial[k]
        y_prev = 1.0 if prev_on else 0.0
        if mac.min_on_slots >= 2:
            for tau in range(1, n):  # 1-based startup slot, slot n row is vacuous
                span = min(mac.min_on_slots, n - tau + 1)
                terms = {int(on[k, tau - 1 + j]): 1.0 for j in range(span)}
                terms[int(on[k, tau - 1])] = terms.get(int(on[k, tau - 1]), 0.0) - span
                rhs = 0.0
                if tau == 1:
                    rhs = -span * y_prev
                else:
                    terms[int(on[k, tau - 2])] = terms.get(int(on[k, tau - 2]), 0.0) + span
                model.add_row(terms.items(), GE, rhs, name=f"minon{k}_{tau}")
        if mac.min_off_slots >= 2:
            for tau in range(1, n):
                span = min(mac.min_off_slots, n - tau + 1)
                terms = {int(on[k, tau - 1 + j]): -1.0 for j in range(span)}
                terms[int(on[k, tau - 1])] = terms.get(int(on[k, tau - 1]), 0.0) + span
                rhs = -span
                if tau == 1:
                    rhs += span * y_prev
                else:
                    terms[int(on[k, tau - 2])] = terms.get(int(on[k, tau - 2]), 0.0) - span
                model.add_row(terms.items(), GE, rhs, name=f"minoff{k}_{tau}")

    # single-machine integer-hours tightening: by slot t the machine must
    # have run at least ceil((demand so far + storage floor - initial)/rate)
    # slots and at most floor((demand so far + headroom)/rate); both follow
    # from the mass balance by integer rounding
    if k_n == 1:
        rate = config.machines[0].production_tph * dt
        init_tot = sum(s.initial_t for s in config.silos)
        cap_tot = sum(s.capacity_t for s in config.silos)
        cum_d = np.cumsum(config.demand_tph * dt)
        for t in range(n):
            floor_tot = sum(
                max(s.floor_t, config.demand_tph[t] * dt)
                if (config.demand_cover_floor and s_n == 1) else s.floor_t
                for s in config.silos
            )
            k_min = math.ceil((cum_d[t] + floor_tot - init_tot) / rate - 1e-9)
            k_max = math.floor((cum_d[t] + cap_tot - init_tot) / rate + 1e-9)
            terms = [(int(on[0, s]), 1.0) for s in range(t + 1)]
            if k_min > 0:
                model.add_row(terms, GE, float(k_min), name=f"cumlo_{t+1}")
            else:
                model.add_row(terms, GE, 0.0, name=f"cumlo_{t+1}")
            model.add_row(list(terms), LE, float(k_max), name=f"cumhi_{t+1}")

    # startup-indicator tightening: u_t >= y_t - y_(t-1); at most one startup
    # inside any min-on window, none within min_off slots of an ON slot
    startup = None
    if any(m.min_on_slots >= 2 or m.min_off_slots >= 2 for m in config.machines):
        startup = np.full((k_n, n), -1, dtype=np.int64)
        for k, mac in enumerate(config.machines):
            if mac.min_on_slots < 2 and mac.min_off_slots < 2:
                continue
            prev_on, _ = initial[k]
            for t in range(n):
                startup[k, t] = model.add_var(f"up{k}_{t+1}", 0.0, 1.0)
            for t in range(n):
                terms = [(int(startup[k, t]), 1.0), (int(on[k, t]), -1.0)]
                rhs = 0.0
                if t == 0:
                    rhs = -(1.0 if prev_on else 0.0)
                else:
                    terms.append((int(on[k, t - 1]), 1.0))
                model.add_row(terms, GE, rhs, name=f"updef{k}_{t+1}")
            if mac.min_on_slots >= 2:
                for t in range(n):
                    first = max(0, t - mac.min_on_slots + 1)
                    terms = [(int(startup[k, i]), 1.0) for i in range(first, t + 1)]
                    terms.append((int(on[k, t]), -1.0))
                    model.add_row(terms, LE, 0.0, name=f"upwin{k}_{t+1}")
            if mac.min_off_slots >= 2:
                for t in range(mac.min_off_slots, n):
                    terms = [(int(startup[k, i]), 1.0)
                             for i in range(t - mac.min_off_slots + 1, t + 1)]
                    terms.append((int(on[k, t - mac.min_off_slots]), 1.0))
                    model.add_row(terms, LE, 1.0, name=f"offwin{k}_{t+1}")

    # battery cumulative energy kept inside the usable charge range
    if not bat.is_null:
        hi = bat.capacity_mwh * bat.depth_of_discharge - bat.soc0_mwh
        lo = bat.capacity_mwh * (1.0 - bat.depth_of_discharge) - bat.soc0_mwh
        for j in range(1, n + 1):
            terms = [(int(charge[t]), dt) for t in range(j)]
            terms += [(int(discharge[t]), -dt) for t in range(j)]
            model.add_row(terms, LE, hi, name=f"socmax_{j}")
            model.add_row(list(terms), GE, lo, name=f"socmin_{j}")

    vmap = VariableMap(grid=grid, surplus=surplus, charge=charge, discharge=discharge,
                       on=on, store=store, trade=trade,
                       prod_split=prod_split, dem_split=dem_split, startup=startup)
    return model, vmap


def build_baseline(config: PlantConfig, prices: PriceSet, initial=None):
    """Cost-minimal schedule against day-ahead prices (no intraday trading)."""
    initial = initial or default_machine_init(config)
    _check_inputs(config, prices, initial)
    return _build_core(config, prices, initial, name="baseline")


def build_flexible(config: PlantConfig, prices: PriceSet, baseline: Schedule,
                   window: TradingWindow, initial=None):
    """Perturbation of the baseline that may trade inside the window.

    Grid purchases are pinned to the baseline through tau2 and free to
    re-adjust afterwards; the trade variable is sign-free inside
    [tau1, tau2], capped by the configured trade limit, and zero outside.
    """
    initial = initial or default_machine_init(config)
    _check_inputs(config, prices, initial)
    if window.tau2 > config.horizon_slots:
        raise ValueError(f"window closes at {window.tau2}, beyond the horizon")
    prices.require_window(window.tau1, window.tau2)
    if baseline.n_slots != config.horizon_slots:
        raise ValueError("baseline schedule does not cover the horizon")
    return _build_core(config, prices, initial, window=window,
                       pinned_grid=baseline.grid_mw, name="flexible")


def extract_schedule(solution, vmap: VariableMap, config: PlantConfig,
                     prices: PriceSet, window=None) -> Schedule:
    """Turn a solver solution into a Schedule; recompute the cost independently."""
    values = getattr(solution, "values", solution)
    if values is None:
        raise SolutionIncomplete("solver returned no values")
    values = np.asarray(values, dtype=np.float64)
    needed = [vmap.grid, vmap.surplus, vmap.charge, vmap.discharge, vmap.on, vmap.store]
    if vmap.trade is not None:
        needed.append(vmap.trade)
    top = max(int(arr.max()) for arr in needed)
    if len(values) <= top or not np.all(np.isfinite(values)):
        raise SolutionIncomplete("solution vector does not cover every variable handle")

    on_raw = values[vmap.on]
    if np.abs(on_raw - np.round(on_raw)).max(initial=0.0) > INT_TOL:
        raise NumericalBreakdown("machine state variables are not integral")
    n = vmap.n_slots
    dt = config.slot_hours
    sched = Schedule(
        grid_mw=values[vmap.grid] + 0.0,
        trade_mw=values[vmap.trade] + 0.0 if vmap.trade is not None else np.zeros(n),
        charge_mw=values[vmap.charge] + 0.0,
        discharge_mw=values[vmap.discharge] + 0.0,
        surplus_mw=values[vmap.surplus] + 0.0,
        machine_on=np.round(on_raw).astype(np.int8),
        storage_t=values[vmap.store] + 0.0,
        total_cost_eur=0.0,
        slot_hours=dt,
    )
    cost = schedule_cost(sched, config, prices, window)
    sched.total_cost_eur = cost
    solver_obj = getattr(solution, "objective", None)
    if solver_obj is not None:
        if abs(cost - solver_obj) > COST_MATCH_RTOL * max(1.0, abs(solver_obj)):
            raise NumericalBreakdown(
                f"recomputed cost {cost} disagrees with solver objective {solver_obj}"
            )
    return sched


def schedule_cost(sched: Schedule, config: PlantConfig, prices: PriceSet, window=None):
    """Objective evaluated from raw arrays (independent of any solver)."""
    dt = sched.slot_hours
    bat = config.battery
    cost = float(np.dot(sched.grid_mw, prices.day_ahead) * dt)
    cost += float((sched.charge_mw + sched.discharge_mw).sum() * bat.cycle_cost * dt)
    for i, silo in enumerate(config.silos):
        cost += float(sched.storage_t[i].sum() * silo.storage_cost * dt)
    if window is not None:
        sl = slice(window.tau1 - 1, window.tau2)
        cost += float(np.dot(sched.trade_mw[sl], prices.sidc[sl]) * dt)
    return cost
