"""Two-stage daily cycle: baseline solve, flexible solve, independent checks.

The flexible stage is warm-started with the baseline plan (always feasible
for it, by construction), so branch & bound only explores subtrees that can
actually beat the no-trade cost. When the solved savings fall below the
operator threshold, or vanish within numerical noise, the day falls back to
the baseline plan unchanged.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from flexsched.errors import InfeasibleDay
from flexsched.market_calendar import TradingWindow, window_for_consult
from flexsched.model_builder import (build_baseline, build_flexible,
                                     extract_schedule, schedule_cost)
from flexsched.plant import PlantConfig, Violation
from flexsched.prices import PriceSet
from flexsched.schedule import CarryState, DayResult, Schedule
from flexsched.solver.engine import (INFEASIBLE, SolveOptions, require_solution,
                                     solve_mip)

ZERO_SAVINGS_EUR = 1e-6  # below this, a "profitable" trade is solver noise


def _machine_init(config, carry):
    if carry is None:
        return None
    return carry.machine_init(config)


def _repair_runs(y, config, initial):
    """Greedy run-length repair of a rounded on/off matrix.

    Extends short ON runs rightwards and fills short OFF gaps; every fix
    strictly adds ON slots, so the scan terminates. Storage feasibility is
    left to the polish LP.
    """
    y = y.astype(np.int8).copy()
    n = y.shape[1]
    for k, mac in enumerate(config.machines):
        prev_on, obligation = initial[k]
        y[k, :obligation] = 1 if prev_on else 0
        for _ in range(4 * n):
            pos = 0
            bad = None
            for val, length in _run_lengths(y[k]):
                start = pos
                pos += length
                if pos == n:
                    continue
                if start == 0 and bool(val) == bool(prev_on):
                    continue
                need = mac.min_on_slots if val else mac.min_off_slots
                if length < need:
                    bad = (val, start, length, need)
                    break
            if bad is None:
                break
            val, start, length, need = bad
            if val:
                y[k, start : min(n, start + need)] = 1
            else:
                y[k, start : start + length] = 1
    return y


def _jit_pattern(config, initial):
    """Latest-possible single-machine schedule: run only when storage would
    otherwise starve, shut down when it would overflow. None if stuck."""
    if len(config.machines) != 1:
        return None
    mac = config.machines[0]
    n = config.horizon_slots
    dt = config.slot_hours
    dem = config.demand_tph * dt
    prod = mac.production_tph * dt
    lb = np.full(n, sum(s.floor_t for s in config.silos))
    if config.demand_cover_floor:
        lb = np.maximum(lb, dem)
    cap = sum(s.capacity_t for s in config.silos)
    level = sum(s.initial_t for s in config.silos)
    prev_on, obligation = initial[0]
    on = bool(prev_on)
    need = mac.min_on_slots if on else mac.min_off_slots
    streak = max(0, need - obligation) if obligation else need
    y = np.zeros(n, dtype=np.int8)
    for t in range(n):
        must_stay = streak < (mac.min_on_slots if on else mac.min_off_slots)
        if must_stay:
            choice = on
        else:
            # staying/going OFF commits to min_off slots once a shutdown happens
            horizon = mac.min_off_slots if on else 1
            drain = level - np.cumsum(dem[t : t + horizon])
            off_safe = bool((drain >= lb[t : t + horizon] - 1e-9).all())
            choice = not off_safe
        if choice and level + prod - dem[t] > cap + 1e-9:
            if must_stay and on:
                return None  # pinned ON but the store overflows
            choice = False
        level += (prod if choice else 0.0) - dem[t]
        if level < lb[t] - 1e-9 or level > cap + 1e-9:
            return None
        if choice == on:
            streak += 1
        else:
            on = choice
            streak = 1
        y[t] = 1 if choice else 0
    return y.reshape(1, n)


def _guided_pattern(config, initial, target_cum):
    """Single-machine pattern tracking a cumulative ON-hours target curve,
    legal w.r.t. run lengths and storage. None when the walk gets stuck."""
    if len(config.machines) != 1:
        return None
    mac = config.machines[0]
    n = config.horizon_slots
    dt = config.slot_hours
    dem = config.demand_tph * dt
    prod = mac.production_tph * dt
    lb = np.full(n, sum(s.floor_t for s in config.silos))
    if config.demand_cover_floor:
        lb = np.maximum(lb, dem)
    cap = sum(s.capacity_t for s in config.silos)
    level = sum(s.initial_t for s in config.silos)
    prev_on, obligation = initial[0]
    on = bool(prev_on)
    need = mac.min_on_slots if on else mac.min_off_slots
    streak = max(0, need - obligation) if obligation else need
    y = np.zeros(n, dtype=np.int8)
    placed = 0
    for t in range(n):
        if streak < (mac.min_on_slots if on else mac.min_off_slots):
            choice = on
        else:
            wanted = round(target_cum[t]) > placed
            horizon = mac.min_off_slots if on else 1
            drain = level - np.cumsum(dem[t : t + max(horizon, 1)])
            off_safe = bool((drain >= lb[t : t + max(horizon, 1)] - 1e-9).all())
            choice = bool(wanted) or not off_safe
        if choice and level + prod - dem[t] > cap + 1e-9:
            choice = False
            if on and streak < mac.min_on_slots:
                return None
        level += (prod if choice else 0.0) - dem[t]
        if level < lb[t] - 1e-9 or level > cap + 1e-9:
            return None
        if choice == on:
            streak += 1
        else:
            on = choice
            streak = 1
        placed += 1 if choice else 0
        y[t] = 1 if choice else 0
    return y.reshape(1, n)


def _pattern_candidates(config, initial, vmap, n_vars):
    """Model-aware rounding candidates handed to the MILP engine."""
    jit = _jit_pattern(config, initial)

    def full(y2d):
        arr = np.zeros(n_vars)
        arr[vmap.on] = y2d
        return arr

    def candidates(x):
        out = []
        yfrac = np.asarray(x)[vmap.on]
        out.append(full(_repair_runs(np.round(yfrac), config, initial)))
        if yfrac.shape[0] == 1:
            guided = _guided_pattern(config, initial, np.cumsum(yfrac[0]))
            if guided is not None:
                out.append(full(guided))
        if jit is not None:
            out.append(full(jit))
        return out

    return candidates


def _warm_from_schedule(model, vmap, sched):
    """Assemble a solver warm start from a feasible schedule."""
    warm = np.zeros(model.n_vars)
    warm[vmap.grid] = sched.grid_mw
    warm[vmap.surplus] = sched.surplus_mw
    warm[vmap.charge] = sched.charge_mw
    warm[vmap.discharge] = sched.discharge_mw
    warm[vmap.on] = sched.machine_on
    warm[vmap.store] = sched.storage_t
    if vmap.trade is not None:
        warm[vmap.trade] = sched.trade_mw
    if vmap.startup is not None:
        for k in range(vmap.startup.shape[0]):
            cols = vmap.startup[k]
            if cols[0] < 0:
                continue
            y = sched.machine_on[k].astype(np.float64)
            ups = np.maximum(0.0, np.diff(np.concatenate([[0.0], y])))
            warm[cols] = ups
    return warm


def run_day(config: PlantConfig, prices: PriceSet, carry_in: CarryState = None,
            date=None, opts: SolveOptions = None, calendar=None) -> DayResult:
    """Solve one daily cycle and account the flexibility savings."""
    opts = opts or SolveOptions()
    init = _machine_init(config, carry_in)
    if carry_in is not None:
        silos = tuple(
            dataclasses.replace(s, initial_t=float(carry_in.storage_t[i]))
            for i, s in enumerate(config.silos)
        )
        config = config.with_updates(silos=silos)

    init_eff = init if init is not None else [(False, 0) for _ in config.machines]
    model, vmap = build_baseline(config, prices, initial=init)
    bopts = dataclasses.replace(
        opts, pattern_heuristic=_pattern_candidates(config, init_eff, vmap, model.n_vars))
    sol = solve_mip(model, bopts)
    if sol.status == INFEASIBLE:
        raise InfeasibleDay(f"baseline infeasible on {date or 'day'} for {config.name}")
    require_solution(sol, "baseline")
    baseline = extract_schedule(sol, vmap, config, prices)
    bad = check_schedule(baseline, config, carry_in=carry_in)
    if bad:
        raise InfeasibleDay(f"baseline schedule failed verification: {bad[0]}")

    window = window_for_consult(config.h_sidc, calendar=calendar)
    fmodel, fvmap = build_flexible(config, prices, baseline, window, initial=init)
    warm = _warm_from_schedule(fmodel, fvmap, baseline)
    fopts = dataclasses.replace(
        opts, pattern_heuristic=_pattern_candidates(config, init_eff, fvmap, fmodel.n_vars))
    fsol = solve_mip(fmodel, fopts, warm_values=warm)
    if fsol.status == INFEASIBLE:
        raise InfeasibleDay(f"flexible stage infeasible on {date or 'day'}")
    require_solution(fsol, "flexible")
    flexible = extract_schedule(fsol, fvmap, config, prices, window=window)

    phi_star = baseline.total_cost_eur
    delta = phi_star - flexible.total_cost_eur
    accepted = delta >= config.min_revenue_eur
    if delta <= ZERO_SAVINGS_EUR or not accepted:
        # no profitable transactions (or below the operator threshold):
        # the plan stays exactly the baseline
        flexible = baseline.copy()
        delta = 0.0
        accepted = 0.0 >= config.min_revenue_eur
    else:
        bad = check_schedule(flexible, config, window=window,
                             pinned_grid=baseline.grid_mw, carry_in=carry_in)
        if bad:
            raise InfeasibleDay(f"flexible schedule failed verification: {bad[0]}")
    return DayResult(
        date=date,
        baseline=baseline,
        flexible=flexible,
        phi_star=phi_star,
        phi_dagger=phi_star - delta,
        delta_phi=delta,
        accepted=bool(accepted),
        window=window,
    )


def flexibility_revenue(day: DayResult) -> float:
    """Savings actually banked for the day (zero when not accepted)."""
    return day.delta_phi if day.accepted else 0.0


# ------------------------------------------------------------------ checker

def _run_lengths(states):
    """(value, length) pairs for consecutive runs in a 0/1 vector."""
    runs = []
    current = int(states[0])
    length = 0
    for s in states:
        if int(s) == current:
            length += 1
        else:
            runs.append((current, length))
            current = int(s)
            length = 1
    runs.append((current, length))
    return runs


def check_schedule(sched: Schedule, config: PlantConfig, window: TradingWindow = None,
                   pinned_grid=None, carry_in: CarryState = None, tol=1e-6):
    """Re-verify every constraint from the raw arrays, independent of the solver.

    Returns a list of violations (empty = clean). Mass/power balances are
    recomputed arithmetically; run lengths are scanned directly; battery
    limits use cumulative sums; window and pin rules are checked when a
    window is given.
    """
    out = []
    n = sched.n_slots
    dt = sched.slot_hours
    dem = config.demand_tph
    pv = config.pv_profile_mw

    def flag(field, message):
        out.append(Violation(field, message))

    if n != config.horizon_slots:
        flag("schedule", f"covers {n} slots, config says {config.horizon_slots}")
        return out

    y = sched.machine_on
    if not np.isin(y, (0, 1)).all():
        flag("machine_on", "states must be 0/1")

    # power balance residual per slot
    draw = np.zeros(n)
    for k, mac in enumerate(config.machines):
        draw += mac.power_mw * y[k]
    resid = (sched.grid_mw + sched.trade_mw + sched.discharge_mw + pv
             - sched.surplus_mw - sched.charge_mw - draw)
    worst = int(np.argmax(np.abs(resid)))
    if abs(resid[worst]) > tol:
        flag("power_balance", f"residual {resid[worst]:.3e} MW at slot {worst + 1}")

    # mass balance: total storage change = production - demand
    total_store = sched.storage_t.sum(axis=0)
    prod = np.zeros(n)
    for k, mac in enumerate(config.machines):
        prod += mac.production_tph * dt * y[k]
    prev = np.concatenate([[sum(s.initial_t for s in config.silos)
                            if carry_in is None else float(carry_in.storage_t.sum())],
                           total_store[:-1]])
    resid = total_store - prev - prod + dem * dt
    worst = int(np.argmax(np.abs(resid)))
    if abs(resid[worst]) > tol:
        flag("mass_balance", f"residual {resid[worst]:.3e} t at slot {worst + 1}")

    # box constraints
    for i, silo in enumerate(config.silos):
        lo = silo.floor_t
        if (sched.storage_t[i] < lo - tol).any() or (sched.storage_t[i] > silo.capacity_t + tol).any():
            flag(f"storage_t[{i}]", "level leaves [floor, capacity]")
    if config.demand_cover_floor:
        if (total_store < dem * dt - tol).any():
            flag("storage_t", "level drops below one hour of demand cover")
    if (sched.grid_mw < -tol).any() or (sched.grid_mw > config.grid_limit_mw + tol).any():
        flag("grid_mw", "grid purchase outside [0, grid limit]")
    for name, arr, cap in (
        ("charge_mw", sched.charge_mw, config.battery.max_charge_mw if not config.battery.is_null else 0.0),
        ("discharge_mw", sched.discharge_mw, config.battery.max_discharge_mw if not config.battery.is_null else 0.0),
    ):
        if (arr < -tol).any() or (arr > cap + tol).any():
            flag(name, f"outside [0, {cap}]")
    if (sched.surplus_mw < -tol).any():
        flag("surplus_mw", "negative surplus")

    # battery cumulative energy inside the usable range
    if not config.battery.is_null:
        bat = config.battery
        cum = np.cumsum((sched.charge_mw - sched.discharge_mw) * dt)
        hi = bat.capacity_mwh * bat.depth_of_discharge - bat.soc0_mwh
        lo = bat.capacity_mwh * (1.0 - bat.depth_of_discharge) - bat.soc0_mwh
        if (cum > hi + tol).any() or (cum < lo - tol).any():
            flag("battery", "cumulative energy leaves the usable charge range")

    # run-length scans; runs touching the horizon end may be cut short
    init = carry_in.machine_init(config) if carry_in is not None else [(False, 0)] * len(config.machines)
    for k, mac in enumerate(config.machines):
        prev_on, obligation = init[k]
        runs = _run_lengths(y[k])
        if obligation:
            want = 1 if prev_on else 0
            head = y[k][:obligation]
            if not np.all(head == want):
                flag(f"machine_on[{k}]", f"carried {'run' if prev_on else 'downtime'} "
                                         f"obligation of {obligation} slots broken")
        pos = 0
        for ri, (val, length) in enumerate(runs):
            start, end = pos, pos + length
            pos = end
            touches_end = end == n
            continues_carry = start == 0 and bool(val) == bool(prev_on)
            need = mac.min_on_slots if val else mac.min_off_slots
            if touches_end or continues_carry:
                continue
            if length < need:
                kind = "MinOnViolation" if val else "MinOffViolation"
                flag(f"machine_on[{k}]", f"{kind}: run of {length} at slot {start + 1} "
                                         f"(minimum {need})")

    # trading rules
    if window is None:
        if np.abs(sched.trade_mw).max(initial=0.0) > tol:
            flag("trade_mw", "nonzero trade without a trading window")
    else:
        t1, t2 = window.tau1, window.tau2
        outside = np.abs(np.concatenate([sched.trade_mw[: t1 - 1], sched.trade_mw[t2:]]))
        if outside.max(initial=0.0) > tol:
            flag("trade_mw", "WindowViolation: trade outside the open window")
        inside = np.abs(sched.trade_mw[t1 - 1 : t2])
        if inside.max(initial=0.0) > config.sidc_trade_limit_mw + tol:
            flag("trade_mw", "trade magnitude beyond the configured limit")
        if pinned_grid is not None:
            diff = np.abs(sched.grid_mw[:t2] - np.asarray(pinned_grid)[:t2])
            worst = int(np.argmax(diff))
            if diff[worst] > tol:
                flag("grid_mw", f"pin rule broken at slot {worst + 1}: "
                                f"differs from the committed plan by {diff[worst]:.3e}")
    return out
