"""Exhaustive enumeration oracle for tiny single-machine instances.

Walks every on/off pattern, checks run lengths and the storage trajectory
directly, and prices the continuous decisions in closed form. Completely
independent of the LP machinery, so it can vouch for the MILP engine on
toy instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from flexsched.errors import TooLarge

MAX_PATTERNS = 4096


@dataclass
class OracleResult:
    cost: float
    pattern: tuple  # optimal on/off per slot
    grid_mw: np.ndarray  # closed-form grid purchases for the pattern


def _runs_ok(pattern, min_on, min_off, prev_on, obligation):
    n = len(pattern)
    for t in range(min(obligation, n)):
        if pattern[t] != (1 if prev_on else 0):
            return False
    runs = []
    cur, length = pattern[0], 1
    for s in pattern[1:]:
        if s == cur:
            length += 1
        else:
            runs.append((cur, length))
            cur, length = s, 1
    runs.append((cur, length))
    pos = 0
    for val, length in runs:
        start = pos
        pos += length
        if pos == n:  # truncated at the horizon tail
            continue
        if start == 0 and bool(val) == bool(prev_on):
            continue  # continuation of the carried state
        need = min_on if val else min_off
        if length < need:
            return False
    return True


def oracle_enumerate(config, prices, window=None, baseline_grid=None, initial=None):
    """Best (cost, pattern) over all feasible on/off patterns, or None.

    Supports one machine, one silo, no battery, horizons up to 12 slots.
    With `window` and `baseline_grid` it prices the flexible stage: grid
    purchases pinned through the window close, per-slot trades chosen
    greedily inside the window, free day-ahead re-adjustment afterwards.
    """
    if len(config.machines) != 1 or len(config.silos) != 1:
        raise TooLarge("oracle handles exactly one machine and one silo")
    if not config.battery.is_null:
        raise TooLarge("oracle does not model batteries")
    n = config.horizon_slots
    if 2 ** n > MAX_PATTERNS:
        raise TooLarge(f"2^{n} patterns exceed the {MAX_PATTERNS} cap")
    if window is not None and baseline_grid is None:
        raise ValueError("flexible pricing needs the baseline grid schedule")

    mac = config.machines[0]
    silo = config.silos[0]
    dt = config.slot_hours
    dem = config.demand_tph * dt
    pv = config.pv_profile_mw
    pi_b = prices.day_ahead
    pi_m = prices.sidc
    lc1 = config.sidc_trade_limit_mw
    pbmax = config.grid_limit_mw
    prev_on, obligation = (initial or [(False, 0)])[0]

    store_lo = np.full(n, silo.floor_t)
    if config.demand_cover_floor:
        store_lo = np.maximum(store_lo, dem)

    best = None
    for bits in range(2 ** n):
        pattern = tuple((bits >> t) & 1 for t in range(n))
        if not _runs_ok(pattern, mac.min_on_slots, mac.min_off_slots, prev_on, obligation):
            continue
        y = np.array(pattern, dtype=np.float64)
        store = silo.initial_t + np.cumsum(mac.production_tph * dt * y - dem)
        if (store < store_lo - 1e-9).any() or (store > silo.capacity_t + 1e-9).any():
            continue
        load = mac.power_mw * y
        cost = float(store.sum() * silo.storage_cost * dt)
        grid = np.zeros(n)
        feasible = True
        for t in range(n):
            need = load[t] - pv[t]  # net import required
            if window is not None and (t + 1) <= window.tau2:
                grid[t] = baseline_grid[t]
                g = need - grid[t]
                if window.tau1 <= (t + 1) <= window.tau2:
                    if g > lc1 + 1e-9:
                        feasible = False
                        break
                    trade = lc1 if pi_m[t] < 0 else max(g, -lc1)
                    cost += pi_m[t] * trade * dt
                elif g > 1e-9:  # pinned purchases cannot cover the machine
                    feasible = False
                    break
            else:
                if need > pbmax + 1e-9:
                    feasible = False
                    break
                grid[t] = pbmax if pi_b[t] < 0 else min(max(need, 0.0), pbmax)
            cost += pi_b[t] * grid[t] * dt
        if not feasible:
            continue
        if best is None or cost < best.cost - 1e-12:
            best = OracleResult(cost=cost, pattern=pattern, grid_mw=grid)
    return best
