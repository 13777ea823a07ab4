"""Model construction: row counts, bounds, pins, monotonicity."""

import dataclasses

import numpy as np
import pytest

from flexsched.errors import InfeasibleByConstruction
from flexsched.linmodel import BINARY
from flexsched.market_calendar import TradingWindow
from flexsched.model_builder import (build_baseline, build_flexible,
                                     expected_row_count, extract_schedule,
                                     schedule_cost)
from flexsched.plant import Battery, Machine, Silo, builtin_config, make_config
from flexsched.prices import synth_prices
from flexsched.solver.engine import SolveOptions, solve_mip
from flexsched.solver.oracle import oracle_enumerate

from conftest import random_tiny_instance, schedule_from_oracle, toy_config, toy_prices


def _prices_for(config, seed=3, mean=80.0, std=30.0):
    days = (config.horizon_slots + 23) // 24
    store = synth_prices("match-moments", {"mean": mean, "std": std}, days=days, seed=seed)
    return store.window(store.first_date, days)


@pytest.mark.parametrize("name", ["cement", "steel"])
def test_row_count_formula_builtin(name):
    config = builtin_config(name)
    model, _ = build_baseline(config, _prices_for(config))
    assert model.n_rows == expected_row_count(config)


def test_cement_model_size_and_cost_terms():
    config = builtin_config("cement")
    model, vmap = build_baseline(config, _prices_for(config))
    assert model.n_binaries == 192
    assert model.n_vars - model.n_binaries >= 192 * 6
    # battery cycling and storage holding terms are present, zero-weighted here
    assert model.obj[int(vmap.charge[0])] == 0.0
    assert model.obj[int(vmap.store[0, 0])] == 0.0


def test_row_count_formula_battery_and_cover():
    config = toy_config(
        horizon_slots=8,
        battery=Battery(capacity_mwh=4.0, depth_of_discharge=0.8, soc0_mwh=2.0,
                        max_charge_mw=1.0, max_discharge_mw=1.0, cycle_cost=0.5),
        demand_cover_floor=True,
    )
    model, _ = build_baseline(config, toy_prices([10.0] * 8))
    assert model.n_rows == expected_row_count(config)


def test_battery_arbitrage_solves_and_checks():
    scipy_opt = pytest.importorskip("scipy.optimize")
    from flexsched.scheduler import check_schedule

    config = make_config(
        "bat",
        machines=[Machine(2.0, 10.0, 2, 1)],
        silos=[Silo(capacity_t=80.0, floor_t=0.0, initial_t=0.0)],
        battery=Battery(capacity_mwh=6.0, depth_of_discharge=0.8, soc0_mwh=3.0,
                        max_charge_mw=2.0, max_discharge_mw=2.0, cycle_cost=0.1),
        demand_tph=5.0,
        horizon_slots=8,
    )
    prices = toy_prices([10.0, 60.0, 10.0, 60.0, 10.0, 60.0, 10.0, 60.0])
    model, vmap = build_baseline(config, prices)
    sol = solve_mip(model)
    assert sol.status == "Optimal"
    sched = extract_schedule(sol, vmap, config, prices)
    assert check_schedule(sched, config) == []
    # the battery discharges into expensive hours and recharges cheap
    assert sched.discharge_mw[1] > 0 and sched.charge_mw[2] > 0
    A, rels, b, c, lo, up, isbin = model.dense()
    lb = np.where([r in (">=", "=") for r in rels], b, -np.inf)
    ub = np.where([r in ("<=", "=") for r in rels], b, np.inf)
    ref = scipy_opt.milp(c, constraints=scipy_opt.LinearConstraint(A, lb, ub),
                         bounds=scipy_opt.Bounds(lo, up), integrality=isbin.astype(int))
    assert ref.status == 0
    assert sol.objective == pytest.approx(ref.fun, abs=1e-6)


def test_row_count_formula_two_silos():
    config = make_config(
        "twin",
        machines=[Machine(2.0, 10.0, 2, 2)],
        silos=[Silo(60.0, 0.0, 10.0), Silo(40.0, 5.0, 8.0)],
        battery=Battery(),
        demand_tph=4.0,
        horizon_slots=6,
    )
    model, vmap = build_baseline(config, toy_prices([10.0] * 6))
    assert model.n_rows == expected_row_count(config)
    assert vmap.prod_split is not None and vmap.dem_split is not None
    sol = solve_mip(model)
    assert sol.status == "Optimal"


def test_flexible_adds_no_rows():
    config = builtin_config("cement")
    prices = _prices_for(config)
    model, vmap = build_baseline(config, prices)
    base = extract_schedule(solve_mip(model), vmap, config, prices)
    window = TradingWindow(tau1=24, tau2=48, h_sidc=22)
    fmodel, _ = build_flexible(config, prices, base, window)
    assert fmodel.n_rows == model.n_rows == expected_row_count(config, flexible=True)


def test_zero_battery_pins_flows():
    config = toy_config()
    model, vmap = build_baseline(config, toy_prices([1.0, 2.0, 3.0, 4.0]))
    for t in range(4):
        j = int(vmap.charge[t])
        assert model.lo[j] == model.up[j] == 0.0
        j = int(vmap.discharge[t])
        assert model.lo[j] == model.up[j] == 0.0


def test_variable_map_handles_are_unique():
    config = builtin_config("cement")
    model, vmap = build_baseline(config, _prices_for(config))
    arrays = [vmap.grid, vmap.surplus, vmap.charge, vmap.discharge,
              vmap.on.ravel(), vmap.store.ravel()]
    if vmap.startup is not None:
        arrays.append(vmap.startup[vmap.startup >= 0].ravel())
    idx = np.concatenate(arrays)
    assert len(idx) == len(set(idx.tolist()))


def test_window_bounds_and_pins():
    config = builtin_config("cement")
    prices = _prices_for(config)
    model, vmap = build_baseline(config, prices)
    base = extract_schedule(solve_mip(model), vmap, config, prices)
    window = TradingWindow(tau1=24, tau2=48, h_sidc=22)
    fmodel, fvmap = build_flexible(config, prices, base, window)
    lc1 = config.sidc_trade_limit_mw
    for t in range(config.horizon_slots):
        j = int(fvmap.trade[t])
        if window.tau1 <= t + 1 <= window.tau2:
            assert (fmodel.lo[j], fmodel.up[j]) == (-lc1, lc1)
        else:
            assert fmodel.lo[j] == fmodel.up[j] == 0.0
        g = int(fvmap.grid[t])
        if t + 1 <= window.tau2:
            assert fmodel.lo[g] == fmodel.up[g] == pytest.approx(base.grid_mw[t])
        else:
            assert (fmodel.lo[g], fmodel.up[g]) == (0.0, config.grid_limit_mw)


def test_prescan_failure_raises():
    config = toy_config()
    bad = config.with_updates(demand_tph=np.full(4, 11.0))
    with pytest.raises(InfeasibleByConstruction):
        build_baseline(bad, toy_prices([1.0] * 4))


def test_extract_recomputes_cost_independently():
    config = toy_config()
    prices = toy_prices([1.0, 2.0, 3.0, 4.0])
    model, vmap = build_baseline(config, prices)
    sol = solve_mip(model)
    sched = extract_schedule(sol, vmap, config, prices)
    assert sched.total_cost_eur == pytest.approx(sol.objective, rel=1e-6)
    assert schedule_cost(sched, config, prices) == pytest.approx(sol.objective, rel=1e-6)


def test_flexible_monotone_in_window_open_and_trade_cap(rng):
    # earlier opening or a larger trade cap relaxes the model
    checked = 0
    while checked < 8:
        config, prices, window = random_tiny_instance(rng, flexible=True)
        if window.tau1 < 3:
            continue
        base = oracle_enumerate(config, prices)
        if base is None:
            continue
        baseline = schedule_from_oracle(base, config)
        sidc = prices.sidc.copy()
        sidc[window.tau1 - 2] = 42.0  # price the newly opened slot
        prices = dataclasses.replace(prices, sidc=sidc)

        def phi(cfg, win):
            model, _ = build_flexible(cfg, prices, baseline, win)
            sol = solve_mip(model)
            assert sol.status == "Optimal"
            return sol.objective

        tight = phi(config, window)
        wider = TradingWindow(window.tau1 - 1, window.tau2, window.tau1 - 2)
        assert phi(config, wider) <= tight + 1e-6
        richer = config.with_updates(sidc_trade_limit_mw=config.sidc_trade_limit_mw * 2)
        assert phi(richer, window) <= tight + 1e-6
        checked += 1


def test_machine_obligations_fix_first_slots():
    config = toy_config(machines=[Machine(1.0, 10.0, 3, 2)])
    model, vmap = build_baseline(config, toy_prices([1.0] * 4),
                                 initial=[(True, 2)])
    for t in range(2):
        j = int(vmap.on[0, t])
        assert model.lo[j] == model.up[j] == 1.0
    j = int(vmap.on[0, 2])
    assert (model.lo[j], model.up[j]) == (0.0, 1.0)
