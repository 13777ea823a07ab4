"""Shared fixtures and instance generators."""

import datetime as dt

import numpy as np
import pytest

from flexsched.market_calendar import TradingWindow
from flexsched.plant import Battery, Machine, Silo, make_config, validate
from flexsched.prices import PriceSet
from flexsched.schedule import Schedule


def toy_config(**overrides):
    """The 4-slot reference instance: production 10 t/h against demand 5 t/h."""
    kw = dict(
        name="toy",
        machines=[Machine(power_mw=1.0, production_tph=10.0, min_on_slots=1, min_off_slots=0)],
        silos=[Silo(capacity_t=100.0, floor_t=0.0, initial_t=0.0)],
        battery=Battery(),
        demand_tph=5.0,
        horizon_slots=4,
    )
    kw.update(overrides)
    return make_config(**kw)


def toy_prices(day_ahead, sidc=None):
    day_ahead = np.asarray(day_ahead, dtype=np.float64)
    if sidc is None:
        sidc = np.full(len(day_ahead), np.nan)
    return PriceSet(day_ahead=day_ahead, sidc=np.asarray(sidc, dtype=np.float64))


def random_tiny_instance(rng, flexible=False):
    """Feasible single-machine instance small enough for the enumeration
    oracle; returns (config, prices[, window]). Used across solver tests."""
    for _ in range(60):
        n = int(rng.integers(4, 11))
        power = float(rng.integers(1, 8))
        prod = float(rng.integers(6, 16))
        demand = round(float(rng.uniform(0.2, 0.85)) * prod, 2)
        m_on = int(rng.integers(1, 4))
        m_off = int(rng.integers(0, 3))
        cap = float(rng.integers(2, 7)) * prod
        floor = 0.0 if rng.random() < 0.6 else round(0.2 * cap, 1)
        init = round(float(rng.uniform(floor, cap)), 1)
        config = make_config(
            name="tiny",
            machines=[Machine(power, prod, m_on, m_off)],
            silos=[Silo(capacity_t=cap, floor_t=floor, initial_t=init)],
            battery=Battery(),
            demand_tph=demand,
            horizon_slots=n,
            h_sidc=1,
        )
        if validate(config):
            continue
        day_ahead = np.round(rng.uniform(5.0, 100.0, n), 1)
        neg = rng.random(n) < 0.1
        day_ahead[neg] = -np.round(rng.uniform(0.0, 20.0, int(neg.sum())), 1)
        if not flexible:
            return config, toy_prices(day_ahead)
        tau1 = int(rng.integers(2, n))
        tau2 = int(rng.integers(tau1, n))
        window = TradingWindow(tau1=tau1, tau2=tau2, h_sidc=tau1 - 1)
        sidc = np.full(n, np.nan)
        sidc[tau1 - 1 : tau2] = np.round(rng.uniform(-10.0, 110.0, tau2 - tau1 + 1), 1)
        lc1 = float(rng.choice([0.5, 1.0, 2.0])) * power
        config = config.with_updates(sidc_trade_limit_mw=lc1)
        return config, toy_prices(day_ahead, sidc), window
    raise AssertionError("could not draw a feasible tiny instance")


def schedule_from_oracle(result, config):
    """Minimal Schedule built from an oracle pattern (for pinning tests)."""
    n = config.horizon_slots
    y = np.asarray(result.pattern, dtype=np.int8).reshape(1, n)
    prod = config.machines[0].production_tph * config.slot_hours
    dem = config.demand_tph * config.slot_hours
    store = config.silos[0].initial_t + np.cumsum(prod * y[0] - dem)
    return Schedule(
        grid_mw=result.grid_mw.copy(),
        trade_mw=np.zeros(n),
        charge_mw=np.zeros(n),
        discharge_mw=np.zeros(n),
        surplus_mw=np.maximum(0.0, result.grid_mw - config.machines[0].power_mw * y[0]
                              + config.pv_profile_mw),
        machine_on=y,
        storage_t=store.reshape(1, n),
        total_cost_eur=result.cost,
        slot_hours=config.slot_hours,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20230101)
