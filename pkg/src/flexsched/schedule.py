"""Solution-side domain types shared by the builder, checker, and simulator."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Schedule:
    """Per-slot operating plan extracted from one solve."""

    grid_mw: np.ndarray  # power bought day-ahead
    trade_mw: np.ndarray  # intraday trade, negative = sell (zeros in baseline)
    charge_mw: np.ndarray
    discharge_mw: np.ndarray
    surplus_mw: np.ndarray
    machine_on: np.ndarray  # (K, N) 0/1
    storage_t: np.ndarray  # (S, N) tonnes
    total_cost_eur: float
    slot_hours: float = 1.0

    @property
    def n_slots(self):
        return len(self.grid_mw)

    @property
    def on_hours(self):
        """Operating hours per machine over the horizon."""
        return self.machine_on.sum(axis=1) * self.slot_hours

    def machine_energy_mwh(self, powers):
        """Energy drawn by the machines given their rated powers."""
        return float(np.dot(np.asarray(powers), self.on_hours))

    def copy(self):
        return Schedule(
            self.grid_mw.copy(), self.trade_mw.copy(), self.charge_mw.copy(),
            self.discharge_mw.copy(), self.surplus_mw.copy(), self.machine_on.copy(),
            self.storage_t.copy(), self.total_cost_eur, self.slot_hours,
        )


@dataclass
class CarryState:
    """State threaded between daily cycles."""

    storage_t: np.ndarray  # one entry per silo, end-of-day level
    machine_history: np.ndarray  # (K, H) trailing on/off states, most recent last
    day_index: int = 0

    @classmethod
    def fresh(cls, config):
        """Start-of-simulation state: configured storage, machines long OFF."""
        hist_len = max(
            max((m.min_on_slots for m in config.machines), default=1),
            max((m.min_off_slots for m in config.machines), default=1),
            1,
        )
        return cls(
            storage_t=np.array([s.initial_t for s in config.silos], dtype=np.float64),
            machine_history=np.zeros((len(config.machines), hist_len), dtype=np.int8),
            day_index=0,
        )

    def machine_init(self, config):
        """(previous state, remaining obligation slots) per machine."""
        out = []
        for k, mac in enumerate(config.machines):
            hist = self.machine_history[k]
            prev = int(hist[-1]) if len(hist) else 0
            run = 0
            for state in hist[::-1]:
                if int(state) != prev:
                    break
                run += 1
            need = mac.min_on_slots if prev else mac.min_off_slots
            out.append((bool(prev), max(0, need - run)))
        return out

    def advanced(self, storage_end, machine_states, days=1):
        """New state after committing `machine_states` ((K, n) on/off slots)."""
        hist_len = self.machine_history.shape[1]
        joined = np.concatenate([self.machine_history, machine_states.astype(np.int8)], axis=1)
        return CarryState(
            storage_t=np.asarray(storage_end, dtype=np.float64).copy(),
            machine_history=joined[:, -hist_len:].copy(),
            day_index=self.day_index + days,
        )


@dataclass
class DayResult:
    """Outcome of one two-stage daily cycle."""

    date: dt.date
    baseline: Schedule
    flexible: Schedule
    phi_star: float  # baseline cost over the full window
    phi_dagger: float  # flexible cost (equals phi_star when no trade accepted)
    delta_phi: float  # savings, floored at zero
    accepted: bool
    window: object = None  # TradingWindow of the day
    violations: list = field(default_factory=list)
