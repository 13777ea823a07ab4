"""Rolling daily simulation with storage carry-over and cost normalization.

Each cycle solves the full planning window (one day plus a week of
lookahead) but commits only its first day: storage at slot 24 and the day's
machine states thread into the next cycle's carry state. Window-level costs
and savings accumulate into the ledger; normalization divides by machine
power times operating hours, both taken over the same windows, so the
flat-price identity holds exactly.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from flexsched.errors import InfeasibleDay, InfeasibleError, ZeroOperation
from flexsched.plant import PlantConfig
from flexsched.prices import PriceStore
from flexsched.schedule import CarryState
from flexsched.scheduler import flexibility_revenue, run_day
from flexsched.solver.engine import SolveOptions

LOOKAHEAD_DAYS = 8  # planning window: the committed day plus seven more
COMMIT_SLOTS = 24


@dataclass
class DaySummary:
    date: dt.date
    phi_star: float
    phi_dagger: float
    delta_phi: float
    accepted: bool
    on_hours: np.ndarray  # per machine, full window
    carry_storage: np.ndarray  # per silo, end of committed day
    skipped: bool = False
    note: str = ""


@dataclass
class SimulationLedger:
    config_name: str
    start_date: dt.date
    days: list = field(default_factory=list)
    annual_phi_star: float = 0.0
    annual_phi_dagger: float = 0.0
    annual_savings: float = 0.0
    total_on_hours: np.ndarray = None  # per machine
    machine_power_mw: np.ndarray = None
    skipped_days: int = 0

    def add(self, row: DaySummary):
        self.days.append(row)
        if row.skipped:
            self.skipped_days += 1
            return
        self.annual_phi_star += row.phi_star
        self.annual_phi_dagger += row.phi_dagger
        self.annual_savings += row.delta_phi
        if self.total_on_hours is None:
            self.total_on_hours = row.on_hours.astype(np.float64).copy()
        else:
            self.total_on_hours += row.on_hours

    @property
    def n_days(self):
        return len(self.days)


def run_year(config: PlantConfig, price_db: PriceStore, start_date,
             days=365, opts: SolveOptions = None, lenient=False,
             state_carry=True, calendar=None, log=None) -> SimulationLedger:
    """Serial daily fold of run_day with carry-over threading.

    `lenient` records infeasible days and keeps going (carry state
    unchanged); the default aborts, since silent gaps would corrupt the
    annual comparison. `state_carry=False` reverts to storage-only
    carry-over (machine history resets each midnight).
    """
    if isinstance(start_date, str):
        start_date = dt.date.fromisoformat(start_date)
    price_db.check_span(start_date, days + LOOKAHEAD_DAYS - 1)
    ledger = SimulationLedger(config_name=config.name, start_date=start_date,
                              machine_power_mw=np.array([m.power_mw for m in config.machines]))
    state = CarryState.fresh(config)
    for d in range(days):
        date = start_date + dt.timedelta(days=d)
        prices = price_db.window(date, LOOKAHEAD_DAYS)
        try:
            day = run_day(config, prices, state, date=date, opts=opts, calendar=calendar)
        except InfeasibleError as exc:
            if not lenient:
                if isinstance(exc, InfeasibleDay):
                    raise
                raise InfeasibleDay(f"{date}: {exc}")
            ledger.add(DaySummary(
                date=date, phi_star=float("nan"), phi_dagger=float("nan"),
                delta_phi=0.0, accepted=False,
                on_hours=np.zeros(len(config.machines)),
                carry_storage=state.storage_t.copy(), skipped=True, note=str(exc),
            ))
            if log:
                log(f"{date}: skipped ({exc})")
            continue
        committed = day.flexible
        state = state.advanced(
            storage_end=committed.storage_t[:, COMMIT_SLOTS - 1],
            machine_states=committed.machine_on[:, :COMMIT_SLOTS],
        )
        if not state_carry:
            state = CarryState(
                storage_t=state.storage_t,
                machine_history=np.zeros_like(CarryState.fresh(config).machine_history),
                day_index=state.day_index,
            )
        ledger.add(DaySummary(
            date=date,
            phi_star=day.phi_star,
            phi_dagger=day.phi_dagger,
            delta_phi=flexibility_revenue(day),
            accepted=day.accepted,
            on_hours=day.baseline.on_hours,
            carry_storage=state.storage_t.copy(),
        ))
        if log:
            log(f"{date}: phi*={day.phi_star:.2f} savings={day.delta_phi:.2f}")
    return ledger


def normalize(ledger: SimulationLedger, config: PlantConfig):
    """(cost, savings) in EUR/MWh: totals divided by machine energy."""
    if ledger.total_on_hours is None:
        raise ZeroOperation("ledger holds no completed days")
    energy = float(np.dot(ledger.machine_power_mw, ledger.total_on_hours))
    if energy <= 0.0:
        raise ZeroOperation("machines never ran; nothing to normalize by")
    return ledger.annual_phi_star / energy, ledger.annual_savings / energy
