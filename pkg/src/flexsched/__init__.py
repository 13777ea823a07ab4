"""flexsched: two-stage MILP scheduling of flexible industrial loads
against day-ahead and continuous intraday electricity markets."""

from flexsched.market_calendar import (SidcRound, TradingWindow, load_calendar,
                                       window_for_consult)
from flexsched.plant import (Battery, Machine, PlantConfig, Silo, Violation,
                             builtin_config, load_config, save_config, validate)
from flexsched.prices import PriceSet, PriceStore, ingest_prices, synth_prices
from flexsched.rolling_sim import SimulationLedger, normalize, run_year
from flexsched.schedule import CarryState, DayResult, Schedule
from flexsched.scheduler import check_schedule, flexibility_revenue, run_day
from flexsched.sensitivity import SweepSpec, run_sweep, run_synergy
from flexsched.solver import SolveOptions, oracle_enumerate, solve_lp, solve_mip

__version__ = "0.1.0"

__all__ = [
    "SidcRound", "TradingWindow", "load_calendar", "window_for_consult",
    "Battery", "Machine", "PlantConfig", "Silo", "Violation",
    "builtin_config", "load_config", "save_config", "validate",
    "PriceSet", "PriceStore", "ingest_prices", "synth_prices",
    "SimulationLedger", "normalize", "run_year",
    "CarryState", "DayResult", "Schedule",
    "check_schedule", "flexibility_revenue", "run_day",
    "SweepSpec", "run_sweep", "run_synergy",
    "SolveOptions", "oracle_enumerate", "solve_lp", "solve_mip",
    "__version__",
]
