"""Parameter sweeps over plant configurations and the combined-optimum run.

Each sweep point clones the base configuration, rescales one parameter
(demand as a fraction of machine output, storage as hours of output, or the
machine run-length limits), replays the rolling simulation, and reports
normalized cost and savings. Points that turn infeasible are recorded and
the sweep continues.
"""

from __future__ import annotations

import dataclasses
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from flexsched.errors import (InfeasibleByConstruction, InfeasibleDay,
                              ValidationError, ZeroOperation)
from flexsched.plant import PlantConfig, builtin_config, expand_series, validate
from flexsched.rolling_sim import normalize, run_year

PARAMETERS = ("demand_ratio", "storage_ratio", "min_on", "min_off")

# feasibility edges of the ratio sweeps: demand above 0.9 of machine output
# or storage under 8 hours of output leaves no room to schedule
MAX_DEMAND_RATIO = 0.9
MIN_STORAGE_RATIO = 8.0

# combined best-performing values used by the synergy comparison
SYNERGY_SET = {"demand_ratio": 0.5, "storage_ratio": 40.0, "min_on": 1, "min_off": 1}


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    base_config: str = "cement"

    def __post_init__(self):
        if self.parameter not in PARAMETERS:
            raise ValidationError(f"unknown sweep parameter {self.parameter!r}")
        if not self.values:
            raise ValidationError("sweep needs at least one value")
        for v in self.values:
            if self.parameter == "demand_ratio" and not 0.0 < v <= MAX_DEMAND_RATIO:
                raise ValidationError(f"demand_ratio {v} outside (0, {MAX_DEMAND_RATIO}]")
            if self.parameter == "storage_ratio" and v < MIN_STORAGE_RATIO:
                raise ValidationError(f"storage_ratio {v} below {MIN_STORAGE_RATIO}")
            if self.parameter in ("min_on", "min_off") and (v != int(v) or v < (1 if self.parameter == "min_on" else 0)):
                raise ValidationError(f"{self.parameter} value {v} invalid")


@dataclass
class SweepPoint:
    value: float
    normalized_cost: float
    normalized_savings: float
    feasible: bool
    runtime_s: float
    note: str = ""


@dataclass
class SweepResult:
    spec: SweepSpec
    points: list = field(default_factory=list)


def apply_parameter(config: PlantConfig, parameter: str, value) -> PlantConfig:
    """Clone config with one swept parameter applied."""
    rate = config.total_production_tph
    if parameter == "demand_ratio":
        return config.with_updates(
            demand_tph=expand_series(value * rate, config.horizon_slots))
    if parameter == "storage_ratio":
        old_total = sum(s.capacity_t for s in config.silos)
        factor = (value * rate) / old_total
        silos = tuple(
            dataclasses.replace(
                s,
                capacity_t=s.capacity_t * factor,
                floor_t=s.floor_t * factor,  # keeps the base floor fraction
                initial_t=s.initial_t * factor,
            )
            for s in config.silos
        )
        return config.with_updates(silos=silos)
    if parameter == "min_on":
        machines = tuple(dataclasses.replace(m, min_on_slots=int(value))
                         for m in config.machines)
        return config.with_updates(machines=machines)
    if parameter == "min_off":
        machines = tuple(dataclasses.replace(m, min_off_slots=int(value))
                         for m in config.machines)
        return config.with_updates(machines=machines)
    raise ValidationError(f"unknown parameter {parameter!r}")


def _resolve_base(base):
    return base if isinstance(base, PlantConfig) else builtin_config(base)


def _run_point(args):
    config, price_db, start_date, days, opts, value = args
    t0 = time.monotonic()
    try:
        bad = validate(config)
        if bad:
            raise InfeasibleByConstruction("; ".join(str(v) for v in bad))
        ledger = run_year(config, price_db, start_date, days=days, opts=opts)
        cost, savings = normalize(ledger, config)
        return SweepPoint(value, cost, savings, True, time.monotonic() - t0)
    except (InfeasibleByConstruction, InfeasibleDay, ZeroOperation) as exc:
        return SweepPoint(value, float("nan"), float("nan"), False,
                          time.monotonic() - t0, note=str(exc))


def run_sweep(spec: SweepSpec, price_db, duration_days=28, start_date=None,
              opts=None, workers=1) -> SweepResult:
    """One simulation per sweep value; infeasible points are flagged."""
    base = _resolve_base(spec.base_config)
    start = start_date or price_db.first_date
    jobs = [
        (apply_parameter(base, spec.parameter, v), price_db, start, duration_days, opts, v)
        for v in spec.values
    ]
    result = SweepResult(spec=spec)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            result.points = list(pool.map(_run_point, jobs))
    else:
        result.points = [_run_point(j) for j in jobs]
    return result


@dataclass
class SynergyResult:
    base_name: str
    before_cost: float
    before_savings: float
    after_cost: float
    after_savings: float


def synergy_config(config: PlantConfig) -> PlantConfig:
    """Apply every best-performing parameter at once."""
    out = config
    for parameter, value in SYNERGY_SET.items():
        out = apply_parameter(out, parameter, value)
    return out


def run_synergy(base, price_db, duration_days=28, start_date=None, opts=None) -> SynergyResult:
    """Original versus combined-optimum configuration, both normalized."""
    base_cfg = _resolve_base(base)
    start = start_date or price_db.first_date
    led = run_year(base_cfg, price_db, start, days=duration_days, opts=opts)
    before = normalize(led, base_cfg)
    tuned = synergy_config(base_cfg)
    led2 = run_year(tuned, price_db, start, days=duration_days, opts=opts)
    after = normalize(led2, tuned)
    return SynergyResult(
        base_name=base_cfg.name,
        before_cost=before[0], before_savings=before[1],
        after_cost=after[0], after_savings=after[1],
    )
