"""Plant domain model: machines, silos, battery, and validated configurations.

Includes the two built-in case-study parameterizations ("cement", "steel")
and a key-value config file format with CSV sidecars for the demand and PV
series.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from flexsched.errors import IoError, ParseError, UnknownConfig


@dataclass(frozen=True)
class Machine:
    power_mw: float
    production_tph: float
    min_on_slots: int
    min_off_slots: int


@dataclass(frozen=True)
class Silo:
    capacity_t: float
    floor_t: float
    initial_t: float
    storage_cost: float = 0.0  # EUR per tonne and hour


@dataclass(frozen=True)
class Battery:
    capacity_mwh: float = 0.0
    depth_of_discharge: float = 0.0
    soc0_mwh: float = 0.0
    max_charge_mw: float = 0.0
    max_discharge_mw: float = 0.0
    cycle_cost: float = 0.0  # EUR per MWh charged or discharged

    @property
    def is_null(self):
        return self.capacity_mwh == 0.0


@dataclass(frozen=True, eq=False)
class PlantConfig:
    name: str
    machines: tuple
    silos: tuple
    battery: Battery
    demand_tph: np.ndarray  # per-slot series, length horizon_slots
    pv_profile_mw: np.ndarray  # per-slot series, length horizon_slots
    grid_limit_mw: float
    sidc_trade_limit_mw: float  # cap on a single-slot intraday trade
    min_revenue_eur: float = 0.0  # operator acceptance threshold on savings
    h_sidc: int = 22
    horizon_slots: int = 192
    slot_hours: float = 1.0
    demand_cover_floor: bool = False  # keep one hour of demand in storage

    def with_updates(self, **kw):
        return replace(self, **kw)

    @property
    def total_production_tph(self):
        return sum(m.production_tph for m in self.machines)

    @property
    def total_power_mw(self):
        return sum(m.power_mw for m in self.machines)


@dataclass(frozen=True)
class Violation:
    field: str
    message: str

    def __str__(self):
        return f"{self.field}: {self.message}"


def expand_series(value, n):
    """Broadcast a scalar to a flat per-slot series; pass arrays through."""
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"series has length {arr.shape}, expected {n}")
    return arr.copy()


def make_config(name, machines, silos, battery, demand_tph, pv_profile_mw=0.0,
                grid_limit_mw=None, sidc_trade_limit_mw=None, **kw):
    """Convenience constructor: expands series, applies spec'd defaults."""
    horizon = int(kw.pop("horizon_slots", 192))
    total_power = sum(m.power_mw for m in machines)
    if grid_limit_mw is None:
        grid_limit_mw = total_power
    if sidc_trade_limit_mw is None:
        sidc_trade_limit_mw = grid_limit_mw  # the grid connection caps any trade
    return PlantConfig(
        name=name,
        machines=tuple(machines),
        silos=tuple(silos),
        battery=battery,
        demand_tph=expand_series(demand_tph, horizon),
        pv_profile_mw=expand_series(pv_profile_mw, horizon),
        grid_limit_mw=float(grid_limit_mw),
        sidc_trade_limit_mw=float(sidc_trade_limit_mw),
        horizon_slots=horizon,
        **kw,
    )


def demand_prescan(config, initial_storage=None):
    """Necessary feasibility condition: cumulative demand can always be met
    by running every machine flat out on top of the usable initial storage."""
    dt = config.slot_hours
    usable = sum(
        (s.initial_t if initial_storage is None else initial_storage[i]) - s.floor_t
        for i, s in enumerate(config.silos)
    )
    max_rate = config.total_production_tph
    cum_demand = np.cumsum(config.demand_tph * dt)
    slots = np.arange(1, config.horizon_slots + 1)
    deficit = cum_demand - (usable + slots * max_rate * dt)
    worst = int(np.argmax(deficit))
    if deficit[worst] > 1e-9:
        return Violation(
            "demand_tph",
            f"unsatisfiable by slot {worst + 1}: cumulative demand "
            f"{cum_demand[worst]:.1f} t exceeds storage+production "
            f"{usable + (worst + 1) * max_rate * dt:.1f} t",
        )
    return None


def validate(config: PlantConfig):
    """Check every invariant; returns a list of violations (empty = valid)."""
    v = []
    n = config.horizon_slots
    if n < 2:
        v.append(Violation("horizon_slots", "must be at least 2"))
    if config.slot_hours <= 0:
        v.append(Violation("slot_hours", "must be positive"))
    if not config.machines:
        v.append(Violation("machines", "at least one machine required"))
    if not config.silos:
        v.append(Violation("silos", "at least one silo required"))
    for k, mac in enumerate(config.machines):
        tag = f"machines[{k}]"
        if mac.power_mw <= 0:
            v.append(Violation(f"{tag}.power_mw", "must be positive"))
        if mac.production_tph <= 0:
            v.append(Violation(f"{tag}.production_tph", "must be positive"))
        if mac.min_on_slots < 1:
            v.append(Violation(f"{tag}.min_on_slots", "must be at least 1"))
        if mac.min_off_slots < 0:
            v.append(Violation(f"{tag}.min_off_slots", "must be non-negative"))
    for i, silo in enumerate(config.silos):
        tag = f"silos[{i}]"
        if not 0 <= silo.floor_t:
            v.append(Violation(f"{tag}.floor_t", "must be non-negative"))
        if silo.floor_t > silo.capacity_t:
            v.append(Violation(f"{tag}.floor_t", "exceeds capacity_t"))
        if not silo.floor_t <= silo.initial_t <= silo.capacity_t:
            v.append(Violation(f"{tag}.initial_t", "outside [floor_t, capacity_t]"))
        if silo.storage_cost < 0:
            v.append(Violation(f"{tag}.storage_cost", "must be non-negative"))
    bat = config.battery
    for fname in ("capacity_mwh", "soc0_mwh", "max_charge_mw", "max_discharge_mw", "cycle_cost"):
        if getattr(bat, fname) < 0:
            v.append(Violation(f"battery.{fname}", "must be non-negative"))
    if not 0.0 <= bat.depth_of_discharge <= 1.0:
        v.append(Violation("battery.depth_of_discharge", "must be in [0, 1]"))
    elif bat.is_null:
        if bat.soc0_mwh > 0:
            v.append(Violation("battery.soc0_mwh", "positive charge in a zero-capacity battery"))
    else:
        lo = bat.capacity_mwh * (1.0 - bat.depth_of_discharge)
        hi = bat.capacity_mwh * bat.depth_of_discharge
        if lo > hi:
            v.append(Violation("battery.depth_of_discharge",
                               "usable charge range is empty (DoD below 0.5)"))
        elif not lo <= bat.soc0_mwh <= hi:
            v.append(Violation("battery.soc0_mwh", f"outside usable range [{lo}, {hi}]"))
    if config.grid_limit_mw < config.total_power_mw:
        v.append(Violation("grid_limit_mw",
                           "below the combined machine draw; simultaneous operation impossible"))
    if config.sidc_trade_limit_mw < 0:
        v.append(Violation("sidc_trade_limit_mw", "must be non-negative"))
    if config.min_revenue_eur < 0:
        v.append(Violation("min_revenue_eur", "must be non-negative"))
    if not 1 <= config.h_sidc <= 24:
        v.append(Violation("h_sidc", "must be in 1..24"))
    for sname in ("demand_tph", "pv_profile_mw"):
        series = getattr(config, sname)
        if series.shape != (n,):
            v.append(Violation(sname, f"length {series.shape} != horizon {n}"))
        elif not np.all(np.isfinite(series)) or (series < 0).any():
            v.append(Violation(sname, "entries must be finite and non-negative"))
    if not v and config.machines and config.silos:
        scan = demand_prescan(config)
        if scan is not None:
            v.append(scan)
    return v


def builtin_config(name: str) -> PlantConfig:
    """The two case-study configurations (battery and PV null in both)."""
    if name == "cement":
        return make_config(
            "cement",
            machines=[Machine(power_mw=6.0, production_tph=360.0, min_on_slots=6, min_off_slots=3)],
            silos=[Silo(capacity_t=15000.0, floor_t=9000.0, initial_t=9000.0)],
            battery=Battery(),
            demand_tph=240.0,
        )
    if name == "steel":
        return make_config(
            "steel",
            machines=[Machine(power_mw=63.0, production_tph=172.0, min_on_slots=7, min_off_slots=1)],
            silos=[Silo(capacity_t=28000.0, floor_t=0.0, initial_t=0.0)],
            battery=Battery(),
            demand_tph=83.33,
        )
    raise UnknownConfig(f"no built-in config named {name!r} (have: cement, steel)")


BUILTIN_NAMES = ("cement", "steel")


# --------------------------------------------------------------- file format

_SCALARS = (
    ("grid_limit_mw", float),
    ("sidc_trade_limit_mw", float),
    ("min_revenue_eur", float),
    ("h_sidc", int),
    ("horizon_slots", int),
    ("slot_hours", float),
)

_BATTERY_FIELDS = ("capacity_mwh", "depth_of_discharge", "soc0_mwh",
                   "max_charge_mw", "max_discharge_mw", "cycle_cost")


def save_config(config: PlantConfig, path):
    """Write `<plant>.cfg` plus demand/PV CSV sidecars for non-flat series."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"name = {config.name}"]
    for key, _cast in _SCALARS:
        lines.append(f"{key} = {getattr(config, key)!r}")
    lines.append(f"demand_cover_floor = {str(config.demand_cover_floor).lower()}")
    for k, mac in enumerate(config.machines):
        lines.append(f"machine.{k}.power_mw = {mac.power_mw!r}")
        lines.append(f"machine.{k}.production_tph = {mac.production_tph!r}")
        lines.append(f"machine.{k}.min_on_slots = {mac.min_on_slots}")
        lines.append(f"machine.{k}.min_off_slots = {mac.min_off_slots}")
    for i, silo in enumerate(config.silos):
        lines.append(f"silo.{i}.capacity_t = {silo.capacity_t!r}")
        lines.append(f"silo.{i}.floor_t = {silo.floor_t!r}")
        lines.append(f"silo.{i}.initial_t = {silo.initial_t!r}")
        lines.append(f"silo.{i}.storage_cost = {silo.storage_cost!r}")
    for fname in _BATTERY_FIELDS:
        lines.append(f"battery.{fname} = {getattr(config.battery, fname)!r}")
    for sname, key in (("demand_tph", "demand"), ("pv_profile_mw", "pv")):
        series = getattr(config, sname)
        if np.all(series == series[0]):
            lines.append(f"{key} = {float(series[0])!r}")
        else:
            sidecar = path.with_name(f"{path.stem}_{key}.csv")
            with open(sidecar, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["slot", "value"])
                for t, val in enumerate(series, start=1):
                    writer.writerow([t, repr(float(val))])
            lines.append(f"{key}_csv = {sidecar.name}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_series_csv(path, n):
    values = np.full(n, np.nan)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for lineno, row in enumerate(reader, start=2):
            try:
                t = int(row["slot"])
                values[t - 1] = float(row["value"])
            except (KeyError, TypeError, ValueError, IndexError):
                raise ParseError(path, lineno, "expected columns slot,value with slot in range")
    if np.isnan(values).any():
        raise ParseError(path, 1, f"series does not cover all {n} slots")
    return values


def load_config(path) -> PlantConfig:
    """Parse the key-value format written by save_config."""
    path = Path(path)
    if not path.is_file():
        raise IoError(f"no such config file: {path} "
                      f"(built-in names: {', '.join(BUILTIN_NAMES)})")
    kv = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(path, lineno, f"expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            kv[key.strip()] = value.strip()

    def take(key, cast, default=None):
        if key not in kv:
            if default is None:
                raise ParseError(path, 1, f"missing required key {key!r}")
            return default
        try:
            return cast(kv.pop(key))
        except ValueError:
            raise ParseError(path, 1, f"bad value for {key!r}")

    name = take("name", str)
    scalars = {key: take(key, cast) for key, cast in _SCALARS}
    cover = take("demand_cover_floor", lambda s: s.lower() in ("true", "1", "yes"), False)
    horizon = scalars["horizon_slots"]

    machines = []
    for k in range(64):
        if f"machine.{k}.power_mw" not in kv:
            break
        machines.append(Machine(
            power_mw=take(f"machine.{k}.power_mw", float),
            production_tph=take(f"machine.{k}.production_tph", float),
            min_on_slots=take(f"machine.{k}.min_on_slots", int),
            min_off_slots=take(f"machine.{k}.min_off_slots", int),
        ))
    silos = []
    for i in range(64):
        if f"silo.{i}.capacity_t" not in kv:
            break
        silos.append(Silo(
            capacity_t=take(f"silo.{i}.capacity_t", float),
            floor_t=take(f"silo.{i}.floor_t", float),
            initial_t=take(f"silo.{i}.initial_t", float),
            storage_cost=take(f"silo.{i}.storage_cost", float, 0.0),
        ))
    battery = Battery(**{fname: take(f"battery.{fname}", float, 0.0) for fname in _BATTERY_FIELDS})

    def series(key, n):
        if f"{key}_csv" in kv:
            return _read_series_csv(path.with_name(kv.pop(f"{key}_csv")), n)
        return expand_series(take(key, float, 0.0), n)

    demand = series("demand", horizon)
    pv = series("pv", horizon)
    if not machines or not silos:
        raise ParseError(path, 1, "config needs at least one machine and one silo")
    return PlantConfig(
        name=name,
        machines=tuple(machines),
        silos=tuple(silos),
        battery=battery,
        demand_tph=demand,
        pv_profile_mw=pv,
        demand_cover_floor=cover,
        **scalars,
    )
