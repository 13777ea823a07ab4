"""Price ingestion, synthetic generators, and the per-day price store.

Store layout on disk: one CSV per day named YYYY-MM-DD.csv with header
slot,day_ahead_forecast,day_ahead_actual,sidc and 24 rows. The sidc cell
may be empty outside trading sessions; negative prices are allowed.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from flexsched.errors import BadParams, GapError, MissingPrices, ParseError

HOURS = 24


@dataclass(frozen=True)
class PriceDay:
    date: dt.date
    forecast: np.ndarray  # day-ahead forecast, EUR/MWh, length 24
    actual: np.ndarray  # day-ahead clearing, EUR/MWh
    sidc: np.ndarray  # intraday continuous, NaN where no session price


@dataclass(frozen=True)
class PriceSet:
    """Per-slot price series covering one planning window."""

    day_ahead: np.ndarray  # pi_b series used in both objectives
    sidc: np.ndarray  # pi_m series, NaN where untradeable
    day_ahead_actual: np.ndarray = None

    @property
    def n_slots(self):
        return len(self.day_ahead)

    def require_window(self, tau1, tau2):
        """Check sidc prices exist on every tradeable slot."""
        seg = self.sidc[tau1 - 1 : tau2]
        if len(seg) != tau2 - tau1 + 1 or not np.all(np.isfinite(seg)):
            raise MissingPrices(f"sidc prices missing inside window [{tau1}, {tau2}]")


class PriceStore:
    """In-memory map date -> PriceDay with contiguous coverage."""

    def __init__(self, days):
        self._days = {d.date: d for d in days}
        if not self._days:
            raise BadParams("price store is empty")

    def __len__(self):
        return len(self._days)

    def __contains__(self, date):
        return date in self._days

    @property
    def first_date(self):
        return min(self._days)

    @property
    def last_date(self):
        return max(self._days)

    def dates(self):
        return sorted(self._days)

    def day(self, date) -> PriceDay:
        try:
            return self._days[date]
        except KeyError:
            raise MissingPrices(f"no prices for {date}")

    def window(self, start: dt.date, n_days: int) -> PriceSet:
        """Concatenate n_days of prices starting at `start`."""
        fore, act, sidc = [], [], []
        for k in range(n_days):
            day = self.day(start + dt.timedelta(days=k))
            fore.append(day.forecast)
            act.append(day.actual)
            sidc.append(day.sidc)
        return PriceSet(
            day_ahead=np.concatenate(fore),
            sidc=np.concatenate(sidc),
            day_ahead_actual=np.concatenate(act),
        )

    def check_span(self, start: dt.date, days_needed: int):
        missing = [
            start + dt.timedelta(days=k)
            for k in range(days_needed)
            if start + dt.timedelta(days=k) not in self._days
        ]
        if missing:
            raise MissingPrices(
                f"need {days_needed} days from {start}; missing {missing[0]}"
                + (f" and {len(missing) - 1} more" if len(missing) > 1 else "")
            )


def _parse_day_file(path: Path) -> PriceDay:
    try:
        date = dt.date.fromisoformat(path.stem)
    except ValueError:
        raise ParseError(path, 0, f"file name {path.name!r} is not YYYY-MM-DD.csv")
    fore = np.full(HOURS, np.nan)
    act = np.full(HOURS, np.nan)
    sidc = np.full(HOURS, np.nan)
    seen = set()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"slot", "day_ahead_forecast", "day_ahead_actual", "sidc"}
        if reader.fieldnames is None or not need.issubset(reader.fieldnames):
            raise ParseError(path, 1, f"header must contain {sorted(need)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                slot = int(row["slot"])
            except (TypeError, ValueError):
                raise ParseError(path, lineno, f"bad slot {row.get('slot')!r}")
            if not 1 <= slot <= HOURS:
                raise ParseError(path, lineno, f"slot {slot} outside 1..{HOURS}")
            if slot in seen:
                raise ParseError(path, lineno, f"duplicate slot {slot}")
            seen.add(slot)
            try:
                fore[slot - 1] = float(row["day_ahead_forecast"])
                act[slot - 1] = float(row["day_ahead_actual"])
                cell = (row["sidc"] or "").strip()
                sidc[slot - 1] = float(cell) if cell else np.nan
            except ValueError:
                raise ParseError(path, lineno, "non-numeric price cell")
    if len(seen) != HOURS:
        raise ParseError(path, 1, f"only {len(seen)} of {HOURS} slots present")
    if not (np.all(np.isfinite(fore)) and np.all(np.isfinite(act))):
        raise ParseError(path, 1, "day-ahead columns must be finite")
    return PriceDay(date, fore, act, sidc)


def ingest_prices(dir_path) -> PriceStore:
    """Read every YYYY-MM-DD.csv in a directory; reject gaps in the date range."""
    dir_path = Path(dir_path)
    files = sorted(dir_path.glob("*.csv"))
    if not files:
        raise GapError([f"no csv files in {dir_path}"])
    days = [_parse_day_file(p) for p in files]
    dates = {d.date for d in days}
    span = (max(dates) - min(dates)).days
    missing = [
        min(dates) + dt.timedelta(days=k)
        for k in range(span + 1)
        if min(dates) + dt.timedelta(days=k) not in dates
    ]
    if missing:
        raise GapError(missing)
    return PriceStore(days)


def _fmt(x):
    return repr(float(x))


def export_store(store: PriceStore, dir_path):
    """Write the store back to per-day CSVs (exact round-trip)."""
    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)
    for date in store.dates():
        day = store.day(date)
        with open(dir_path / f"{date.isoformat()}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["slot", "day_ahead_forecast", "day_ahead_actual", "sidc"])
            for t in range(HOURS):
                cell = "" if np.isnan(day.sidc[t]) else _fmt(day.sidc[t])
                writer.writerow([t + 1, _fmt(day.forecast[t]), _fmt(day.actual[t]), cell])


# ------------------------------------------------------------- synthesizers

def _standardize(draws, mean, std):
    # exact moment matching: the generated set has the requested mean/std
    z = (draws - draws.mean()) / (draws.std() or 1.0)
    return mean + std * z


def synth_prices(kind, params, days, seed=0, start=dt.date(2023, 1, 1)) -> PriceStore:
    """Deterministic synthetic price store.

    kinds:
      flat          params: price
      sinusoid      params: mean, amplitude [, sidc_premium]
      match-moments params: mean, std  (or source: PriceStore to copy moments)
    """
    if days < 1:
        raise BadParams("days must be positive")
    rng = np.random.default_rng(seed)
    out = []
    if kind == "flat":
        try:
            p = float(params["price"])
        except (KeyError, TypeError, ValueError):
            raise BadParams("flat needs numeric 'price'")
        for k in range(days):
            arr = np.full(HOURS, p)
            out.append(PriceDay(start + dt.timedelta(days=k), arr.copy(), arr.copy(), arr.copy()))
    elif kind == "sinusoid":
        try:
            mean = float(params["mean"])
            amp = float(params["amplitude"])
        except (KeyError, TypeError, ValueError):
            raise BadParams("sinusoid needs numeric 'mean' and 'amplitude'")
        premium = float(params.get("sidc_premium", 0.0))
        hours = np.arange(HOURS)
        curve = mean - amp * np.cos(2.0 * np.pi * hours / HOURS)
        for k in range(days):
            out.append(PriceDay(
                start + dt.timedelta(days=k), curve.copy(), curve.copy(), curve + premium,
            ))
    elif kind == "match-moments":
        if "source" in params:
            src = params["source"]
            sample = np.concatenate([src.day(d).forecast for d in src.dates()])
            mean, std = float(sample.mean()), float(sample.std())
        else:
            try:
                mean = float(params["mean"])
                std = float(params["std"])
            except (KeyError, TypeError, ValueError):
                raise BadParams("match-moments needs 'mean' and 'std' (or 'source')")
        if std < 0:
            raise BadParams("std must be non-negative")
        fore = _standardize(rng.normal(size=days * HOURS), mean, std)
        sidc = _standardize(rng.normal(size=days * HOURS), mean, std)
        for k in range(days):
            seg = slice(k * HOURS, (k + 1) * HOURS)
            out.append(PriceDay(
                start + dt.timedelta(days=k),
                fore[seg].copy(), fore[seg].copy(), sidc[seg].copy(),
            ))
    else:
        raise BadParams(f"unknown price kind {kind!r}")
    return PriceStore(out)


# ---------------------------------------------------------- OMIE conversion

def convert_omie(marginal_files, out_dir, sidc_csv=None):
    """One-shot converter from OMIE day-ahead dumps to the store format.

    marginal_files: marginalpdbc_YYYYMMDD.N files (semicolon rows
    year;month;day;hour;price_pt;price_es;). The ES column becomes both
    day-ahead columns (no forecast series is published). sidc_csv, when
    given, is a CSV with columns date,slot,price holding session prices.
    """
    sidc_map = {}
    if sidc_csv is not None:
        with open(sidc_csv, newline="") as fh:
            reader = csv.DictReader(fh)
            for lineno, row in enumerate(reader, start=2):
                try:
                    date = dt.date.fromisoformat(row["date"].strip())
                    slot = int(row["slot"])
                    sidc_map[(date, slot)] = float(row["price"])
                except (KeyError, TypeError, ValueError):
                    raise ParseError(sidc_csv, lineno, "expected date,slot,price")
    days = {}
    for path in marginal_files:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                parts = [p for p in raw.strip().rstrip(";").split(";") if p != ""]
                if len(parts) < 5 or not parts[0].isdigit():
                    continue  # header / footer markers
                try:
                    date = dt.date(int(parts[0]), int(parts[1]), int(parts[2]))
                    hour = int(parts[3])
                    price = float(parts[-1])
                except ValueError:
                    raise ParseError(path, lineno, f"bad marginal row {raw.strip()!r}")
                if not 1 <= hour <= HOURS:
                    continue  # 25th hour on DST days is dropped
                days.setdefault(date, np.full(HOURS, np.nan))[hour - 1] = price
    out = []
    for date, arr in sorted(days.items()):
        if np.isnan(arr).any():
            holes = int(np.isnan(arr).sum())
            raise GapError([f"{date} ({holes} missing hours)"])
        sidc = np.array([sidc_map.get((date, t + 1), np.nan) for t in range(HOURS)])
        out.append(PriceDay(date, arr.copy(), arr.copy(), sidc))
    store = PriceStore(out)
    export_store(store, out_dir)
    return store
