"""CSV/JSON exports for day results, simulation ledgers, and sweeps.

All writers are deterministic: repr-formatted floats, sorted JSON keys, no
timestamps. Sweep runtimes stay in memory only, so repeated runs produce
byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


def _r(x):
    return repr(float(x))


def write_day_csv(day, path):
    """One row per slot with both schedules side by side."""
    base, flex = day.baseline, day.flexible
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["slot", "base_grid_mw", "base_on", "base_storage_t",
                  "flex_grid_mw", "flex_trade_mw", "flex_on", "flex_storage_t",
                  "base_charge_mw", "base_discharge_mw", "flex_charge_mw", "flex_discharge_mw"]
        writer.writerow(header)
        for t in range(base.n_slots):
            writer.writerow([
                t + 1,
                _r(base.grid_mw[t]),
                int(base.machine_on[:, t].sum()),
                _r(base.storage_t[:, t].sum()),
                _r(flex.grid_mw[t]),
                _r(flex.trade_mw[t]),
                int(flex.machine_on[:, t].sum()),
                _r(flex.storage_t[:, t].sum()),
                _r(base.charge_mw[t]),
                _r(base.discharge_mw[t]),
                _r(flex.charge_mw[t]),
                _r(flex.discharge_mw[t]),
            ])


def day_summary(day):
    return {
        "date": day.date.isoformat() if day.date else None,
        "baseline_cost_eur": float(day.phi_star),
        "flexible_cost_eur": float(day.phi_dagger),
        "savings_eur": float(day.delta_phi),
        "accepted": bool(day.accepted),
        "window": [day.window.tau1, day.window.tau2] if day.window else None,
        "baseline_on_hours": [float(h) for h in day.baseline.on_hours],
        "flexible_on_hours": [float(h) for h in day.flexible.on_hours],
    }


def write_json(payload, path):
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_ledger_csv(ledger, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "baseline_cost_eur", "flexible_cost_eur",
                         "savings_eur", "accepted", "on_hours", "carry_storage_t",
                         "skipped", "note"])
        for row in ledger.days:
            writer.writerow([
                row.date.isoformat(),
                _r(row.phi_star) if not row.skipped else "",
                _r(row.phi_dagger) if not row.skipped else "",
                _r(row.delta_phi),
                int(row.accepted),
                _r(float(np.sum(row.on_hours))),
                _r(float(np.sum(row.carry_storage))),
                int(row.skipped),
                row.note,
            ])


def ledger_summary(ledger, normalized=None):
    out = {
        "config": ledger.config_name,
        "start_date": ledger.start_date.isoformat(),
        "days": ledger.n_days,
        "skipped_days": ledger.skipped_days,
        "annual_baseline_cost_eur": float(ledger.annual_phi_star),
        "annual_flexible_cost_eur": float(ledger.annual_phi_dagger),
        "annual_savings_eur": float(ledger.annual_savings),
        "total_on_hours": [float(h) for h in (ledger.total_on_hours
                                              if ledger.total_on_hours is not None else [])],
    }
    if normalized is not None:
        out["normalized_cost_eur_mwh"] = float(normalized[0])
        out["normalized_savings_eur_mwh"] = float(normalized[1])
    return out


def write_sweep_csv(result, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([result.spec.parameter, "normalized_cost_eur_mwh",
                         "normalized_savings_eur_mwh", "feasible", "note"])
        for p in result.points:
            writer.writerow([
                repr(float(p.value)),
                _r(p.normalized_cost) if p.feasible else "",
                _r(p.normalized_savings) if p.feasible else "",
                int(p.feasible),
                p.note,
            ])


def sweep_summary(result):
    return {
        "parameter": result.spec.parameter,
        "base_config": result.spec.base_config if isinstance(result.spec.base_config, str)
        else result.spec.base_config.name,
        "points": [
            {
                "value": float(p.value),
                "normalized_cost_eur_mwh": None if not p.feasible else float(p.normalized_cost),
                "normalized_savings_eur_mwh": None if not p.feasible else float(p.normalized_savings),
                "feasible": bool(p.feasible),
            }
            for p in result.points
        ],
    }


def synergy_summary(result):
    return {
        "config": result.base_name,
        "before": {"normalized_cost_eur_mwh": float(result.before_cost),
                   "normalized_savings_eur_mwh": float(result.before_savings)},
        "after": {"normalized_cost_eur_mwh": float(result.after_cost),
                  "normalized_savings_eur_mwh": float(result.after_savings)},
    }


def ensure_dir(path):
    Path(path).mkdir(parents=True, exist_ok=True)
    return Path(path)
