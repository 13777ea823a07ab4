"""Command-line interface.

Exit codes: 0 ok, 2 validation problem, 3 infeasible, 4 solver failure,
5 io error.
"""

from __future__ import annotations

import argparse
import datetime as dt
import sys
import tempfile
from pathlib import Path

from flexsched import charts, plant, prices, reporting
from flexsched.errors import FlexschedError, ValidationError
from flexsched.market_calendar import load_calendar_csv
from flexsched.model_builder import build_baseline, build_flexible
from flexsched.linmodel import write_lp
from flexsched.rolling_sim import normalize, run_year
from flexsched.schedule import CarryState
from flexsched.scheduler import run_day
from flexsched.sensitivity import SweepSpec, run_sweep, run_synergy
from flexsched.solver.engine import SolveOptions


def _config_from(arg):
    if arg in plant.BUILTIN_NAMES:
        return plant.builtin_config(arg)
    return plant.load_config(arg)


def _opts(args):
    return SolveOptions(solver=args.solver, external_cmd=args.external_cmd)


def _calendar(args):
    return load_calendar_csv(args.calendar) if args.calendar else None


def _store(path):
    return prices.ingest_prices(path)


def _outdir(args):
    return reporting.ensure_dir(args.out or ".")


def cmd_config(args):
    config = _config_from(args.name)
    bad = plant.validate(config)
    if args.action == "show":
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / f"{config.name}.cfg"
            plant.save_config(config, path)
            sys.stdout.write(path.read_text())
        if args.save:
            plant.save_config(config, args.save)
    for violation in bad:
        print(f"violation: {violation}", file=sys.stderr)
    if bad:
        raise ValidationError(f"{len(bad)} violation(s) in {config.name}")
    if args.action == "validate":
        print(f"{config.name}: ok")
    return 0


def cmd_day(args):
    config = _config_from(args.config)
    store = _store(args.prices)
    date = dt.date.fromisoformat(args.date)
    store.check_span(date, 8)
    ps = store.window(date, 8)
    day = run_day(config, ps, CarryState.fresh(config), date=date,
                  opts=_opts(args), calendar=_calendar(args))
    out = _outdir(args)
    reporting.write_day_csv(day, out / f"day_{date}.csv")
    reporting.write_json(reporting.day_summary(day), out / f"day_{date}.json")
    if args.dump_lp:
        model, _ = build_baseline(config, ps)
        write_lp(model, args.dump_lp)
        fmodel, _ = build_flexible(config, ps, day.baseline, day.window)
        write_lp(fmodel, str(args.dump_lp) + ".flexible")
    print(f"{date}: baseline {day.phi_star:.2f} EUR, flexible {day.phi_dagger:.2f} EUR, "
          f"savings {day.delta_phi:.2f} EUR, window [{day.window.tau1}, {day.window.tau2}]")
    return 0


def cmd_simulate(args):
    config = _config_from(args.config)
    store = _store(args.prices)
    start = dt.date.fromisoformat(getattr(args, "from"))
    ledger = run_year(config, store, start, days=args.days, opts=_opts(args),
                      lenient=args.lenient, state_carry=not args.no_state_carry,
                      calendar=_calendar(args),
                      log=(lambda msg: print(msg, file=sys.stderr)) if args.verbose else None)
    out = _outdir(args)
    reporting.write_ledger_csv(ledger, out / f"simulation_{config.name}.csv")
    normalized = None
    if ledger.total_on_hours is not None and ledger.total_on_hours.sum() > 0:
        normalized = normalize(ledger, config)
    reporting.write_json(reporting.ledger_summary(ledger, normalized),
                         out / f"simulation_{config.name}.json")
    print(f"{config.name}: {args.days} days, savings {ledger.annual_savings:.2f} EUR"
          + (f", normalized cost {normalized[0]:.4f} EUR/MWh,"
             f" normalized savings {normalized[1]:.4f} EUR/MWh" if normalized else ""))
    return 0


def cmd_sweep(args):
    values = tuple(float(v) for v in args.values.split(","))
    spec = SweepSpec(parameter=args.param, values=values, base_config=args.config)
    store = _store(args.prices)
    result = run_sweep(spec, store, duration_days=args.days, opts=_opts(args),
                       workers=args.workers)
    out = _outdir(args)
    stem = f"sweep_{args.config}_{args.param}"
    reporting.write_sweep_csv(result, out / f"{stem}.csv")
    reporting.write_json(reporting.sweep_summary(result), out / f"{stem}.json")
    charts.render_sweep(result, out / f"{stem}.svg")
    for p in result.points:
        tag = (f"cost {p.normalized_cost:.4f} savings {p.normalized_savings:.4f}"
               if p.feasible else f"infeasible ({p.note})")
        print(f"{args.param}={p.value:g}: {tag}")
    return 0


def cmd_synergy(args):
    store = _store(args.prices)
    result = run_synergy(args.config, store, duration_days=args.days, opts=_opts(args))
    out = _outdir(args)
    reporting.write_json(reporting.synergy_summary(result),
                         out / f"synergy_{args.config}.json")
    print(f"{args.config}: cost {result.before_cost:.4f} -> {result.after_cost:.4f} EUR/MWh, "
          f"savings {result.before_savings:.4f} -> {result.after_savings:.4f} EUR/MWh")
    return 0


def cmd_prices(args):
    if args.action == "ingest":
        store = _store(args.dir)
        if args.out:
            prices.export_store(store, args.out)
        print(f"{len(store)} days, {store.first_date} .. {store.last_date}")
        return 0
    if args.action == "synth":
        params = {}
        if args.kind == "flat":
            params["price"] = args.price
        elif args.kind == "sinusoid":
            params["mean"] = args.mean
            params["amplitude"] = args.amplitude
            params["sidc_premium"] = args.sidc_premium
        else:
            if args.match:
                params["source"] = _store(args.match)
            else:
                params["mean"] = args.mean
                params["std"] = args.std
        store = prices.synth_prices(args.kind, params, args.days, seed=args.seed,
                                    start=dt.date.fromisoformat(args.start))
        prices.export_store(store, args.out)
        print(f"wrote {len(store)} synthetic days to {args.out}")
        return 0
    if args.action == "convert-omie":
        store = prices.convert_omie(args.marginal, args.out, sidc_csv=args.sidc_csv)
        print(f"converted {len(store)} days to {args.out}")
        return 0
    raise ValidationError(f"unknown prices action {args.action!r}")


def cmd_render(args):
    config = _config_from(args.config)
    store = _store(args.prices)
    date = dt.date.fromisoformat(args.date)
    ps = store.window(date, 8)
    day = run_day(config, ps, CarryState.fresh(config), date=date,
                  opts=_opts(args), calendar=_calendar(args))
    target = args.out or f"week_{date}.svg"  # --out names the file here
    charts.render_week(day, ps, target)
    print(f"wrote {target}")
    return 0


GLOBAL_DEFAULTS = {
    "seed": 0,
    "solver": "builtin",
    "external_cmd": None,
    "lenient": False,
    "calendar": None,
    "out": None,
}


def build_parser():
    # shared flags accepted both before and after the subcommand; SUPPRESS
    # keeps a subcommand from clobbering a value given at the top level
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, help="seed for synthetic data")
    common.add_argument("--solver", choices=("builtin", "external"))
    common.add_argument("--external-cmd",
                        help="external solver command template with {lp} and {sol}")
    common.add_argument("--lenient", action="store_true",
                        help="record infeasible days and continue")
    common.add_argument("--calendar",
                        help="CSV override for the trading-session calendar")
    common.add_argument("--out", help="output directory (output file for render)")

    parser = argparse.ArgumentParser(
        prog="flexsched",
        description="Two-stage industrial load scheduling against day-ahead "
                    "and continuous intraday electricity markets.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("config", parents=[common], help="show or validate a plant configuration")
    p.add_argument("action", choices=("show", "validate"))
    p.add_argument("name", help="built-in name (cement, steel) or config file path")
    p.add_argument("--save", default=None, help="also write the config to this path")
    p.set_defaults(fn=cmd_config)

    p = sub.add_parser("day", parents=[common], help="run one daily two-stage cycle")
    p.add_argument("--config", required=True)
    p.add_argument("--prices", required=True)
    p.add_argument("--date", required=True)
    p.add_argument("--dump-lp", default=None, help="write the models in LP format")
    p.set_defaults(fn=cmd_day)

    p = sub.add_parser("simulate", parents=[common], help="rolling multi-day simulation")
    p.add_argument("--config", required=True)
    p.add_argument("--prices", required=True)
    p.add_argument("--from", required=True, help="start date YYYY-MM-DD")
    p.add_argument("--days", type=int, default=365)
    p.add_argument("--no-state-carry", action="store_true",
                   help="carry storage only; machine history resets daily")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("sweep", parents=[common], help="single-parameter sensitivity sweep")
    p.add_argument("--param", required=True,
                   choices=("demand_ratio", "storage_ratio", "min_on", "min_off"))
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--config", required=True)
    p.add_argument("--prices", required=True)
    p.add_argument("--days", type=int, default=28)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("synergy", parents=[common], help="base vs combined-optimum configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--prices", required=True)
    p.add_argument("--days", type=int, default=28)
    p.set_defaults(fn=cmd_synergy)

    p = sub.add_parser("prices", parents=[common], help="price data utilities")
    p.add_argument("action", choices=("ingest", "synth", "convert-omie"))
    p.add_argument("dir", nargs="?", help="price directory (ingest)")
    p.add_argument("--kind", choices=("flat", "sinusoid", "match-moments"))
    p.add_argument("--days", type=int, default=35)
    p.add_argument("--start", default="2023-01-01")
    p.add_argument("--price", type=float, default=50.0)
    p.add_argument("--mean", type=float, default=80.0)
    p.add_argument("--std", type=float, default=25.0)
    p.add_argument("--amplitude", type=float, default=20.0)
    p.add_argument("--sidc-premium", type=float, default=0.0)
    p.add_argument("--match", default=None, help="source store for match-moments")
    p.add_argument("--marginal", nargs="*", default=[], help="OMIE marginal price files")
    p.add_argument("--sidc-csv", default=None, help="intraday prices as date,slot,price")
    p.set_defaults(fn=cmd_prices)

    p = sub.add_parser("render", parents=[common], help="render the weekly schedule chart")
    p.add_argument("--config", required=True)
    p.add_argument("--prices", required=True)
    p.add_argument("--date", required=True)
    p.set_defaults(fn=cmd_render)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    for key, value in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    if args.command == "prices" and args.action == "synth" and not args.kind:
        print("error: prices synth requires --kind", file=sys.stderr)
        return 2
    if args.command == "prices" and args.action in ("synth", "convert-omie") and not args.out:
        print("error: this action requires --out", file=sys.stderr)
        return 2
    try:
        return args.fn(args)
    except FlexschedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
