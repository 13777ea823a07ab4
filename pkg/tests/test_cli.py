"""CLI surface: commands, exit codes, output determinism."""

import filecmp
import json
from pathlib import Path

import pytest

from flexsched.cli import main


def run_cli(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def price_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("prices")
    assert run_cli("--seed", 5, "prices", "synth", "--kind", "sinusoid",
                   "--days", 10, "--mean", 60, "--amplitude", 20,
                   "--sidc-premium", 12, "--out", path) == 0
    return path


def test_prices_synth_and_ingest(price_dir, capsys):
    assert run_cli("prices", "ingest", price_dir) == 0
    out = capsys.readouterr().out
    assert "10 days" in out


def test_config_show_and_validate(capsys, tmp_path):
    assert run_cli("config", "show", "cement", "--save", tmp_path / "c.cfg") == 0
    text = capsys.readouterr().out
    assert "machine.0.power_mw = 6.0" in text
    assert run_cli("config", "validate", tmp_path / "c.cfg") == 0


def test_config_validate_rejects_broken(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    assert run_cli("config", "show", "cement", "--save", path) == 0
    capsys.readouterr()
    text = path.read_text().replace("silo.0.initial_t = 9000.0",
                                    "silo.0.initial_t = 100.0")
    path.write_text(text)
    assert run_cli("config", "validate", path) == 2


def test_day_command(price_dir, tmp_path, capsys):
    rc = run_cli("--out", tmp_path, "day", "--config", "cement",
                 "--prices", price_dir, "--date", "2023-01-01",
                 "--dump-lp", tmp_path / "model.lp")
    assert rc == 0
    out = capsys.readouterr().out
    assert "window [24, 48]" in out
    assert (tmp_path / "day_2023-01-01.csv").exists()
    payload = json.loads((tmp_path / "day_2023-01-01.json").read_text())
    assert payload["window"] == [24, 48]
    assert (tmp_path / "model.lp").exists()
    assert (tmp_path / "model.lp.flexible").exists()


def test_simulate_command(price_dir, tmp_path):
    rc = run_cli("--out", tmp_path, "simulate", "--config", "cement",
                 "--prices", price_dir, "--from", "2023-01-01", "--days", 2)
    assert rc == 0
    payload = json.loads((tmp_path / "simulation_cement.json").read_text())
    assert payload["days"] == 2
    assert payload["annual_savings_eur"] >= 0.0
    assert "normalized_cost_eur_mwh" in payload


def test_simulate_is_deterministic(price_dir, tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for target in (a, b):
        rc = run_cli("--out", target, "simulate", "--config", "cement",
                     "--prices", price_dir, "--from", "2023-01-01", "--days", 2)
        assert rc == 0
    for name in ("simulation_cement.csv", "simulation_cement.json"):
        assert filecmp.cmp(a / name, b / name, shallow=False)


def test_missing_prices_exit_code(price_dir, tmp_path):
    rc = run_cli("--out", tmp_path, "simulate", "--config", "cement",
                 "--prices", price_dir, "--from", "2023-01-05", "--days", 10)
    assert rc == 5


def test_unknown_config_exit_code(price_dir):
    assert run_cli("day", "--config", "brick", "--prices", price_dir,
                   "--date", "2023-01-01") == 5  # unreadable as a file path


def test_infeasible_day_exit_code(price_dir, tmp_path):
    # storage pinned to a single level cannot follow the demand outflow
    path = tmp_path / "pinned.cfg"
    assert run_cli("config", "show", "cement", "--save", path) == 0
    text = path.read_text().replace("silo.0.capacity_t = 15000.0",
                                    "silo.0.capacity_t = 9000.0")
    path.write_text(text)
    assert run_cli("day", "--config", path, "--prices", price_dir,
                   "--date", "2023-01-01") == 3


def test_render_command(price_dir, tmp_path):
    out = tmp_path / "week.svg"
    rc = run_cli("render", "--config", "cement", "--prices", price_dir,
                 "--date", "2023-01-01", "--out", out)
    assert rc == 0
    assert out.read_text().startswith("<svg")


def test_sweep_command(price_dir, tmp_path, capsys):
    rc = run_cli("--out", tmp_path, "sweep", "--param", "min_on",
                 "--values", "6,1", "--config", "cement",
                 "--prices", price_dir, "--days", 1)
    assert rc == 0
    assert (tmp_path / "sweep_cement_min_on.csv").exists()
    assert (tmp_path / "sweep_cement_min_on.svg").exists()
    out = capsys.readouterr().out
    assert "min_on=6" in out and "min_on=1" in out
