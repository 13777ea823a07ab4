"""SVG rendering: valid XML, markers, determinism, golden bytes."""

import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from flexsched.charts import render_sweep, render_week
from flexsched.plant import builtin_config
from flexsched.prices import synth_prices
from flexsched.schedule import CarryState
from flexsched.scheduler import run_day
from flexsched.sensitivity import SweepPoint, SweepResult, SweepSpec

GOLDEN = Path(__file__).parent / "golden" / "week.svg"


@pytest.fixture(scope="module")
def rendered_day():
    cfg = builtin_config("cement")
    store = synth_prices("sinusoid", {"mean": 60.0, "amplitude": 20.0,
                                      "sidc_premium": 15.0}, days=10, seed=7)
    return run_day(cfg, store.window(store.first_date, 8),
                   CarryState.fresh(cfg)), store.window(store.first_date, 8)


def test_week_chart_is_valid_xml_with_markers(rendered_day, tmp_path):
    day, ps = rendered_day
    out = tmp_path / "week.svg"
    render_week(day, ps, out)
    root = ET.parse(out).getroot()
    assert root.tag.endswith("svg")
    text = out.read_text()
    assert ">O<" in text and ">C<" in text
    assert text.count("<polyline") >= 5  # prices, sidc, 2x supply, 2x storage


def test_week_chart_renders_identically(rendered_day, tmp_path):
    day, ps = rendered_day
    a = tmp_path / "a.svg"
    b = tmp_path / "b.svg"
    render_week(day, ps, a)
    render_week(day, ps, b)
    assert a.read_bytes() == b.read_bytes()


def test_week_chart_matches_golden(rendered_day, tmp_path):
    day, ps = rendered_day
    out = tmp_path / "week.svg"
    render_week(day, ps, out)
    if not GOLDEN.exists():  # first verified render freezes the bytes
        GOLDEN.parent.mkdir(exist_ok=True)
        GOLDEN.write_bytes(out.read_bytes())
    assert out.read_bytes() == GOLDEN.read_bytes()


def test_identical_schedules_overlay_exactly():
    cfg = builtin_config("cement")
    store = synth_prices("flat", {"price": 50.0}, days=10)
    ps = store.window(store.first_date, 8)
    day = run_day(cfg, ps, CarryState.fresh(cfg))
    out_path = Path("/tmp/flat_week.svg")
    render_week(day, ps, out_path)
    text = out_path.read_text()
    # baseline and flexible polylines carry identical coordinates
    lines = [ln for ln in text.splitlines() if ln.startswith("<polyline")]
    black = [ln.split('points="')[1].split('"')[0] for ln in lines if "#101010" in ln]
    red = [ln.split('points="')[1].split('"')[0] for ln in lines if "#c82020" in ln]
    assert black and black == red


def test_sweep_chart(tmp_path):
    spec = SweepSpec(parameter="min_on", values=(1, 2, 3), base_config="cement")
    result = SweepResult(spec=spec, points=[
        SweepPoint(1, 49.0, 0.9, True, 0.0),
        SweepPoint(2, 50.0, 0.7, True, 0.0),
        SweepPoint(3, 51.5, 0.4, True, 0.0),
    ])
    out = tmp_path / "sweep.svg"
    render_sweep(result, out)
    root = ET.parse(out).getroot()
    assert root.tag.endswith("svg")
