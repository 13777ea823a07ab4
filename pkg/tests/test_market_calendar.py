"""Session-calendar tests: exhaustive consult table, invariants, CSV override."""

import pytest

from flexsched.errors import NoActiveRound, ParseError
from flexsched.market_calendar import (DELIVERY_DAY, EVE, SidcRound, TradingWindow,
                                       load_calendar, load_calendar_csv,
                                       window_for_consult)

# consult slot -> (tau1, tau2) for the built-in table, derived once by row
# lookup and frozen here
CONSULT_TABLE = {
    1: (3, 24), 2: (4, 24), 3: (5, 24), 4: (6, 24), 5: (7, 24), 6: (8, 24),
    7: (9, 24), 8: (10, 24), 9: (11, 24), 10: (12, 24), 11: (13, 24),
    12: (14, 24), 13: (15, 24), 14: (16, 24), 15: (17, 24), 16: (18, 24),
    17: (19, 48), 18: (20, 48), 19: (21, 48), 20: (22, 48), 21: (23, 48),
    22: (24, 48), 23: (25, 48), 24: (26, 48),
}


def test_calendar_has_25_rows():
    cal = load_calendar()
    assert len(cal) == 25
    assert sum(1 for r in cal if r.round_id == 18) == 2  # split sub-rows


def test_round_17_row():
    r17 = next(r for r in load_calendar() if r.round_id == 17)
    assert (r17.trading_open, r17.trading_close) == (14.0, 15.0)
    assert r17.trading_day == EVE
    assert r17.negotiable_periods == frozenset((EVE, h) for h in range(17, 25))


def test_round_18_late_subrow_spans_both_days():
    sub = [r for r in load_calendar() if r.round_id == 18]
    late = max(sub, key=lambda r: r.trading_open)
    assert late.trading_open == pytest.approx(15 + 20 / 60)
    periods = late.negotiable_periods
    assert (EVE, 18) in periods and (EVE, 24) in periods
    assert (DELIVERY_DAY, 1) in periods and (DELIVERY_DAY, 24) in periods


def test_round_3_trades_on_delivery_day():
    r3 = next(r for r in load_calendar() if r.round_id == 3)
    assert r3.trading_day == DELIVERY_DAY
    assert (r3.trading_open, r3.trading_close) == (0.0, 1.0)
    assert r3.negotiable_periods == frozenset((DELIVERY_DAY, h) for h in range(3, 25))


@pytest.mark.parametrize("h", sorted(CONSULT_TABLE))
def test_window_for_every_consult_slot(h):
    w = window_for_consult(h)
    assert (w.tau1, w.tau2) == CONSULT_TABLE[h]


def test_reference_consult_slot_22():
    w = window_for_consult(22)
    assert (w.tau1, w.tau2) == (24, 48)


def test_gap_slot_23_uses_next_round():
    # the 22:00-22:20 gap resolves to the round opening inside the slot
    assert (window_for_consult(23).tau1, window_for_consult(23).tau2) == (25, 48)


def test_window_always_starts_after_consult():
    for h in range(1, 25):
        w = window_for_consult(h)
        assert w.tau1 >= h + 1


def test_windows_are_contiguous_and_inside_two_days():
    for rnd in load_calendar():
        slots = sorted(h + 24 * (off - rnd.trading_day)
                       for off, h in rnd.negotiable_periods)
        assert slots == list(range(slots[0], slots[-1] + 1))
        assert 1 <= slots[0] and slots[-1] <= 48


def test_bad_consult_slot_rejected():
    with pytest.raises(ValueError):
        window_for_consult(0)
    with pytest.raises(ValueError):
        window_for_consult(25)


def test_trading_window_invariants():
    with pytest.raises(ValueError):
        TradingWindow(tau1=5, tau2=4, h_sidc=1)
    with pytest.raises(ValueError):
        TradingWindow(tau1=5, tau2=6, h_sidc=5)  # must open after the consult


def test_round_ordering_is_consistent():
    for rnd in load_calendar():
        assert rnd.trading_open < rnd.trading_close


def test_csv_override_roundtrip(tmp_path):
    path = tmp_path / "cal.csv"
    path.write_text(
        "round_id,open,close,day_offset,first_hour,last_hour\n"
        "17,14:00,15:00,D-1,17,24\n"
        "19,16:00,17:00,D-1,19,24\n"
        "19,16:00,17:00,D,1,24\n"
    )
    cal = load_calendar_csv(path)
    assert len(cal) == 2
    w = window_for_consult(17, calendar=cal)  # slot 17 starts 16:00 -> round 19
    assert (w.tau1, w.tau2) == (19, 48)


def test_csv_override_gap_raises_no_active_round(tmp_path):
    path = tmp_path / "cal.csv"
    path.write_text(
        "round_id,open,close,day_offset,first_hour,last_hour\n"
        "17,14:00,15:00,D-1,17,24\n"
    )
    cal = load_calendar_csv(path)
    with pytest.raises(NoActiveRound):
        window_for_consult(3, calendar=cal)


def test_csv_override_bad_rows(tmp_path):
    path = tmp_path / "cal.csv"
    path.write_text("round_id,open,close\n17,14:00,15:00\n")
    with pytest.raises(ParseError):
        load_calendar_csv(path)
    path.write_text(
        "round_id,open,close,day_offset,first_hour,last_hour\n"
        "17,14:00,15:00,D+2,17,24\n"
    )
    with pytest.raises(ParseError):
        load_calendar_csv(path)


def test_same_day_round_cannot_deliver_on_eve():
    with pytest.raises(ValueError):
        SidcRound(3, DELIVERY_DAY, 0.0, 1.0, ((EVE, 3, 24),))
