"""Continuous intraday (SIDC) session calendar.

Maps a consult hour on the first day of the planning window to the range of
delivery slots that are still tradeable. Sessions are encoded the way OMIE
publishes them: each trading round has an open/close wall-clock interval and
a set of negotiable delivery hours on the delivery day D and/or its eve D-1.
Rounds 17-24 plus 1-2 trade on the eve; rounds 3-16 trade on the delivery
day itself, so a consult in the early hours matches the round delivering
later hours of the same day.

The planning window convention is fixed: its first day occupies slots 1-24,
the next day slots 25-48.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from flexsched.errors import NoActiveRound, ParseError

EVE = -1  # round trades on the eve of delivery day
DELIVERY_DAY = 0  # round trades on delivery day itself


@dataclass(frozen=True)
class SidcRound:
    """One trading round: when it is open and which delivery hours it covers."""

    round_id: int
    trading_day: int  # EVE or DELIVERY_DAY
    trading_open: float  # wall-clock hours, e.g. 15.0, 15.333…
    trading_close: float  # exclusive; 24.0 for midnight
    periods: tuple  # ((day_offset, first_hour, last_hour), …)

    def __post_init__(self):
        if not self.trading_open < self.trading_close:
            raise ValueError(f"round {self.round_id}: open must precede close")
        for off, first, last in self.periods:
            if off not in (EVE, DELIVERY_DAY) or not (1 <= first <= last <= 24):
                raise ValueError(f"round {self.round_id}: bad period {(off, first, last)}")
            if self.trading_day == DELIVERY_DAY and off == EVE:
                raise ValueError(
                    f"round {self.round_id}: same-day round cannot deliver on the eve"
                )

    @property
    def negotiable_periods(self):
        """Expanded set of (day_offset, hour) pairs."""
        return frozenset(
            (off, h) for off, first, last in self.periods for h in range(first, last + 1)
        )


@dataclass(frozen=True)
class TradingWindow:
    """Tradeable delivery-slot interval [tau1, tau2] for a consult slot."""

    tau1: int
    tau2: int
    h_sidc: int

    def __post_init__(self):
        if not (1 <= self.tau1 <= self.tau2):
            raise ValueError(f"bad window ({self.tau1}, {self.tau2})")
        if self.tau1 <= self.h_sidc:
            raise ValueError("window must start after the consult slot")

    def slots(self):
        return range(self.tau1, self.tau2 + 1)

    @property
    def width(self):
        return self.tau2 - self.tau1 + 1


_T = lambda h, m=0: h + m / 60.0

_BUILTIN = (
    (17, EVE, _T(14), _T(15), ((EVE, 17, 24),)),
    (18, EVE, _T(15), _T(15, 20), ((EVE, 18, 24),)),
    (18, EVE, _T(15, 20), _T(16), ((EVE, 18, 24), (DELIVERY_DAY, 1, 24))),
    (19, EVE, _T(16), _T(17), ((EVE, 19, 24), (DELIVERY_DAY, 1, 24))),
    (20, EVE, _T(17), _T(18), ((EVE, 20, 24), (DELIVERY_DAY, 1, 24))),
    (21, EVE, _T(18), _T(19), ((EVE, 21, 24), (DELIVERY_DAY, 1, 24))),
    (22, EVE, _T(19), _T(20), ((EVE, 22, 24), (DELIVERY_DAY, 1, 24))),
    (23, EVE, _T(20), _T(21), ((EVE, 23, 24), (DELIVERY_DAY, 1, 24))),
    (24, EVE, _T(21), _T(22), ((EVE, 24, 24), (DELIVERY_DAY, 1, 24))),
    (1, EVE, _T(22, 20), _T(23), ((DELIVERY_DAY, 1, 24),)),
    (2, EVE, _T(23), _T(24), ((DELIVERY_DAY, 2, 24),)),
) + tuple(
    (rid, DELIVERY_DAY, _T(rid - 3), _T(rid - 2), ((DELIVERY_DAY, rid, 24),))
    for rid in range(3, 17)
)


def load_calendar():
    """The built-in session table: 25 rows (round 18 split at 15:20)."""
    return [SidcRound(*row) for row in _BUILTIN]


def load_calendar_csv(path):
    """Read a calendar override.

    Columns: round_id, open, close, day_offset, first_hour, last_hour.
    Times are HH:MM; day_offset is D-1 or D. Rows sharing (round_id, open,
    close) merge into one round. A round trades on the eve when it has any
    D-1 delivery period or opens at/after 22:00; otherwise on delivery day.
    """

    def hours(text, lineno):
        try:
            hh, mm = text.strip().split(":")
            return int(hh) + int(mm) / 60.0
        except ValueError:
            raise ParseError(path, lineno, f"bad time {text!r}")

    groups = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"round_id", "open", "close", "day_offset", "first_hour", "last_hour"}
        if reader.fieldnames is None or not need.issubset(reader.fieldnames):
            raise ParseError(path, 1, f"header must contain {sorted(need)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                rid = int(row["round_id"])
                first = int(row["first_hour"])
                last = int(row["last_hour"])
            except (TypeError, ValueError):
                raise ParseError(path, lineno, "non-integer round or hour field")
            off_text = row["day_offset"].strip().upper()
            if off_text in ("D-1", "-1"):
                off = EVE
            elif off_text in ("D", "0"):
                off = DELIVERY_DAY
            else:
                raise ParseError(path, lineno, f"bad day_offset {row['day_offset']!r}")
            key = (rid, hours(row["open"], lineno), hours(row["close"], lineno))
            groups.setdefault(key, []).append((off, first, last))

    rounds = []
    for (rid, open_h, close_h), periods in groups.items():
        has_eve = any(off == EVE for off, _f, _l in periods)
        trading_day = EVE if has_eve or open_h >= 22.0 else DELIVERY_DAY
        rounds.append(SidcRound(rid, trading_day, open_h, close_h, tuple(sorted(periods))))
    return rounds


def _round_at(calendar, wall_hour):
    for rnd in calendar:
        if rnd.trading_open <= wall_hour < rnd.trading_close:
            return rnd
    return None


def window_for_consult(h_sidc, calendar=None):
    """Tradeable window for a consult at slot h_sidc of the window's first day.

    The consult slot covers wall-clock [h_sidc-1, h_sidc); the round active
    at the slot's start applies. When the start falls in a calendar gap
    (22:00-22:20 in the built-in table), the round opening inside the slot
    is used instead, since it covers the majority of the slot.
    """
    if not 1 <= h_sidc <= 24:
        raise ValueError(f"h_sidc must be in 1..24, got {h_sidc}")
    calendar = load_calendar() if calendar is None else calendar
    start = float(h_sidc - 1)
    rnd = _round_at(calendar, start)
    if rnd is None:
        opening = [r for r in calendar if start < r.trading_open < start + 1.0]
        if not opening:
            raise NoActiveRound(f"no trading round covers consult slot {h_sidc}")
        rnd = min(opening, key=lambda r: r.trading_open)

    # slots relative to the window: on an eve round the delivery day is the
    # window's second day; on a same-day round it is the first day
    slots = sorted(h + 24 * (off - rnd.trading_day) for off, h in rnd.negotiable_periods)
    return TradingWindow(tau1=slots[0], tau2=slots[-1], h_sidc=h_sidc)
