"""Raw quote ingestion: per-date (maturity, rate) lists to curve panels.

The pipeline is deliberately rigid. Quotes outside the maturity window
are discarded first; what remains must bracket the grid, because curves
are interpolated (natural cubic splines) and never extrapolated. Dates
that cannot cover the grid, or have fewer than 4 usable quotes, are
dropped and reported rather than patched.

Panel CSVs carry one row per date with full double precision (shortest
round-trip decimals), so write followed by read is exact.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .exceptions import IngestError
from .grid import Fn, Grid

__all__ = [
    "RawQuote",
    "CurvePanel",
    "DroppedDate",
    "parse_quotes",
    "build_curve",
    "build_panel",
    "center_panel",
    "uncenter_panel",
    "difference_panel",
    "write_panel_csv",
    "read_panel_csv",
]

QUOTE_HEADER = ("date", "days_to_expiry", "rate")

#: largest absolute column mean tolerated in a panel marked centered
CENTER_TOL = 1e-10


@dataclass(frozen=True)
class RawQuote:
    """One observed rate: trade date, days to expiry, decimal rate."""

    date: dt.date
    days_to_expiry: int
    rate: float

    def __post_init__(self):
        if self.days_to_expiry <= 0:
            raise ValueError(f"days_to_expiry must be positive, got {self.days_to_expiry}")
        if not np.isfinite(self.rate):
            raise ValueError(f"rate must be finite, got {self.rate}")


class DroppedDate(NamedTuple):
    """A date excluded from a panel and the reason why."""

    date: dt.date
    reason: str


@dataclass(frozen=True, eq=False)
class CurvePanel:
    """Dated matrix of curves sampled on one grid, one row per date.

    ``mean_curve`` is present exactly when the panel is centered. A
    centered panel produced by :func:`center_panel` also remembers the
    original rows so :func:`uncenter_panel` can restore them bit for bit
    (re-adding the mean in floating point would not).
    """

    grid: Grid
    dates: tuple[dt.date, ...]
    rows: np.ndarray
    is_centered: bool = False
    mean_curve: Fn | None = None
    _source_rows: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        dates = tuple(self.dates)
        if not dates:
            raise ValueError("panel needs at least one date")
        if any(b <= a for a, b in zip(dates, dates[1:])):
            raise ValueError("panel dates must be strictly increasing")
        rows = np.asarray(self.rows, dtype=float)
        if rows.shape != (len(dates), self.grid.count):
            raise ValueError(
                f"rows must be {len(dates)}x{self.grid.count}, got {rows.shape}"
            )
        if not np.all(np.isfinite(rows)):
            raise ValueError("panel values must all be finite")
        if self.is_centered:
            if self.mean_curve is None:
                raise ValueError("centered panel must carry its mean curve")
            worst = float(np.max(np.abs(rows.mean(axis=0))))
            if worst > CENTER_TOL:
                raise ValueError(
                    f"panel marked centered but a column mean is {worst:.3e}"
                )
        elif self.mean_curve is not None:
            raise ValueError("mean_curve is only meaningful on a centered panel")
        rows = rows.copy()
        rows.flags.writeable = False
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return len(self.dates)

    def row_fn(self, i: int) -> Fn:
        """The curve observed on the i-th date."""
        return Fn(self.grid, self.rows[i])


def parse_quotes(stream: Iterable[str]) -> dict[dt.date, list[RawQuote]]:
    """Parse `date,days_to_expiry,rate` CSV text into quotes per date.

    Output is sorted by date and, within each date, by days to expiry.
    Malformed rows and duplicate (date, days) pairs raise
    :class:`IngestError` carrying the offending line number.
    """
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("quote CSV is empty (missing header)") from None
    if tuple(h.strip() for h in header) != QUOTE_HEADER:
        raise IngestError(
            f"line 1: expected header {','.join(QUOTE_HEADER)!r}, got {','.join(header)!r}"
        )

    seen: set[tuple[dt.date, int]] = set()
    grouped: dict[dt.date, list[RawQuote]] = {}
    for row in reader:
        line = reader.line_num
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 3:
            raise IngestError(f"line {line}: expected 3 fields, got {len(row)}")
        try:
            date = dt.date.fromisoformat(row[0].strip())
            days = int(row[1])
            rate = float(row[2])
            quote = RawQuote(date, days, rate)
        except (ValueError, TypeError) as exc:
            raise IngestError(f"line {line}: {exc}") from exc
        key = (date, days)
        if key in seen:
            raise IngestError(
                f"line {line}: duplicate quote for {date.isoformat()} at {days} days"
            )
        seen.add(key)
        grouped.setdefault(date, []).append(quote)

    return {
        date: sorted(grouped[date], key=lambda q: q.days_to_expiry)
        for date in sorted(grouped)
    }


def build_curve(quotes: Sequence[RawQuote], grid: Grid) -> Fn:
    """Natural cubic spline through one date's quotes, sampled on the grid.

    Needs at least 4 quotes whose maturities bracket the grid; values
    outside the quoted span would be extrapolation and are refused.
    """
    quotes = sorted(quotes, key=lambda q: q.days_to_expiry)
    days = np.array([q.days_to_expiry for q in quotes], dtype=float)
    if len(quotes) < 4:
        raise IngestError(f"need at least 4 quotes for a spline, got {len(quotes)}")
    if np.any(np.diff(days) == 0):
        raise IngestError("duplicate maturities in one date's quotes")
    if days[0] > grid.origin or days[-1] < grid.terminal:
        raise IngestError(
            f"quotes span [{days[0]:g}, {days[-1]:g}] days but the grid needs "
            f"[{grid.origin:g}, {grid.terminal:g}]; refusing to extrapolate"
        )
    rates = np.array([q.rate for q in quotes], dtype=float)
    spline = CubicSpline(days, rates, bc_type="natural")
    return Fn(grid, spline(grid.points))


def build_panel(
    quotes_by_date: Mapping[dt.date, Sequence[RawQuote]],
    window: tuple[float, float],
    spacing: float,
) -> tuple[CurvePanel, list[DroppedDate]]:
    """Interpolate every date onto a uniform grid inside the window.

    Quotes outside [min_days, max_days] (inclusive) are discarded before
    splining. Dates that then lack 4 quotes, or whose quotes fail to
    bracket the grid, are dropped and returned in the report list.
    """
    min_days, max_days = float(window[0]), float(window[1])
    spacing = float(spacing)
    if not (min_days > 0 and max_days > min_days and spacing > 0):
        raise IngestError(
            f"bad window/spacing: [{min_days:g}, {max_days:g}] at {spacing:g}"
        )
    count = int(np.floor((max_days - min_days) / spacing)) + 1
    if count < 2:
        raise IngestError("window is narrower than one grid spacing")
    grid = Grid(origin=min_days, spacing=spacing, count=count)

    kept_dates: list[dt.date] = []
    rows: list[np.ndarray] = []
    dropped: list[DroppedDate] = []
    for date in sorted(quotes_by_date):
        in_window = [
            q for q in quotes_by_date[date] if min_days <= q.days_to_expiry <= max_days
        ]
        try:
            curve = build_curve(in_window, grid)
        except IngestError as exc:
            dropped.append(DroppedDate(date, str(exc)))
            continue
        kept_dates.append(date)
        rows.append(curve.values)

    if not kept_dates:
        raise IngestError("no date has enough quotes to cover the grid")
    panel = CurvePanel(grid=grid, dates=tuple(kept_dates), rows=np.array(rows))
    return panel, dropped


def center_panel(panel: CurvePanel) -> CurvePanel:
    """Subtract the per-maturity sample mean, remembering it and the originals."""
    if panel.is_centered:
        raise ValueError("panel is already centered")
    mean = panel.rows.mean(axis=0)
    return CurvePanel(
        grid=panel.grid,
        dates=panel.dates,
        rows=panel.rows - mean,
        is_centered=True,
        mean_curve=Fn(panel.grid, mean),
        _source_rows=panel.rows,
    )


def uncenter_panel(panel: CurvePanel) -> CurvePanel:
    """Undo :func:`center_panel`, restoring the original rows exactly."""
    if not panel.is_centered:
        raise ValueError("panel is not centered")
    if panel._source_rows is not None:
        rows = panel._source_rows
    else:
        # centered panel built by hand: best effort, not bit-exact
        rows = panel.rows + panel.mean_curve.values
    return CurvePanel(grid=panel.grid, dates=panel.dates, rows=rows)


def difference_panel(panel: CurvePanel, lag: int) -> CurvePanel:
    """Panel of lagged curve changes f[t + lag] - f[t], dated by the led row."""
    lag = int(lag)
    if lag < 1:
        raise ValueError(f"lag must be >= 1, got {lag}")
    if panel.n <= lag:
        raise ValueError(f"need more than lag={lag} dates, got {panel.n}")
    return CurvePanel(
        grid=panel.grid,
        dates=panel.dates[lag:],
        rows=panel.rows[lag:] - panel.rows[:-lag],
    )


def write_panel_csv(panel: CurvePanel, path) -> None:
    """Write `date,<maturity>,...` rows; values survive a read round trip."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date"] + [repr(float(t)) for t in panel.grid.points])
        for date, row in zip(panel.dates, panel.rows):
            writer.writerow([date.isoformat()] + [repr(float(v)) for v in row])


def read_panel_csv(path) -> CurvePanel:
    """Read a panel written by :func:`write_panel_csv` (always un-centered)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "date" or len(header) < 3:
            raise IngestError(f"{path}: not a panel CSV (bad header)")
        try:
            grid = Grid.from_points([float(v) for v in header[1:]])
        except ValueError as exc:
            raise IngestError(f"{path}: bad maturity header: {exc}") from exc
        dates: list[dt.date] = []
        rows: list[list[float]] = []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise IngestError(
                    f"{path}: line {line}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                dates.append(dt.date.fromisoformat(row[0]))
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise IngestError(f"{path}: line {line}: {exc}") from exc
    if not dates:
        raise IngestError(f"{path}: panel CSV has no data rows")
    try:
        return CurvePanel(grid=grid, dates=tuple(dates), rows=np.array(rows))
    except ValueError as exc:
        raise IngestError(f"{path}: {exc}") from exc
