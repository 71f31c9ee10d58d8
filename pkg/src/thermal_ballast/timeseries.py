"""Uniformly sampled signals, resampling, horizon windows and weekly schedules.

All timestamps are timezone-aware UTC.  Schedules are evaluated in a fixed
local offset (no DST table).
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from ._validation import frozen_array
from .exceptions import (
    EmptySeries,
    LengthMismatch,
    NonIntegerRatio,
    OutOfRange,
    SignalGap,
    StepMismatch,
    UnitMismatch,
)

__all__ = [
    "Unit",
    "TimeSeries",
    "Schedule",
    "resample",
    "window",
    "sample_schedule",
    "schedule_series",
    "read_series_csv",
    "write_series_csv",
    "parse_timestamp",
    "format_timestamp",
    "office_occupancy",
    "setpoint_schedule",
]


class Unit(str, enum.Enum):
    CELSIUS = "degC"
    KWH = "kWh"
    KW = "kW"
    G_PER_KWH = "gCO2/kWh"
    PERSONS = "persons"
    DIMENSIONLESS = "1"

    @property
    def extensive(self):
        """Energy per step: summed when downsampling, split when upsampling."""
        return self is Unit.KWH

    @classmethod
    def parse(cls, text):
        if isinstance(text, Unit):
            return text
        key = str(text).strip()
        alias = _UNIT_ALIASES.get(key.lower())
        if alias is not None:
            return alias
        raise UnitMismatch(f"unknown unit {text!r}")


_UNIT_ALIASES = {
    "degc": Unit.CELSIUS,
    "°c": Unit.CELSIUS,
    "c": Unit.CELSIUS,
    "kwh": Unit.KWH,
    "kw": Unit.KW,
    "gco2/kwh": Unit.G_PER_KWH,
    "gco₂/kwh": Unit.G_PER_KWH,
    "g/kwh": Unit.G_PER_KWH,
    "persons": Unit.PERSONS,
    "person": Unit.PERSONS,
    "1": Unit.DIMENSIONLESS,
    "dimensionless": Unit.DIMENSIONLESS,
    "-": Unit.DIMENSIONLESS,
}


def parse_timestamp(text):
    """Parse ISO-8601; naive values are taken as UTC."""
    text = text.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts):
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _as_utc(ts):
    if isinstance(ts, str):
        return parse_timestamp(ts)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


@dataclass(frozen=True)
class TimeSeries:
    """Immutable, uniformly sampled signal.

    ``step`` is the sample spacing in minutes; ``values[i]`` belongs to the
    interval starting at ``start + i * step``.
    """

    start: datetime
    step: float
    values: np.ndarray
    unit: Unit = Unit.DIMENSIONLESS

    def __post_init__(self):
        object.__setattr__(self, "start", _as_utc(self.start))
        step = float(self.step)
        if not math.isfinite(step) or step <= 0:
            raise ValueError(f"step must be > 0 minutes, got {self.step!r}")
        object.__setattr__(self, "step", step)
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if values.size == 0:
            raise EmptySeries("a time series needs at least one value")
        if not np.all(np.isfinite(values)):
            raise SignalGap("time series contains non-finite values")
        object.__setattr__(self, "values", frozen_array(values))
        object.__setattr__(self, "unit", Unit.parse(self.unit))

    def __len__(self):
        return self.values.size

    @property
    def end(self):
        """Exclusive end timestamp."""
        return self.start + timedelta(minutes=self.step * len(self))

    @property
    def timestamps(self):
        delta = timedelta(minutes=self.step)
        return [self.start + i * delta for i in range(len(self))]

    def total(self):
        return float(self.values.sum())

    def with_values(self, values):
        return TimeSeries(self.start, self.step, values, self.unit)

    def _check_compatible(self, other):
        if other.unit is not self.unit:
            raise UnitMismatch(f"cannot combine {self.unit.value} with {other.unit.value}")
        if other.step != self.step:
            raise StepMismatch(f"step {self.step} != {other.step}")
        if len(other) != len(self) or other.start != self.start:
            raise LengthMismatch("series are not aligned")

    def __add__(self, other):
        if isinstance(other, TimeSeries):
            self._check_compatible(other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + float(other))

    def __sub__(self, other):
        if isinstance(other, TimeSeries):
            self._check_compatible(other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - float(other))

    def __mul__(self, factor):
        if isinstance(factor, TimeSeries):
            raise UnitMismatch("product of two series has no supported unit tag")
        return self.with_values(self.values * float(factor))

    __rmul__ = __mul__

    def index_of(self, ts):
        """Index of the sample starting exactly at ``ts``."""
        offset = (_as_utc(ts) - self.start).total_seconds() / 60.0
        idx = offset / self.step
        if abs(idx - round(idx)) > 1e-9:
            raise SignalGap(f"{ts} is not on the sampling grid of this series")
        return int(round(idx))

    def between(self, start, end):
        """Sub-series covering ``[start, end)``; raises if not fully covered."""
        i0 = self.index_of(start)
        i1 = self.index_of(end)
        if i0 < 0 or i1 > len(self) or i1 <= i0:
            raise SignalGap(
                f"series {format_timestamp(self.start)}..{format_timestamp(self.end)} "
                f"does not cover {format_timestamp(_as_utc(start))}..{format_timestamp(_as_utc(end))}"
            )
        return TimeSeries(self.start + timedelta(minutes=self.step * i0), self.step,
                          self.values[i0:i1], self.unit)

    def resample(self, new_step):
        return resample(self, new_step)

    def window(self, k, m):
        return window(self, k, m)


def _integer_ratio(a, b):
    ratio = a / b
    f = round(ratio)
    if f < 1 or abs(ratio - f) > 1e-9:
        return None
    return int(f)


def resample(s, new_step):
    """Change the sampling step by an integer factor.

    Downsampling averages blocks for intensive units and sums them for kWh;
    upsampling holds intensive values and splits kWh uniformly.
    """
    if len(s) == 0:
        raise EmptySeries("cannot resample an empty series")
    new_step = float(new_step)
    if not math.isfinite(new_step) or new_step <= 0:
        raise ValueError(f"new_step must be > 0, got {new_step!r}")
    if new_step == s.step:
        return s
    if new_step > s.step:
        f = _integer_ratio(new_step, s.step)
        if f is None:
            raise NonIntegerRatio(f"{new_step} min is not an integer multiple of {s.step} min")
        if len(s) % f:
            raise NonIntegerRatio(f"length {len(s)} is not a multiple of the factor {f}")
        blocks = s.values.reshape(-1, f)
        values = blocks.sum(axis=1) if s.unit.extensive else blocks.mean(axis=1)
    else:
        f = _integer_ratio(s.step, new_step)
        if f is None:
            raise NonIntegerRatio(f"{s.step} min is not an integer multiple of {new_step} min")
        values = np.repeat(s.values, f)
        if s.unit.extensive:
            values = values / f
    return TimeSeries(s.start, new_step, values, s.unit)


def window(s, k, m):
    """Copy of ``values[k:k+m]``; mutating it never touches ``s``."""
    values = s.values if isinstance(s, TimeSeries) else np.asarray(s, dtype=float)
    k, m = int(k), int(m)
    if k < 0 or m < 0 or k + m > values.size:
        raise OutOfRange(f"window [{k}, {k + m}) outside series of length {values.size}")
    return np.array(values[k:k + m], dtype=float)


@dataclass(frozen=True)
class Schedule:
    """Weekly profile: one list of ``(start_hour, end_hour, value)`` for
    weekdays and one for weekends, each tiling ``[0, 24)``.
    """

    weekday: tuple
    weekend: tuple
    utc_offset_hours: float = 0.0
    unit: Unit = Unit.DIMENSIONLESS

    def __post_init__(self):
        object.__setattr__(self, "weekday", _check_profile(self.weekday, "weekday"))
        object.__setattr__(self, "weekend", _check_profile(self.weekend, "weekend"))
        object.__setattr__(self, "unit", Unit.parse(self.unit))

    def sample(self, t):
        return sample_schedule(self, t)

    def values(self):
        return {v for _, _, v in self.weekday} | {v for _, _, v in self.weekend}

    def to_dict(self):
        return {
            "weekday": [list(seg) for seg in self.weekday],
            "weekend": [list(seg) for seg in self.weekend],
        }


def _check_profile(segments, name):
    segs = tuple(sorted((float(a), float(b), float(v)) for a, b, v in segments))
    if not segs:
        raise ValueError(f"{name} profile is empty")
    cursor = 0.0
    for a, b, v in segs:
        if a != cursor:
            raise ValueError(f"{name} profile has a gap or overlap at hour {cursor}")
        if not b > a:
            raise ValueError(f"{name} segment ({a}, {b}) is empty")
        if not math.isfinite(v):
            raise ValueError(f"{name} segment value must be finite")
        cursor = b
    if cursor != 24.0:
        raise ValueError(f"{name} profile ends at hour {cursor}, expected 24")
    return segs


def local_time(t, utc_offset_hours):
    return _as_utc(t) + timedelta(hours=utc_offset_hours)


def sample_schedule(sch, t):
    """Value of the segment containing the local hour of ``t``."""
    local = local_time(t, sch.utc_offset_hours)
    hour = local.hour + local.minute / 60.0 + local.second / 3600.0
    profile = sch.weekend if local.weekday() >= 5 else sch.weekday
    for a, b, v in profile:
        if a <= hour < b:
            return v
    raise AssertionError("unreachable: profile covers [0, 24)")  # pragma: no cover


def schedule_series(sch, start, step, n):
    start = _as_utc(start)
    delta = timedelta(minutes=step)
    values = [sample_schedule(sch, start + i * delta) for i in range(n)]
    return TimeSeries(start, step, values, sch.unit)


def office_occupancy(persons=2.0, work_start=8.0, work_end=19.0, utc_offset_hours=0.0):
    """Constant head-count during weekday working hours, empty otherwise."""
    return Schedule(
        weekday=[(0, work_start, 0.0), (work_start, work_end, persons), (work_end, 24, 0.0)],
        weekend=[(0, 24, 0.0)],
        utc_offset_hours=utc_offset_hours,
        unit=Unit.PERSONS,
    )


def setpoint_schedule(work, off, work_start=8.0, work_end=19.0, utc_offset_hours=0.0):
    return Schedule(
        weekday=[(0, work_start, off), (work_start, work_end, work), (work_end, 24, off)],
        weekend=[(0, 24, off)],
        utc_offset_hours=utc_offset_hours,
        unit=Unit.CELSIUS,
    )


def read_series_csv(path, unit):
    """Read a ``timestamp,value`` file; gaps and blank values are rejected."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptySeries(f"{path}: empty file")
        if [h.strip().lower() for h in header[:2]] != ["timestamp", "value"]:
            raise ValueError(f"{path}: expected header 'timestamp,value', got {header!r}")
        stamps, values = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2 or not row[1].strip():
                raise SignalGap(f"{path}:{lineno}: missing value")
            stamps.append(parse_timestamp(row[0]))
            try:
                values.append(float(row[1]))
            except ValueError:
                raise SignalGap(f"{path}:{lineno}: unparseable value {row[1]!r}") from None
    if not stamps:
        raise EmptySeries(f"{path}: no samples")
    if len(stamps) == 1:
        raise SignalGap(f"{path}: a single sample does not define a step")
    step = (stamps[1] - stamps[0]).total_seconds() / 60.0
    if step <= 0:
        raise SignalGap(f"{path}: timestamps are not increasing")
    for i in range(1, len(stamps)):
        if (stamps[i] - stamps[i - 1]).total_seconds() / 60.0 != step:
            raise SignalGap(f"{path}: irregular spacing at {format_timestamp(stamps[i])}")
    return TimeSeries(stamps[0], step, values, unit)


def write_series_csv(s, path, decimals=6):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", "value"])
        for ts, v in zip(s.timestamps, s.values):
            w.writerow([format_timestamp(ts), f"{v:.{decimals}f}"])
