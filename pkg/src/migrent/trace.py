"""CPU-utilization time series: parsing, smoothing, peaks, and integrals.

A trace is a strictly increasing sequence of POSIX timestamps (UTC) with a
utilization fraction in [0, 1] at each sample. Between samples the signal
is treated as piecewise linear, so integrals use the trapezoid rule on the
irregular grid.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import InsufficientDataError, TraceError

TRACE_COLUMNS = ("timestamp", "cpu_utilization_percent")

DEFAULT_WINDOW_SECONDS = 300.0
DEFAULT_PERCENTILE = 95.0
DEFAULT_MIN_DAYS = 7

_UTC = dt.timezone.utc
_SECONDS_PER_DAY = 86400.0
_EPOCH_ORDINAL = dt.date(1970, 1, 1).toordinal()

# numpy 2 renamed trapz; fall back for older installs
_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class UtilizationTrace:
    """A machine's utilization samples as parallel read-only float arrays.

    ``times`` holds POSIX seconds (UTC) and must be strictly increasing;
    ``values`` holds utilization fractions in [0, 1].
    """

    machine_id: str
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.ascontiguousarray(self.times, dtype=np.float64)
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.ndim != 1 or times.shape != values.shape:
            raise TraceError("times and values must be 1-d arrays of equal length")
        if times.size < 2:
            raise TraceError(f"a trace needs at least 2 samples, got {times.size}")
        if not np.all(np.isfinite(times)):
            raise TraceError("timestamps must be finite")
        if not np.all(np.diff(times) > 0):
            raise TraceError("timestamps must be strictly increasing")
        # NaN fails both comparisons, so this also rejects non-finite values
        if not (np.all(values >= 0.0) and np.all(values <= 1.0)):
            raise TraceError("utilization values must lie in [0, 1]")
        times.setflags(write=False)
        values.setflags(write=False)

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def duration_seconds(self) -> float:
        return float(self.times[-1] - self.times[0])


@dataclass(frozen=True)
class DailyMaxima:
    """Per-UTC-day maxima of a (usually smoothed) utilization trace."""

    dates: tuple[dt.date, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if len(self.dates) != values.size:
            raise ValueError("dates and values must have equal length")
        values.setflags(write=False)

    def __len__(self) -> int:
        return int(self.values.size)


def parse_timestamp(text: str) -> float:
    """ISO-8601 string to POSIX seconds. Accepts 'Z'; naive means UTC."""
    cleaned = text.strip()
    if cleaned.endswith(("Z", "z")):
        cleaned = cleaned[:-1] + "+00:00"
    moment = dt.datetime.fromisoformat(cleaned)
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=_UTC)
    return moment.timestamp()


def format_timestamp(posix_seconds: float) -> str:
    """POSIX seconds to the ISO-8601 form used in trace files."""
    moment = dt.datetime.fromtimestamp(posix_seconds, tz=_UTC)
    if moment.microsecond:
        return moment.strftime("%Y-%m-%dT%H:%M:%S.%f").rstrip("0") + "Z"
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_trace(source, machine_id: str | None = None) -> UtilizationTrace:
    """Parse a trace CSV (timestamp, cpu_utilization_percent) into a trace.

    ``source`` may be a path or an open text stream. Percent values must lie
    in [0, 100] and are converted to fractions. All errors name the 1-based
    line they were found on.
    """
    if hasattr(source, "read"):
        return _parse_trace_stream(source, machine_id or "trace")
    path = Path(source)
    try:
        stream = path.open("r", encoding="utf-8", newline="")
    except OSError as exc:
        raise TraceError(f"cannot read trace {path}: {exc}") from exc
    with stream:
        return _parse_trace_stream(stream, machine_id or path.stem)


def _parse_trace_stream(stream, machine_id: str) -> UtilizationTrace:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise TraceError("trace file is empty") from None
    if tuple(h.strip() for h in header) != TRACE_COLUMNS:
        raise TraceError(
            f"expected header {','.join(TRACE_COLUMNS)!r}, got {','.join(header)!r}", line=1
        )

    times: list[float] = []
    values: list[float] = []
    prev = -math.inf
    for line, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 2:
            raise TraceError(f"expected 2 fields, got {len(row)}", line=line)
        try:
            stamp = parse_timestamp(row[0])
        except ValueError:
            raise TraceError(f"bad timestamp {row[0]!r}", line=line) from None
        try:
            percent = float(row[1])
        except ValueError:
            raise TraceError(f"bad utilization {row[1]!r}", line=line) from None
        if math.isnan(percent) or not 0.0 <= percent <= 100.0:
            raise TraceError(
                f"utilization must be in [0, 100] percent, got {row[1]}", line=line
            )
        if stamp <= prev:
            raise TraceError(
                f"timestamp {row[0]} is not after the previous sample", line=line
            )
        prev = stamp
        times.append(stamp)
        values.append(percent / 100.0)

    if len(times) < 2:
        raise TraceError(f"a trace needs at least 2 data rows, got {len(times)}")
    return UtilizationTrace(machine_id, np.array(times), np.array(values))


def write_trace(trace: UtilizationTrace, dest) -> None:
    """Write a trace back to CSV in the same format parse_trace reads."""
    if hasattr(dest, "write"):
        _write_trace_stream(trace, dest)
        return
    path = Path(dest)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as stream:
        _write_trace_stream(trace, stream)


def _write_trace_stream(trace: UtilizationTrace, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for stamp, value in zip(trace.times, trace.values):
        writer.writerow((format_timestamp(float(stamp)), f"{value * 100.0:.4f}"))


def smooth(trace: UtilizationTrace, window_seconds: float = DEFAULT_WINDOW_SECONDS) -> UtilizationTrace:
    """Trailing-window time-weighted average of the utilization signal.

    Each sample's value is held over the interval it terminates (the span
    since the previous sample), and output sample i is the mean of that
    step signal over ``[t_i - window, t_i]``. Before the first sample the
    signal is extended flat at the first value, so the earliest outputs are
    averaged against that level. Output timestamps equal input timestamps.
    """
    if not window_seconds > 0:
        raise ValueError(f"window_seconds must be positive, got {window_seconds}")
    t = trace.times
    u = trace.values
    window = float(window_seconds)

    # cumulative area of the step signal lets every window be evaluated as
    # "full segments inside the window" plus one partial segment at the
    # window start; the partial segment's value is u[js] (or the flat
    # extension value u[0] when the window starts before the trace).
    starts = t - window
    js = np.searchsorted(t, starts, side="right")  # first sample index with t > window start
    cum = np.concatenate(([0.0], np.cumsum(u[1:] * np.diff(t))))
    interior = cum[np.arange(t.size)] - cum[js]
    head = u[js] * (t[js] - starts)
    smoothed = np.clip((interior + head) / window, 0.0, 1.0)
    return UtilizationTrace(trace.machine_id, t.copy(), smoothed)


def daily_maxima(trace: UtilizationTrace) -> DailyMaxima:
    """Maximum sample value within each UTC calendar day the trace touches.

    Days without samples (gaps longer than a day) simply do not appear.
    """
    days = np.floor(trace.times / _SECONDS_PER_DAY).astype(np.int64)
    boundaries = np.flatnonzero(np.diff(days)) + 1
    starts = np.concatenate(([0], boundaries))
    maxima = np.maximum.reduceat(trace.values, starts)
    dates = tuple(dt.date.fromordinal(_EPOCH_ORDINAL + int(d)) for d in days[starts])
    return DailyMaxima(dates, maxima)


def nearest_rank(values, percentile: float) -> float:
    """Nearest-rank percentile: the smallest value with at least p% of mass.

    Rank is ceil(p * n / 100) in a 1-based ascending sort, so the result is
    always one of the input values.
    """
    if not 0.0 < percentile <= 100.0:
        raise ValueError(f"percentile must be in (0, 100], got {percentile}")
    data = np.sort(np.asarray(values, dtype=np.float64))
    if data.size == 0:
        raise ValueError("nearest_rank needs at least one value")
    rank = math.ceil(percentile * data.size / 100.0)
    rank = min(max(rank, 1), data.size)
    return float(data[rank - 1])


def peak_utilization(
    maxima: DailyMaxima,
    percentile: float = DEFAULT_PERCENTILE,
    min_days: int = DEFAULT_MIN_DAYS,
) -> float:
    """Percentile of the daily maxima, refusing traces with too few days."""
    if min_days < 1:
        raise ValueError(f"min_days must be at least 1, got {min_days}")
    available = len(maxima)
    if available < min_days:
        raise InsufficientDataError(
            f"peak estimation needs at least {min_days} days of data, trace covers {available}",
            required=min_days,
            available=available,
        )
    return nearest_rank(maxima.values, percentile)


def estimate_peak(
    trace: UtilizationTrace,
    window_seconds: float = DEFAULT_WINDOW_SECONDS,
    percentile: float = DEFAULT_PERCENTILE,
    min_days: int = DEFAULT_MIN_DAYS,
) -> float:
    """Full peak pipeline: smooth, take daily maxima, take their percentile."""
    return peak_utilization(daily_maxima(smooth(trace, window_seconds)), percentile, min_days)


def integrate(trace: UtilizationTrace, pointwise: Callable[[np.ndarray], np.ndarray] | None = None) -> float:
    """Trapezoid integral of ``pointwise(u(t))`` over the trace's time span.

    ``pointwise`` must accept a numpy array of utilizations and return an
    array of the same shape; ``None`` integrates the utilization itself.
    The result is in value-seconds.
    """
    y = trace.values if pointwise is None else np.asarray(pointwise(trace.values), dtype=np.float64)
    if y.shape != trace.values.shape:
        raise ValueError("pointwise function must preserve the array shape")
    return float(_trapezoid(y, trace.times))


def coverage_gaps(trace: UtilizationTrace, max_gap_seconds: float = 3600.0) -> list[tuple[float, float]]:
    """Sampling gaps longer than ``max_gap_seconds``, as (start, end) pairs."""
    if not max_gap_seconds > 0:
        raise ValueError(f"max_gap_seconds must be positive, got {max_gap_seconds}")
    deltas = np.diff(trace.times)
    where = np.flatnonzero(deltas > max_gap_seconds)
    return [(float(trace.times[i]), float(trace.times[i + 1])) for i in where]
