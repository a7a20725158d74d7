"""Trace ingestion: turn recorded CI jobs into workload models and estimates.

Trace files are CSV with a fixed header::

    job_id,submit_time,duration_minutes,priority,deadline

``submit_time`` and ``deadline`` accept either epoch minutes (a number) or an
ISO-8601 timestamp; naive timestamps are treated as UTC. ``priority`` is
``critical`` or ``normal`` (empty means normal); ``deadline`` may be empty.
Records are sorted by submit time and the timeline is shifted so the first
job arrives at minute zero.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .des.workload import EmpiricalService, PRIORITY_NORMAL, TraceArrivals
from .errors import InsufficientDataError, TraceFormatError
from .forecast import estimate_rate_and_cv2

__all__ = ["TRACE_HEADER", "TraceRecord", "TraceIngest", "read_trace", "ingest_trace", "write_trace"]

TRACE_HEADER = ("job_id", "submit_time", "duration_minutes", "priority", "deadline")
_PRIORITIES = ("critical", "normal")


@dataclass(frozen=True)
class TraceRecord:
    job_id: str
    submit_minutes: float
    duration_minutes: float
    priority: str
    deadline_minutes: Optional[float]


@dataclass(frozen=True)
class TraceIngest:
    """Workload models and estimates extracted from a trace."""

    arrivals: TraceArrivals
    service: EmpiricalService
    arrival_rate: float  # jobs per minute
    ca2: float
    cs2: float
    mean_duration: float
    records: int


def _parse_time(value: str, field: str, index: int) -> float:
    """Epoch minutes (plain number) or ISO-8601; returns minutes."""
    try:
        return float(value)
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(value)
    except ValueError as exc:
        raise TraceFormatError(
            f"record {index}: cannot parse {field} {value!r} as minutes or ISO-8601"
        ) from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp() / 60.0


def read_trace(path) -> list[TraceRecord]:
    """Parse and validate a trace file; records come back sorted by submit time."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise TraceFormatError(f"cannot read trace file {path}: {exc}") from exc
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise TraceFormatError(f"{path} is empty; expected header {','.join(TRACE_HEADER)}")
    if tuple(h.strip() for h in header) != TRACE_HEADER:
        raise TraceFormatError(
            f"bad header {','.join(header)!r}; expected {','.join(TRACE_HEADER)}"
        )
    records = []
    for index, row in enumerate(reader):
        if not row:
            continue
        if len(row) != len(TRACE_HEADER):
            raise TraceFormatError(
                f"record {index}: expected {len(TRACE_HEADER)} fields, got {len(row)}"
            )
        job_id, submit, duration, priority, deadline = (f.strip() for f in row)
        submit_minutes = _parse_time(submit, "submit_time", index)
        try:
            duration_minutes = float(duration)
        except ValueError as exc:
            raise TraceFormatError(
                f"record {index}: cannot parse duration_minutes {duration!r}"
            ) from exc
        if duration_minutes <= 0:
            raise TraceFormatError(f"record {index}: duration must be positive")
        priority = priority or PRIORITY_NORMAL
        if priority not in _PRIORITIES:
            raise TraceFormatError(f"record {index}: unknown priority {priority!r}")
        deadline_minutes = _parse_time(deadline, "deadline", index) if deadline else None
        records.append(
            TraceRecord(
                job_id=job_id,
                submit_minutes=submit_minutes,
                duration_minutes=duration_minutes,
                priority=priority,
                deadline_minutes=deadline_minutes,
            )
        )
    records.sort(key=lambda r: r.submit_minutes)
    return records


def ingest_trace(path) -> TraceIngest:
    """Build replayable workload models plus rate/variability estimates.

    The arrival timestamps become a trace arrival process (with per-job
    durations, priorities, and deadlines attached for exact replay), the
    durations become an empirical service distribution, and the estimators
    report the arrival rate, Ca^2, and Cs^2 needed for the G/G/c analytics.

    Raises:
        InsufficientDataError: fewer than 2 records, or fewer than 3 for the
            inter-arrival Cv^2 (one gap leaves the unbiased estimator undefined).
    """
    records = read_trace(path)
    if len(records) < 2:
        raise InsufficientDataError(f"need at least 2 trace records, have {len(records)}")
    origin = records[0].submit_minutes
    timestamps = tuple(r.submit_minutes - origin for r in records)
    durations = tuple(r.duration_minutes for r in records)
    arrival_rate, ca2 = estimate_rate_and_cv2(timestamps, kind="timestamps")
    mean_duration, cs2 = estimate_rate_and_cv2(durations, kind="durations")
    arrivals = TraceArrivals(
        timestamps=timestamps,
        demands=durations,
        priorities=tuple(r.priority for r in records),
        deadlines=tuple(
            (r.deadline_minutes - origin) if r.deadline_minutes is not None else None
            for r in records
        ),
    )
    return TraceIngest(
        arrivals=arrivals,
        service=EmpiricalService(samples=durations),
        arrival_rate=arrival_rate,
        ca2=ca2,
        cs2=cs2,
        mean_duration=mean_duration,
        records=len(records),
    )


def write_trace(records, path) -> None:
    """Write records in the standard trace format (used by tests and exports)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for r in records:
            writer.writerow(
                [
                    r.job_id,
                    repr(r.submit_minutes),
                    repr(r.duration_minutes),
                    r.priority,
                    repr(r.deadline_minutes) if r.deadline_minutes is not None else "",
                ]
            )
