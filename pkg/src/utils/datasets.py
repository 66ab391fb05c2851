"""
File ingestion and export for failure logs, run profiles, upgrade histories and TRW samples
"""

import csv
import io
import json
import logging
import math
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Sequence, Tuple, Union

import numpy as np

from ..models.errors import ParseError, ValidationError
from ..models.estimate_models import TRW_FACTOR_NAMES, TrwFactors
from ..models.failure_data import (
    DomainTally,
    FailureLog,
    LogKind,
    RunProfile,
    UpgradeHistory,
    UpgradeStage,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
STDIO = "-"

EVENT_HEADER = ["interval"]
GROUPED_HEADER = ["duration", "count"]
PROFILE_HEADER = ["prob", "runs", "failures"]
HISTORY_HEADER = ["k1", "k2", "runs", "successes"]
TRW_HEADER = list(TRW_FACTOR_NAMES) + ["errors"]
TOTAL_TIME_MARKER = "#total_time"


def read_text(path: PathLike) -> str:
    if str(path) == STDIO:
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


@contextmanager
def _open_for_write(path: PathLike) -> Iterator[io.TextIOBase]:
    if str(path) == STDIO:
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            yield handle


def _rows(text: str) -> List[Tuple[int, List[str]]]:
    """Non-blank CSV rows with their 1-based line numbers"""
    rows = []
    for line_no, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        cells = [cell.strip() for cell in row]
        if any(cells):
            rows.append((line_no, cells))
    return rows


def _parse_float(cell: str, row: int, field: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ParseError(f"not a number: {cell!r}", row=row, field=field) from None
    if not math.isfinite(value):
        raise ParseError(f"not a finite number: {cell!r}", row=row, field=field)
    return value


def _parse_int(cell: str, row: int, field: str) -> int:
    try:
        return int(cell)
    except ValueError:
        raise ParseError(f"not an integer: {cell!r}", row=row, field=field) from None


def _expect_header(rows, expected: Sequence[str], what: str) -> None:
    if not rows:
        raise ParseError(f"empty {what} file")
    line_no, header = rows[0]
    if [h.lower() for h in header] != list(expected):
        raise ParseError(f"expected header {','.join(expected)}, got {','.join(header)}", row=line_no)


def _check_width(cells: List[str], width: int, row: int) -> None:
    if len(cells) != width:
        raise ParseError(f"expected {width} columns, got {len(cells)}", row=row)


def _load_event_csv(rows) -> FailureLog:
    intervals, total_time = [], None
    for line_no, cells in rows[1:]:
        if cells[0].lower() == TOTAL_TIME_MARKER:
            _check_width(cells, 2, line_no)
            total_time = _parse_float(cells[1], line_no, "total_time")
            continue
        if total_time is not None:
            raise ParseError("the #total_time row must be the last row", row=line_no)
        _check_width(cells, 1, line_no)
        value = _parse_float(cells[0], line_no, "interval")
        if value <= 0:
            raise ValidationError(f"interval must be positive, got {value}", row=line_no, field="interval")
        intervals.append(value)
    return FailureLog.from_intervals(intervals, total_time)


def _load_grouped_csv(rows) -> FailureLog:
    bins = []
    for line_no, cells in rows[1:]:
        _check_width(cells, 2, line_no)
        duration = _parse_float(cells[0], line_no, "duration")
        count = _parse_int(cells[1], line_no, "count")
        if duration <= 0:
            raise ValidationError(f"duration must be positive, got {duration}", row=line_no, field="duration")
        if count < 0:
            raise ValidationError(f"count must be nonnegative, got {count}", row=line_no, field="count")
        bins.append((duration, count))
    return FailureLog.from_bins(bins)


def _load_json(text: str) -> FailureLog:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", row=exc.lineno) from None
    if not isinstance(data, dict):
        raise ParseError("expected a JSON object")
    try:
        kind = LogKind(data.get("kind"))
    except ValueError:
        raise ParseError(f"unknown kind {data.get('kind')!r}", field="kind") from None

    if kind is LogKind.EVENT_TIMES:
        raw = data.get("intervals")
        if not isinstance(raw, list):
            raise ParseError("expected a list", field="intervals")
        intervals = []
        for row, value in enumerate(raw, start=1):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ParseError(f"not a number: {value!r}", row=row, field="intervals")
            intervals.append(float(value))
        total_time = data.get("total_time")
        if total_time is not None and (isinstance(total_time, bool) or not isinstance(total_time, (int, float))):
            raise ParseError(f"not a number: {total_time!r}", field="total_time")
        return FailureLog.from_intervals(intervals, total_time)

    raw = data.get("bins")
    if not isinstance(raw, list):
        raise ParseError("expected a list", field="bins")
    bins = []
    for row, pair in enumerate(raw, start=1):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ParseError(f"expected [duration, count], got {pair!r}", row=row, field="bins")
        duration, count = pair
        if isinstance(duration, bool) or not isinstance(duration, (int, float)):
            raise ParseError(f"not a number: {duration!r}", row=row, field="duration")
        if isinstance(count, bool) or not isinstance(count, int):
            raise ParseError(f"not an integer: {count!r}", row=row, field="count")
        bins.append((float(duration), count))
    log = FailureLog.from_bins(bins)
    total_time = data.get("total_time")
    if total_time is not None and (isinstance(total_time, bool) or not isinstance(total_time, (int, float))):
        raise ParseError(f"not a number: {total_time!r}", field="total_time")
    if total_time is not None and not math.isclose(float(total_time), log.total_time, rel_tol=1e-9, abs_tol=1e-12):
        raise ValidationError(
            f"total_time {total_time} differs from the summed bin durations {log.total_time}", field="total_time"
        )
    return log


def load_failure_log(path: PathLike, format: str = "csv") -> FailureLog:
    """Read a failure log; `path` may be "-" for standard input"""
    text = read_text(path)
    if format == "json":
        log = _load_json(text)
    elif format == "csv":
        rows = _rows(text)
        if not rows:
            raise ParseError("empty failure-log file")
        header = [h.lower() for h in rows[0][1]]
        if header == EVENT_HEADER:
            log = _load_event_csv(rows)
        elif header == GROUPED_HEADER:
            log = _load_grouped_csv(rows)
        else:
            raise ParseError(
                f"expected header 'interval' or 'duration,count', got {','.join(rows[0][1])}", row=rows[0][0]
            )
    else:
        raise ValueError(f"unsupported format {format!r}; use csv or json")
    logger.debug("loaded %s log: %d events, horizon %g", log.kind.value, log.n_events, log.total_time)
    return log


def write_failure_log(log: FailureLog, path: PathLike, format: str = "csv") -> None:
    """Inverse of load_failure_log; floats are written with repr so values survive the round trip"""
    with _open_for_write(path) as handle:
        if format == "json":
            data = {"kind": log.kind.value, "total_time": log.total_time}
            if log.is_grouped:
                data["bins"] = [[d, c] for d, c in log.bins]
            else:
                data["intervals"] = list(log.intervals)
            handle.write(json.dumps(data, indent=2) + "\n")
        elif format == "csv":
            writer = csv.writer(handle, lineterminator="\n")
            if log.is_grouped:
                writer.writerow(GROUPED_HEADER)
                writer.writerows([repr(d), c] for d, c in log.bins)
            else:
                writer.writerow(EVENT_HEADER)
                writer.writerows([repr(t)] for t in log.intervals)
                writer.writerow([TOTAL_TIME_MARKER, repr(log.total_time)])
        else:
            raise ValueError(f"unsupported format {format!r}; use csv or json")


def bin_events(log: FailureLog, edges: Sequence[float]) -> FailureLog:
    """Count the events of an EventTimes log into the bins (edges[j-1], edges[j]]"""
    if log.is_grouped:
        raise ValidationError("log is already grouped", field="kind")
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2 or edges[0] != 0.0 or np.any(np.diff(edges) <= 0):
        raise ValidationError("edges must start at 0 and increase strictly", field="edges")
    times = log.event_times
    if times.size and times[-1] > edges[-1]:
        raise ValidationError("events fall beyond the last edge", field="edges")
    cumulative = np.searchsorted(times, edges, side="right")
    counts = np.diff(cumulative)
    return FailureLog.from_bins(zip(np.diff(edges).tolist(), [int(c) for c in counts]))


def load_run_profile(path: PathLike) -> RunProfile:
    rows = _rows(read_text(path))
    _expect_header(rows, PROFILE_HEADER, "run profile")
    domains = []
    for line_no, cells in rows[1:]:
        _check_width(cells, 3, line_no)
        domains.append(DomainTally(
            prob=_parse_float(cells[0], line_no, "prob"),
            runs=_parse_int(cells[1], line_no, "runs"),
            failures=_parse_int(cells[2], line_no, "failures"),
        ))
    return RunProfile(domains=tuple(domains))


def load_upgrade_history(path: PathLike) -> UpgradeHistory:
    rows = _rows(read_text(path))
    _expect_header(rows, HISTORY_HEADER, "upgrade history")
    stages = []
    for line_no, cells in rows[1:]:
        _check_width(cells, 4, line_no)
        stages.append(UpgradeStage(
            k1=_parse_float(cells[0], line_no, "k1"),
            k2=_parse_float(cells[1], line_no, "k2"),
            runs=_parse_int(cells[2], line_no, "runs"),
            successes=_parse_int(cells[3], line_no, "successes"),
        ))
    return UpgradeHistory(stages=tuple(stages))


def load_trw_samples(path: PathLike) -> List[Tuple[TrwFactors, float]]:
    rows = _rows(read_text(path))
    _expect_header(rows, TRW_HEADER, "TRW sample")
    samples = []
    for line_no, cells in rows[1:]:
        _check_width(cells, len(TRW_HEADER), line_no)
        values = [_parse_float(cell, line_no, name) for cell, name in zip(cells, TRW_HEADER)]
        if values[-1] < 0:
            raise ValidationError(f"observed errors must be nonnegative, got {values[-1]}", row=line_no, field="errors")
        samples.append((TrwFactors(*values[:-1]), values[-1]))
    return samples
