"""
Immutable failure-data containers shared by every model family
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import InsufficientData, ValidationError

PROBABILITY_TOLERANCE = 1e-9


def _readonly(values) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    array.flags.writeable = False
    return array


def _is_count(value) -> bool:
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


class LogKind(str, Enum):
    EVENT_TIMES = "event_times"
    GROUPED_COUNTS = "grouped"


@dataclass(frozen=True)
class FailureLog:
    """Inter-failure intervals (EventTimes) or per-bin counts (GroupedCounts) over [0, total_time]"""
    kind: LogKind
    total_time: float
    intervals: Tuple[float, ...] = ()
    bins: Tuple[Tuple[float, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", LogKind(self.kind))
        object.__setattr__(self, "intervals", tuple(float(t) for t in self.intervals))
        object.__setattr__(self, "bins", tuple((float(d), c) for d, c in self.bins))
        object.__setattr__(self, "total_time", float(self.total_time))

        if not math.isfinite(self.total_time) or self.total_time < 0:
            raise ValidationError(f"must be a finite nonnegative time, got {self.total_time}", field="total_time")

        if self.kind is LogKind.EVENT_TIMES:
            if self.bins:
                raise ValidationError("event-times log cannot carry bins", field="bins")
            for row, interval in enumerate(self.intervals, start=1):
                if not math.isfinite(interval) or interval <= 0:
                    raise ValidationError(f"interval must be positive, got {interval}", row=row, field="interval")
            elapsed = math.fsum(self.intervals)
            if self.total_time < elapsed * (1 - 1e-12):
                raise ValidationError(
                    f"total_time {self.total_time} is shorter than the summed intervals {elapsed}",
                    field="total_time",
                )
        else:
            if self.intervals:
                raise ValidationError("grouped log cannot carry intervals", field="intervals")
            for row, (duration, count) in enumerate(self.bins, start=1):
                if not math.isfinite(duration) or duration <= 0:
                    raise ValidationError(f"duration must be positive, got {duration}", row=row, field="duration")
                if not _is_count(count) or count < 0:
                    raise ValidationError(f"count must be a nonnegative integer, got {count!r}", row=row, field="count")
            span = math.fsum(d for d, _ in self.bins)
            if not math.isclose(span, self.total_time, rel_tol=1e-9, abs_tol=1e-12):
                raise ValidationError(
                    f"total_time {self.total_time} differs from the summed bin durations {span}",
                    field="total_time",
                )

        if self.total_time == 0 and (self.intervals or self.bins):
            raise ValidationError("nonempty log needs a positive total_time", field="total_time")

    @classmethod
    def from_intervals(cls, intervals: Iterable[float], total_time: Optional[float] = None) -> "FailureLog":
        intervals = tuple(float(t) for t in intervals)
        if total_time is None:
            total_time = math.fsum(intervals)
        return cls(kind=LogKind.EVENT_TIMES, total_time=total_time, intervals=intervals)

    @classmethod
    def from_bins(cls, bins: Iterable[Tuple[float, int]]) -> "FailureLog":
        bins = tuple((float(d), c) for d, c in bins)
        return cls(kind=LogKind.GROUPED_COUNTS, total_time=math.fsum(d for d, _ in bins), bins=bins)

    @property
    def is_grouped(self) -> bool:
        return self.kind is LogKind.GROUPED_COUNTS

    @property
    def n_events(self) -> int:
        if self.is_grouped:
            return int(sum(c for _, c in self.bins))
        return len(self.intervals)

    @property
    def n_observations(self) -> int:
        """Data points a likelihood sums over: events, or bins"""
        return len(self.bins) if self.is_grouped else len(self.intervals)

    @cached_property
    def interval_array(self) -> np.ndarray:
        return _readonly(self.intervals)

    @cached_property
    def event_times(self) -> np.ndarray:
        return _readonly(np.cumsum(self.intervals))

    @cached_property
    def durations(self) -> np.ndarray:
        return _readonly([d for d, _ in self.bins])

    @cached_property
    def counts(self) -> np.ndarray:
        return _readonly([c for _, c in self.bins])

    @cached_property
    def boundaries(self) -> np.ndarray:
        """Bin edges t_0 = 0, t_1, ..., t_J"""
        return _readonly(np.concatenate([[0.0], np.cumsum(self.durations)]))

    def truncated(self, k: int) -> "FailureLog":
        """First k intervals (horizon = k-th event time) or first k bins"""
        if self.is_grouped:
            return FailureLog.from_bins(self.bins[:k])
        return FailureLog.from_intervals(self.intervals[:k])

    def require_events(self, minimum: int, what: str = "fitting") -> None:
        if self.n_events < minimum:
            raise InsufficientData(f"{what} needs at least {minimum} recorded errors, got {self.n_events}")


@dataclass(frozen=True)
class SeedingTally:
    """Seeded-error tallies: S seeded, v of them found, n own errors found"""
    seeded: int
    seeded_found: int
    own_found: int
    total_fo: Optional[int] = None
    sampled_fo: Optional[int] = None
    control_pct: Optional[float] = None

    def __post_init__(self):
        for name in ("seeded", "seeded_found", "own_found"):
            value = getattr(self, name)
            if not _is_count(value) or value < 0:
                raise ValidationError(f"must be a nonnegative integer, got {value!r}", field=name)
        if self.seeded_found > self.seeded:
            raise ValidationError("cannot exceed the number of seeded errors", field="seeded_found")
        for name in ("total_fo", "sampled_fo"):
            value = getattr(self, name)
            if value is not None and (not _is_count(value) or value < 1):
                raise ValidationError(f"must be a positive integer, got {value!r}", field=name)
        if self.total_fo is not None and self.sampled_fo is not None and self.sampled_fo > self.total_fo:
            raise ValidationError("cannot exceed total_fo", field="sampled_fo")
        if self.control_pct is not None and not (0 < self.control_pct <= 100):
            raise ValidationError(f"must lie in (0, 100], got {self.control_pct}", field="control_pct")

    @property
    def has_functional_objects(self) -> bool:
        return None not in (self.total_fo, self.sampled_fo, self.control_pct)


@dataclass(frozen=True)
class GroupTally:
    """Findings of two independent examiner groups and their overlap"""
    group1_found: int
    group2_found: int
    common_found: int

    def __post_init__(self):
        for name in ("group1_found", "group2_found", "common_found"):
            value = getattr(self, name)
            if not _is_count(value) or value < 0:
                raise ValidationError(f"must be a nonnegative integer, got {value!r}", field=name)
        if self.common_found > min(self.group1_found, self.group2_found):
            raise ValidationError("cannot exceed either group's findings", field="common_found")


@dataclass(frozen=True)
class PartitionTrace:
    """Per-detection part flags: 0 = found in Part 1, 1 = found in Part 2"""
    flags: Tuple[int, ...]

    def __post_init__(self):
        flags = tuple(int(f) for f in self.flags)
        for row, flag in enumerate(flags, start=1):
            if flag not in (0, 1):
                raise ValidationError(f"flag must be 0 or 1, got {flag}", row=row, field="flags")
        object.__setattr__(self, "flags", flags)

    @property
    def found_part1(self) -> int:
        return len(self.flags) - sum(self.flags)

    @property
    def found_part2(self) -> int:
        return sum(self.flags)


@dataclass(frozen=True)
class DomainTally:
    prob: float
    runs: int
    failures: int


@dataclass(frozen=True)
class RunProfile:
    """Input-domain partition with occurrence probabilities and per-domain run/failure tallies"""
    domains: Tuple[DomainTally, ...]
    run_probs: Optional[Tuple[Tuple[float, ...], ...]] = None

    def __post_init__(self):
        domains = tuple(d if isinstance(d, DomainTally) else DomainTally(*d) for d in self.domains)
        object.__setattr__(self, "domains", domains)
        if not domains:
            raise ValidationError("profile needs at least one domain", field="domains")
        for row, d in enumerate(domains, start=1):
            if not (0.0 <= d.prob <= 1.0):
                raise ValidationError(f"probability must lie in [0, 1], got {d.prob}", row=row, field="prob")
            if not _is_count(d.runs) or d.runs < 1:
                raise ValidationError(f"runs must be a positive integer, got {d.runs!r}", row=row, field="runs")
            if not _is_count(d.failures) or not (0 <= d.failures <= d.runs):
                raise ValidationError(f"failures must lie in [0, runs], got {d.failures!r}", row=row, field="failures")
        total = math.fsum(d.prob for d in domains)
        if abs(total - 1.0) > PROBABILITY_TOLERANCE:
            raise ValidationError(f"domain probabilities sum to {total}, not 1", field="prob")

        if self.run_probs is not None:
            matrix = tuple(tuple(float(p) for p in row) for row in self.run_probs)
            object.__setattr__(self, "run_probs", matrix)
            for j, row in enumerate(matrix, start=1):
                if len(row) != len(domains):
                    raise ValidationError(f"expected {len(domains)} probabilities, got {len(row)}", row=j, field="run_probs")
                if any(p < 0 or p > 1 for p in row) or abs(math.fsum(row) - 1.0) > PROBABILITY_TOLERANCE:
                    raise ValidationError("per-run probabilities must lie in [0, 1] and sum to 1", row=j, field="run_probs")

    @property
    def probs(self) -> np.ndarray:
        return np.array([d.prob for d in self.domains])

    @property
    def runs(self) -> np.ndarray:
        return np.array([d.runs for d in self.domains], dtype=float)

    @property
    def failures(self) -> np.ndarray:
        return np.array([d.failures for d in self.domains], dtype=float)


@dataclass(frozen=True)
class UpgradeStage:
    k1: float
    k2: float
    runs: int
    successes: int


@dataclass(frozen=True)
class UpgradeHistory:
    """Per-upgrade modification metrics (debugging k1, upgrade k2) and run outcomes"""
    stages: Tuple[UpgradeStage, ...] = field(default_factory=tuple)

    def __post_init__(self):
        stages = tuple(s if isinstance(s, UpgradeStage) else UpgradeStage(*s) for s in self.stages)
        object.__setattr__(self, "stages", stages)
        for row, s in enumerate(stages, start=1):
            for name in ("k1", "k2"):
                value = getattr(s, name)
                if not math.isfinite(value) or value < 0:
                    raise ValidationError(f"metric must be a finite nonnegative real, got {value}", row=row, field=name)
            if not _is_count(s.runs) or s.runs < 1:
                raise ValidationError(f"runs must be a positive integer, got {s.runs!r}", row=row, field="runs")
            if not _is_count(s.successes) or not (0 <= s.successes <= s.runs):
                raise ValidationError(f"successes must lie in [0, runs], got {s.successes!r}", row=row, field="successes")

    def __len__(self) -> int:
        return len(self.stages)

    @property
    def metrics(self) -> np.ndarray:
        """Stage-by-metric matrix, shape (stages, 2)"""
        return np.array([[s.k1, s.k2] for s in self.stages], dtype=float).reshape(-1, 2)

    @property
    def runs(self) -> np.ndarray:
        return np.array([s.runs for s in self.stages])

    @property
    def successes(self) -> np.ndarray:
        return np.array([s.successes for s in self.stages])


def validate_probabilities(values: Sequence[float], name: str) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    for row, q in enumerate(array, start=1):
        if not math.isfinite(q) or q < 0 or q > 1:
            raise ValidationError(f"must lie in [0, 1], got {q}", row=row, field=name)
    return array
