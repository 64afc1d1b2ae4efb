"""Time segmentation of a crop stream and the bounded memory buffer."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .stream_model import CropRecord

MS_PER_MINUTE = 60_000


def segment_length_ms(tau_minutes: float) -> int:
    if not tau_minutes > 0:
        raise ValueError(f"tau must be positive, got {tau_minutes}")
    return int(round(tau_minutes * MS_PER_MINUTE))


def assign_segment(timestamp_ms: int, tau_minutes: float) -> int:
    """Index of the half-open segment ``[t*tau, (t+1)*tau)`` containing ``timestamp_ms``."""
    if timestamp_ms < 0:
        raise ValueError(f"timestamp must be >= 0, got {timestamp_ms}")
    return int(timestamp_ms // segment_length_ms(tau_minutes))


@dataclass(frozen=True)
class TimeSegment:
    index: int
    start_ms: int
    end_ms: int
    partial: bool = False

    def contains(self, timestamp_ms: int) -> bool:
        return self.start_ms <= timestamp_ms < self.end_ms


def make_segments(duration_ms: int, tau_minutes: float) -> list[TimeSegment]:
    """Tile ``[0, duration_ms)`` with segments of length tau.

    A trailing remainder shorter than tau becomes a final segment flagged
    ``partial``; it keeps the nominal end so that the tiling has no gap.
    """
    length = segment_length_ms(tau_minutes)
    count = max(1, math.ceil(duration_ms / length)) if duration_ms > 0 else 0
    segs = []
    for t in range(count):
        start = t * length
        partial = start + length > duration_ms
        segs.append(TimeSegment(t, start, start + length, partial))
    return segs


def split_by_segment(records: Iterable[CropRecord], tau_minutes: float) -> dict[int, list[CropRecord]]:
    out: dict[int, list[CropRecord]] = defaultdict(list)
    for r in records:
        out[assign_segment(r.timestamp_ms, tau_minutes)].append(r)
    return dict(out)


class MemoryBuffer:
    """Records retained across segments, evicted once older than the retention window.

    The age of a record at segment ``t`` is measured from the end of segment ``t``
    (the moment its data is handed to selection). With ``retention_minutes == tau``
    the buffer degenerates to the current segment only.
    """

    def __init__(self, tau_minutes: float, retention_minutes: float = 60.0):
        if retention_minutes < 0:
            raise ValueError("retention_minutes must be >= 0")
        self.tau_minutes = tau_minutes
        self.retention_minutes = retention_minutes
        self._entries: list[tuple[int, CropRecord]] = []
        self._latest_segment = -1

    def __len__(self) -> int:
        return len(self._entries)

    def add_segment(self, t: int, records: Sequence[CropRecord]) -> None:
        """Hand over the records collected during segment ``t``."""
        if t <= self._latest_segment:
            raise ValueError(f"segment {t} already added (latest is {self._latest_segment})")
        self._entries.extend((t, r) for r in records)
        self._latest_segment = t

    def _current_time_ms(self, t: int) -> int:
        return (t + 1) * segment_length_ms(self.tau_minutes)

    def _within_retention(self, rec: CropRecord, t: int) -> bool:
        age = self._current_time_ms(t) - rec.timestamp_ms
        return age <= self.retention_minutes * MS_PER_MINUTE

    def evict(self, t: int) -> int:
        """Drop records too old to be used at segment ``t``; returns how many were dropped."""
        before = len(self._entries)
        self._entries = [(s, r) for s, r in self._entries if self._within_retention(r, t)]
        return before - len(self._entries)

    def view(self, t: int) -> list[CropRecord]:
        return memory_view(self, t)

    def segments(self) -> list[int]:
        return sorted({s for s, _ in self._entries})

    def entries(self) -> list[tuple[int, CropRecord]]:
        return list(self._entries)


def memory_view(buffer: MemoryBuffer, t: int) -> list[CropRecord]:
    """Records usable at segment ``t``: from segments ``<= t`` and within retention."""
    return [r for s, r in buffer.entries() if s <= t and buffer._within_retention(r, t)]


def standard_view(segmented: dict[int, list[CropRecord]], t: int) -> list[CropRecord]:
    return list(segmented.get(t, []))
