"""Pure timeline algebra over speaker-labeled time segments.

Everything here is a pure function over immutable values: no I/O, no audio,
no model calls. Time is kept as real-valued seconds; millisecond rounding is
a serialization concern (see :mod:`dubkit.subtitles`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


class TimelineError(ValueError):
    """Raised for structurally invalid timeline input."""


@dataclass(frozen=True)
class TimeSpan:
    """A positive-length span ``[start, end)`` in seconds."""

    start: float
    end: float

    def __post_init__(self) -> None:
        if self.start < 0:
            raise TimelineError(f"span start must be >= 0, got {self.start}")
        if self.end <= self.start:
            raise TimelineError(
                f"span end must be > start, got ({self.start}, {self.end})"
            )

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class DiarizationSegment:
    """One ``(start, end, speaker)`` record from a diarization backend."""

    span: TimeSpan
    speaker: str

    def __post_init__(self) -> None:
        if not self.speaker:
            raise TimelineError("speaker label must be non-empty")

    @property
    def start(self) -> float:
        return self.span.start

    @property
    def end(self) -> float:
        return self.span.end


@dataclass(frozen=True)
class CropWindow:
    """One planned audio crop. Windows in a plan are sorted and disjoint."""

    index: int
    span: TimeSpan
    speaker: str


def segment(start: float, end: float, speaker: str) -> DiarizationSegment:
    """Shorthand constructor used throughout dubkit and its tests."""
    return DiarizationSegment(span=TimeSpan(start, end), speaker=speaker)


def validate_segments(
    segments: Iterable[tuple[float, float, str] | DiarizationSegment],
) -> list[DiarizationSegment]:
    """Normalize raw backend output into sorted, positive-length segments.

    Accepts either ``DiarizationSegment`` values or raw ``(start, end,
    speaker)`` tuples. Zero- and negative-length spans are dropped; a
    negative start is rejected outright since it signals a corrupt backend
    response rather than a benign boundary artifact. Output order is
    ``(start, end, speaker)`` regardless of input order.
    """
    out: list[DiarizationSegment] = []
    for item in segments:
        if isinstance(item, DiarizationSegment):
            start, end, speaker = item.start, item.end, item.speaker
        else:
            start, end, speaker = item
        if start < 0:
            raise TimelineError(
                f"segment start {start} is negative: corrupt diarization output"
            )
        if not speaker:
            raise TimelineError("segment speaker label must be non-empty")
        if end <= start:
            continue
        out.append(segment(float(start), float(end), speaker))
    out.sort(key=lambda s: (s.start, s.end, s.speaker))
    return out


def merge_adjacent(
    segments: Sequence[DiarizationSegment], gap_tolerance: float
) -> list[DiarizationSegment]:
    """Fuse consecutive same-speaker segments separated by at most the tolerance.

    Expects validated, sorted input. A speaker change always breaks the run;
    overlapping same-speaker segments (negative gap) are fused as well. Each
    fused span runs from the earliest start to the latest end of its run, so
    every input span stays covered by a same-speaker output span.
    """
    if gap_tolerance < 0:
        raise TimelineError(f"gap_tolerance must be >= 0, got {gap_tolerance}")
    merged: list[DiarizationSegment] = []
    for seg in segments:
        if merged:
            prev = merged[-1]
            gap = seg.start - prev.end
            if seg.speaker == prev.speaker and gap <= gap_tolerance:
                fused_end = max(prev.end, seg.end)
                merged[-1] = segment(prev.start, fused_end, prev.speaker)
                continue
        merged.append(seg)
    return merged


def plan_crops(
    segments: Iterable[DiarizationSegment], audio_duration: float
) -> list[CropWindow]:
    """Turn segments into a sorted, disjoint plan of crop windows.

    Each segment is clamped to ``[0, audio_duration]``; segments that fall
    entirely outside the audio are dropped. When two segments overlap, the
    later window starts where the earlier one ends (and vanishes if nothing
    remains), so every surviving window is contained in its source segment.
    """
    if audio_duration <= 0:
        raise TimelineError(f"audio_duration must be > 0, got {audio_duration}")
    ordered = sorted(segments, key=lambda s: (s.start, s.end, s.speaker))
    windows: list[CropWindow] = []
    cursor = 0.0
    for seg in ordered:
        start = max(seg.start, cursor)
        end = min(seg.end, audio_duration)
        if end <= start:
            continue
        windows.append(
            CropWindow(index=len(windows), span=TimeSpan(start, end), speaker=seg.speaker)
        )
        cursor = end
    return windows


def total_duration(segments: Iterable[DiarizationSegment]) -> float:
    """Sum of segment durations (not the union)."""
    return sum(s.span.duration for s in segments)
