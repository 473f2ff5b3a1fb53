"""Subtitle document parsing and serialization (WebVTT and SRT).

Three output modes are supported:

* ``listing1-compat`` -- bare cue blocks with no ``WEBVTT`` header, matching
  the golden reference document byte for byte.
* ``webvtt-standard`` -- the same cue rendering behind a ``WEBVTT`` header;
  this is the default everywhere because real players require the header.
* ``srt`` -- 1-based numeric cue indices and comma millisecond separators.

Timestamps are rendered with half-up millisecond rounding so golden files
stay stable. Output is UTF-8 without BOM, LF line endings.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field

from dubkit.timeline import TimeSpan

MAX_TIMESTAMP_SECONDS = 360000.0  # 100 hours; keeps the hour field two digits

_ARROW_RE = re.compile(r"\s*-->\s*")
_VOICE_RE = re.compile(r"^<v ([^>]+)>")


class SubtitleMode(str, enum.Enum):
    LISTING1_COMPAT = "listing1-compat"
    WEBVTT_STANDARD = "webvtt-standard"
    SRT = "srt"


class SubtitleError(ValueError):
    """Base class for subtitle formatting and parsing failures."""


class TimestampError(SubtitleError):
    """Malformed or out-of-range timestamp. Carries the byte offset at fault."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class SubtitleParseError(SubtitleError):
    """Structural parse failure. Carries the 1-based line number at fault."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _normalize_cue_text(text: str) -> str:
    """Canonicalize cue text: LF newlines, no trailing whitespace per line,
    no leading/trailing blank lines."""
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    lines = [line.rstrip() for line in lines]
    while lines and not lines[0]:
        lines.pop(0)
    while lines and not lines[-1]:
        lines.pop()
    return "\n".join(lines)


@dataclass(frozen=True)
class SubtitleCue:
    """One timed text cue. ``speaker`` is an optional diarization label; it is
    serialized only in webvtt-standard mode (as a voice span)."""

    span: TimeSpan
    text: str
    speaker: str | None = None

    def __post_init__(self) -> None:
        normalized = _normalize_cue_text(self.text)
        if not normalized:
            raise SubtitleError("cue text must be non-empty")
        for line in normalized.split("\n"):
            if not line:
                raise SubtitleError("cue text cannot contain blank interior lines")
            if "-->" in line:
                raise SubtitleError("cue text cannot contain '-->'")
        object.__setattr__(self, "text", normalized)


@dataclass(frozen=True)
class SubtitleDocument:
    """An ordered collection of cues plus the mode it serializes in.

    Cues are sorted by (start, end) at construction; cues with an identical
    span and identical text are collapsed to one.
    """

    cues: tuple[SubtitleCue, ...] = field(default_factory=tuple)
    mode: SubtitleMode = SubtitleMode.WEBVTT_STANDARD

    def __post_init__(self) -> None:
        ordered = sorted(self.cues, key=lambda c: (c.span.start, c.span.end))
        seen: set[tuple[float, float, str]] = set()
        unique: list[SubtitleCue] = []
        for cue in ordered:
            key = (cue.span.start, cue.span.end, cue.text)
            if key in seen:
                continue
            seen.add(key)
            unique.append(cue)
        object.__setattr__(self, "cues", tuple(unique))
        object.__setattr__(self, "mode", SubtitleMode(self.mode))

    def with_cue_text(self, index: int, text: str) -> "SubtitleDocument":
        """Return a copy with cue ``index`` replaced by one carrying ``text``."""
        if not 0 <= index < len(self.cues):
            raise IndexError(f"cue index {index} out of range (0..{len(self.cues) - 1})")
        cues = list(self.cues)
        old = cues[index]
        cues[index] = SubtitleCue(span=old.span, text=text, speaker=old.speaker)
        return SubtitleDocument(cues=tuple(cues), mode=self.mode)


def format_timestamp(t: float, mode: SubtitleMode = SubtitleMode.WEBVTT_STANDARD) -> str:
    """Render seconds as a subtitle timestamp for the given mode.

    WebVTT modes emit ``MM:SS.mmm`` under one hour and ``HH:MM:SS.mmm``
    above; SRT always emits ``HH:MM:SS,mmm``. Rounding is half-up to the
    nearest millisecond, applied before the width decision so the boundary
    is consistent.
    """
    if t < 0:
        raise TimestampError(f"timestamp must be >= 0, got {t}")
    total_ms = math.floor(t * 1000.0 + 0.5)
    if total_ms >= MAX_TIMESTAMP_SECONDS * 1000:
        raise TimestampError(f"timestamp {t} exceeds the {MAX_TIMESTAMP_SECONDS} s range")
    ms = total_ms % 1000
    total_s = total_ms // 1000
    hh, rem = divmod(total_s, 3600)
    mm, ss = divmod(rem, 60)
    mode = SubtitleMode(mode)
    if mode is SubtitleMode.SRT:
        return f"{hh:02d}:{mm:02d}:{ss:02d},{ms:03d}"
    if hh == 0:
        return f"{mm:02d}:{ss:02d}.{ms:03d}"
    return f"{hh:02d}:{mm:02d}:{ss:02d}.{ms:03d}"


def parse_timestamp(s: str) -> float:
    """Parse ``MM:SS.mmm``, ``HH:MM:SS.mmm``, or the SRT comma variants.

    Fields are fixed-width (two digits, three for milliseconds); violations
    raise :class:`TimestampError` naming the byte offset.
    """

    def two_digits(pos: int, label: str) -> int:
        chunk = s[pos : pos + 2]
        if len(chunk) != 2 or not chunk.isdigit():
            raise TimestampError(f"expected two-digit {label}", pos)
        return int(chunk)

    def expect(pos: int, chars: str, label: str) -> str:
        if pos >= len(s) or s[pos] not in chars:
            raise TimestampError(f"expected {label}", pos)
        return s[pos]

    first = two_digits(0, "field")
    expect(2, ":", "':'")
    second = two_digits(3, "field")
    if len(s) > 5 and s[5] == ":":
        hours, minutes = first, second
        seconds = two_digits(6, "seconds")
        sep_pos = 8
    else:
        hours, minutes, seconds = 0, first, second
        sep_pos = 5
    expect(sep_pos, ".,", "'.' or ',' millisecond separator")
    ms_chunk = s[sep_pos + 1 : sep_pos + 4]
    if len(ms_chunk) != 3 or not ms_chunk.isdigit():
        raise TimestampError("expected three-digit milliseconds", sep_pos + 1)
    if len(s) > sep_pos + 4:
        raise TimestampError("trailing characters after timestamp", sep_pos + 4)
    if minutes > 59:
        raise TimestampError(f"minutes must be <= 59, got {minutes}", 0 if sep_pos == 5 else 3)
    if seconds > 59:
        raise TimestampError(f"seconds must be <= 59, got {seconds}", 3 if sep_pos == 5 else 6)
    total_ms = ((hours * 60 + minutes) * 60 + seconds) * 1000 + int(ms_chunk)
    return total_ms / 1000.0


def _cue_block(cue: SubtitleCue, mode: SubtitleMode) -> str:
    start = format_timestamp(cue.span.start, mode)
    end = format_timestamp(cue.span.end, mode)
    text = cue.text
    if mode is SubtitleMode.WEBVTT_STANDARD and cue.speaker:
        text = f"<v {cue.speaker}>{text}"
    return f"{start} --> {end}\n{text}"


def serialize(document: SubtitleDocument) -> str:
    """Render a document as text in its mode. Ends with a single LF."""
    mode = document.mode
    blocks: list[str] = []
    if mode is SubtitleMode.WEBVTT_STANDARD:
        blocks.append("WEBVTT")
    for i, cue in enumerate(document.cues):
        block = _cue_block(cue, mode)
        if mode is SubtitleMode.SRT:
            block = f"{i + 1}\n{block}"
        blocks.append(block)
    if not blocks:
        return ""
    return "\n\n".join(blocks) + "\n"


def _split_blocks(text: str) -> list[tuple[int, list[str]]]:
    """Split into blocks of non-blank lines, keeping 1-based line numbers."""
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    blocks: list[tuple[int, list[str]]] = []
    current: list[str] = []
    start_line = 1
    for i, raw in enumerate(lines, start=1):
        line = raw.rstrip()
        if line:
            if not current:
                start_line = i
            current.append(line)
        elif current:
            blocks.append((start_line, current))
            current = []
    if current:
        blocks.append((start_line, current))
    return blocks


def _parse_cue_block(start_line: int, lines: list[str], mode: SubtitleMode) -> SubtitleCue:
    idx = 0
    if "-->" not in lines[0]:
        if len(lines) > 1 and "-->" in lines[1]:
            idx = 1  # identifier (or SRT index) line; dropped on parse
        else:
            raise SubtitleParseError("expected a timestamp line", start_line)
    ts_line = lines[idx]
    parts = _ARROW_RE.split(ts_line)
    if len(parts) != 2:
        raise SubtitleParseError(f"malformed timestamp line {ts_line!r}", start_line + idx)
    try:
        start = parse_timestamp(parts[0].strip())
        end = parse_timestamp(parts[1].strip())
    except TimestampError as exc:
        raise SubtitleParseError(str(exc), start_line + idx) from exc
    if end <= start:
        raise SubtitleParseError(f"cue end {end} is not after start {start}", start_line + idx)
    text_lines = lines[idx + 1 :]
    if not text_lines:
        raise SubtitleParseError("cue has no text", start_line + idx)
    speaker = None
    if mode is not SubtitleMode.SRT:
        voice = _VOICE_RE.match(text_lines[0])
        if voice:
            speaker = voice.group(1)
            text_lines[0] = text_lines[0][voice.end() :]
    try:
        return SubtitleCue(span=TimeSpan(start, end), text="\n".join(text_lines), speaker=speaker)
    except (SubtitleError, ValueError) as exc:
        raise SubtitleParseError(str(exc), start_line + idx + 1) from exc


def parse(text: str, mode: SubtitleMode = SubtitleMode.WEBVTT_STANDARD) -> SubtitleDocument:
    """Parse subtitle text into a document. Inverse of :func:`serialize`.

    Tolerates CRLF line endings and trailing whitespace. Cue identifier and
    SRT index lines are accepted and dropped. Overlapping cues are preserved.
    """
    mode = SubtitleMode(mode)
    blocks = _split_blocks(text)
    if mode is SubtitleMode.WEBVTT_STANDARD:
        if not blocks or blocks[0][1][0] != "WEBVTT":
            raise SubtitleParseError("missing WEBVTT header", blocks[0][0] if blocks else 1)
        if len(blocks[0][1]) > 1:
            raise SubtitleParseError("expected blank line after WEBVTT header", blocks[0][0] + 1)
        blocks = blocks[1:]
    elif mode is SubtitleMode.LISTING1_COMPAT:
        if blocks and blocks[0][1] == ["WEBVTT"]:
            blocks = blocks[1:]  # tolerated, never emitted in this mode
    cues = [_parse_cue_block(line, lines, mode) for line, lines in blocks]
    return SubtitleDocument(cues=tuple(cues), mode=mode)
