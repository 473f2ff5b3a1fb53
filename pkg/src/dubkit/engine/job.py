"""Job state machine, on-disk manifest, and progress event log.

One directory per job::

    <job dir>/
      manifest.json    # full job state, rewritten atomically per transition
      events.jsonl     # append-only progress events with monotone seq
      input/<video>    # the uploaded container, verbatim
      audio.wav        # extracted track
      crops/seg-NNNN.wav
      output.vtt / output.srt / output.<container>

``manifest.json`` is always written to a temp file and promoted with
``os.replace``, so a reader never observes a torn manifest — killing the
process at any point leaves either the previous or the next state.
"""

from __future__ import annotations

import dataclasses
import datetime as _dt
import enum
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from dubkit.config import JobConfig, job_config_from_dict

MANIFEST_NAME = "manifest.json"
EVENTS_NAME = "events.jsonl"
MANIFEST_SCHEMA = 1


class JobError(RuntimeError):
    """Invalid job state or manifest."""


class Stage(str, enum.Enum):
    CREATED = "created"
    AUDIO_EXTRACTED = "audio_extracted"
    DIARIZED = "diarized"
    SEGMENTED = "segmented"
    TRANSCRIBING = "transcribing"
    TRANSLATING = "translating"
    RENDERING = "rendering"
    DONE = "done"
    FAILED = "failed"


STAGE_ORDER = [
    Stage.CREATED,
    Stage.AUDIO_EXTRACTED,
    Stage.DIARIZED,
    Stage.SEGMENTED,
    Stage.TRANSCRIBING,
    Stage.TRANSLATING,
    Stage.RENDERING,
    Stage.DONE,
]


class SegmentStatus(str, enum.Enum):
    PENDING = "pending"
    TRANSCRIBED = "transcribed"
    TRANSLATED = "translated"
    FAILED = "failed"


@dataclass
class TranscriptSegment:
    """One diarization-derived crop on its way through ASR and MT."""

    index: int
    start: float
    end: float
    speaker: str
    source_text: str = ""
    translated_text: str = ""
    status: SegmentStatus = SegmentStatus.PENDING
    error: str | None = None

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["status"] = self.status.value
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "TranscriptSegment":
        return cls(
            index=int(d["index"]),
            start=float(d["start"]),
            end=float(d["end"]),
            speaker=str(d["speaker"]),
            source_text=str(d.get("source_text", "")),
            translated_text=str(d.get("translated_text", "")),
            status=SegmentStatus(d.get("status", "pending")),
            error=d.get("error"),
        )


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


@dataclass
class PipelineJob:
    id: str
    job_dir: Path
    input_video: str  # relative to job_dir
    stage: Stage = Stage.CREATED
    config: JobConfig = field(default_factory=JobConfig)
    diarization: list[tuple[float, float, str]] = field(default_factory=list)
    segments: list[TranscriptSegment] = field(default_factory=list)
    artifacts: dict[str, str] = field(default_factory=dict)  # name -> relative path
    error: str | None = None
    history: list[dict[str, Any]] = field(default_factory=list)
    created: str = field(default_factory=_now)
    updated: str = field(default_factory=_now)

    # -- state transitions ------------------------------------------------

    def advance(self, stage: Stage) -> None:
        """Move forward; anything else is a bug, not an I/O error."""
        if stage is Stage.FAILED:
            self.stage = stage
            return
        if STAGE_ORDER.index(stage) <= STAGE_ORDER.index(self.stage):
            raise JobError(f"cannot move from {self.stage.value} to {stage.value}")
        self.stage = stage

    def fail(self, message: str) -> None:
        self.error = message
        self.stage = Stage.FAILED

    @property
    def is_terminal(self) -> bool:
        return self.stage in (Stage.DONE, Stage.FAILED)

    def artifact_path(self, name: str) -> Path:
        return self.job_dir / self.artifacts[name]

    # -- cue/segment correspondence ---------------------------------------

    def emitted_segments(self) -> list[TranscriptSegment]:
        """Segments that produce a cue, in cue order.

        A segment is emitted when it has translated text, or when the config
        substitutes placeholder text for empty ASR output.
        """
        emitted = []
        for seg in self.segments:
            if seg.translated_text:
                emitted.append(seg)
            elif self.config.empty_segment_text and seg.status is not SegmentStatus.FAILED:
                emitted.append(seg)
        return emitted

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": MANIFEST_SCHEMA,
            "id": self.id,
            "input_video": self.input_video,
            "stage": self.stage.value,
            "config": dataclasses.asdict(self.config),
            "diarization": [[s, e, spk] for s, e, spk in self.diarization],
            "segments": [seg.to_dict() for seg in self.segments],
            "artifacts": dict(self.artifacts),
            "error": self.error,
            "history": list(self.history),
            "created": self.created,
            "updated": self.updated,
        }

    def save(self) -> None:
        self.updated = _now()
        payload = json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n"
        tmp = self.job_dir / (MANIFEST_NAME + ".tmp")
        tmp.write_text(payload, encoding="utf-8")
        os.replace(tmp, self.job_dir / MANIFEST_NAME)

    @classmethod
    def load(cls, job_dir: Path | str) -> "PipelineJob":
        job_dir = Path(job_dir)
        path = job_dir / MANIFEST_NAME
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise JobError(f"no manifest in {job_dir}") from None
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise JobError(f"corrupt manifest {path}: {exc}") from exc
        if doc.get("schema") != MANIFEST_SCHEMA:
            raise JobError(f"unsupported manifest schema {doc.get('schema')!r}")
        return cls(
            id=str(doc["id"]),
            job_dir=job_dir,
            input_video=str(doc["input_video"]),
            stage=Stage(doc["stage"]),
            config=job_config_from_dict(doc.get("config", {})),
            diarization=[(float(s), float(e), str(spk)) for s, e, spk in doc.get("diarization", [])],
            segments=[TranscriptSegment.from_dict(d) for d in doc.get("segments", [])],
            artifacts={str(k): str(v) for k, v in doc.get("artifacts", {}).items()},
            error=doc.get("error"),
            history=list(doc.get("history", [])),
            created=str(doc.get("created", _now())),
            updated=str(doc.get("updated", _now())),
        )


class EventLog:
    """Append-only JSONL progress log with a monotone ``seq`` per event.

    The sequence number doubles as the SSE event id, so a client that
    reconnects with the last seq it saw gets exactly the missed suffix.
    """

    def __init__(self, job_dir: Path):
        self.path = Path(job_dir) / EVENTS_NAME
        self._repair_tail()
        self._next_seq = self._scan_next_seq()

    def _repair_tail(self) -> None:
        # A crash mid-write can leave a torn final line with no newline;
        # appending the next event would glue it onto the garbage and lose
        # both. Terminate the torn line once so it is skipped, not extended.
        try:
            with open(self.path, "rb") as fh:
                fh.seek(-1, os.SEEK_END)
                torn = fh.read(1) != b"\n"
        except (OSError, ValueError):
            return
        if torn:
            with open(self.path, "ab") as fh:
                fh.write(b"\n")

    def _scan_next_seq(self) -> int:
        last = 0
        for event in self.read():
            last = event["seq"]
        return last + 1

    def emit(self, type: str, **fields: Any) -> dict[str, Any]:
        event = {"seq": self._next_seq, "ts": _now(), "type": type, **fields}
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        self._next_seq += 1
        return event

    def read(self, after: int = 0) -> list[dict[str, Any]]:
        """Events with seq > ``after``. A torn trailing line is skipped."""
        if not self.path.exists():
            return []
        events: list[dict[str, Any]] = []
        for line in self.path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            try:
                event = json.loads(line)
            except json.JSONDecodeError:
                continue
            if isinstance(event, dict) and isinstance(event.get("seq"), int):
                if event["seq"] > after:
                    events.append(event)
        return events
