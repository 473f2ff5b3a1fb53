"""End-to-end pipeline: media handling, job state machine, stage runner."""

from dubkit.engine.job import (
    EventLog,
    PipelineJob,
    SegmentStatus,
    Stage,
    TranscriptSegment,
)
from dubkit.engine.media import (
    MediaInfo,
    MediaTool,
    MediaToolError,
    MediaToolNotFoundError,
    NoAudioTrackError,
)
from dubkit.engine.runner import PipelineEngine

__all__ = [
    "EventLog",
    "MediaInfo",
    "MediaTool",
    "MediaToolError",
    "MediaToolNotFoundError",
    "NoAudioTrackError",
    "PipelineEngine",
    "PipelineJob",
    "SegmentStatus",
    "Stage",
    "TranscriptSegment",
]
