"""Stage coordinator: drives a job through the pipeline, one transition at a time.

Each ``run_next_stage`` call performs exactly one stage's work and persists
the manifest, so a crash at any point resumes from the last persisted
state. Segment-level ASR/MT fan out to a bounded pool; results are applied
by the coordinator thread in deterministic index order, so any worker count
produces byte-identical output.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Mapping

from dubkit.audio import AudioClip, crop_wav_bytes
from dubkit.backends.types import BackendError, BackendRole
from dubkit.engine.job import (
    EventLog,
    JobError,
    PipelineJob,
    SegmentStatus,
    Stage,
    TranscriptSegment,
)
from dubkit.engine.media import MediaTool, MediaToolError
from dubkit.subtitles import (
    SubtitleCue,
    SubtitleDocument,
    SubtitleMode,
    serialize,
)
from dubkit.timeline import TimeSpan, merge_adjacent, plan_crops, validate_segments

logger = logging.getLogger("dubkit.engine")

AUDIO_ARTIFACT = "audio.wav"
VTT_ARTIFACT = "output.vtt"
SRT_ARTIFACT = "output.srt"
MP3_ARTIFACT = "audio.mp3"
CROPS_DIR = "crops"


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


class PipelineEngine:
    """Runs jobs against a fixed set of backends and a media tool."""

    def __init__(
        self,
        backends: Mapping[BackendRole, Any],
        media_tool: MediaTool | None = None,
    ):
        self.backends = dict(backends)
        self.media = media_tool or MediaTool()
        self._handlers: dict[Stage, Callable[[PipelineJob, EventLog], None]] = {
            Stage.CREATED: self._extract_audio,
            Stage.AUDIO_EXTRACTED: self._diarize,
            Stage.DIARIZED: self._segment,
            Stage.SEGMENTED: self._enter_transcribing,
            Stage.TRANSCRIBING: self._transcribe,
            Stage.TRANSLATING: self._translate,
            Stage.RENDERING: self._render,
        }

    def _backend(self, role: BackendRole) -> Any:
        try:
            return self.backends[role]
        except KeyError:
            raise BackendError(f"no {role.value} backend configured") from None

    # -- driving ------------------------------------------------------------

    def run_next_stage(self, job: PipelineJob) -> PipelineJob:
        """Perform one stage transition; on stage failure the job is failed
        (and persisted), not raised."""
        if job.is_terminal:
            return job
        log = EventLog(job.job_dir)
        stage_before = job.stage
        try:
            self._handlers[job.stage](job, log)
        except (BackendError, MediaToolError, ValueError) as exc:
            job.fail(f"{stage_before.value}: {exc}")
            job.save()
            log.emit("stage", stage=Stage.FAILED.value, error=job.error)
            return job
        job.save()
        log.emit("stage", stage=job.stage.value)
        return job

    def run_job(self, job: PipelineJob) -> PipelineJob:
        while not job.is_terminal:
            self.run_next_stage(job)
        return job

    # -- stage handlers ------------------------------------------------------

    def _extract_audio(self, job: PipelineJob, log: EventLog) -> None:
        video = job.job_dir / job.input_video
        self.media.extract_audio(
            video, job.job_dir / AUDIO_ARTIFACT, rate=job.config.sample_rate
        )
        job.artifacts["audio"] = AUDIO_ARTIFACT
        job.advance(Stage.AUDIO_EXTRACTED)

    def _diarize(self, job: PipelineJob, log: EventLog) -> None:
        clip = AudioClip.from_wav_file(job.artifact_path("audio"))
        segments = validate_segments(self._backend(BackendRole.DIARIZATION).diarize(clip))
        job.diarization = [(s.start, s.end, s.speaker) for s in segments]
        if not segments:
            log.emit("warning", message="diarization found no speech in the audio")
        job.advance(Stage.DIARIZED)

    def _segment(self, job: PipelineJob, log: EventLog) -> None:
        clip = AudioClip.from_wav_file(job.artifact_path("audio"))
        segments = validate_segments(job.diarization)
        if job.config.merge_segments:
            segments = merge_adjacent(segments, job.config.merge_gap_tolerance)
        windows = plan_crops(segments, clip.duration)
        crops_dir = job.job_dir / CROPS_DIR
        crops_dir.mkdir(exist_ok=True)
        source = job.artifact_path("audio")
        job.segments = []
        for window in windows:
            wav = crop_wav_bytes(source, window.span.start, window.span.end)
            (crops_dir / f"seg-{window.index:04d}.wav").write_bytes(wav)
            job.segments.append(
                TranscriptSegment(
                    index=window.index,
                    start=window.span.start,
                    end=window.span.end,
                    speaker=window.speaker,
                )
            )
        job.advance(Stage.SEGMENTED)

    def _enter_transcribing(self, job: PipelineJob, log: EventLog) -> None:
        job.advance(Stage.TRANSCRIBING)

    def _crop_clip(self, job: PipelineJob, index: int) -> AudioClip:
        return AudioClip.from_wav_file(job.job_dir / CROPS_DIR / f"seg-{index:04d}.wav")

    def _map_segments(
        self,
        job: PipelineJob,
        log: EventLog,
        todo: list[TranscriptSegment],
        work: Callable[[TranscriptSegment], str],
        apply: Callable[[TranscriptSegment, str], None],
        stage_label: str,
    ) -> None:
        """Fan out per-segment calls, then apply results in index order with
        one persisted manifest per segment; already-applied segments are
        skipped on resume."""
        if not todo:
            return
        with ThreadPoolExecutor(max_workers=max(1, job.config.workers)) as pool:
            outcomes = list(pool.map(lambda seg: _trap_backend(work, seg), todo))
        failed: list[TranscriptSegment] = []
        for seg, outcome in zip(todo, outcomes):
            if isinstance(outcome, _Failure):
                seg.status = SegmentStatus.FAILED
                seg.error = outcome.message
                failed.append(seg)
            else:
                apply(seg, outcome)
            job.save()
            log.emit(
                "segment", index=seg.index, status=seg.status.value, error=seg.error
            )
        if failed and job.config.on_segment_failure == "abort":
            raise BackendError(
                f"segment {failed[0].index} failed during {stage_label}: {failed[0].error}"
            )
        for seg in failed:
            log.emit(
                "warning",
                message=f"segment {seg.index} failed during {stage_label}; cue skipped",
            )

    def _transcribe(self, job: PipelineJob, log: EventLog) -> None:
        asr = self._backend(BackendRole.ASR)
        todo = [s for s in job.segments if s.status is SegmentStatus.PENDING]

        def work(seg: TranscriptSegment) -> str:
            return asr.transcribe(self._crop_clip(job, seg.index), job.config.language)

        def apply(seg: TranscriptSegment, text: str) -> None:
            seg.source_text = text
            seg.status = SegmentStatus.TRANSCRIBED

        self._map_segments(job, log, todo, work, apply, "transcription")
        job.advance(Stage.TRANSLATING)

    def _translate(self, job: PipelineJob, log: EventLog) -> None:
        translator = self._backend(BackendRole.TRANSLATION)
        todo = [s for s in job.segments if s.status is SegmentStatus.TRANSCRIBED]

        def work(seg: TranscriptSegment) -> str:
            if not seg.source_text:
                return ""  # nothing to translate; the cue is dropped at render
            return translator.translate(
                seg.source_text, job.config.language, job.config.target_language
            )

        def apply(seg: TranscriptSegment, text: str) -> None:
            seg.translated_text = text
            seg.status = SegmentStatus.TRANSLATED

        self._map_segments(job, log, todo, work, apply, "translation")
        job.advance(Stage.RENDERING)

    def _render(self, job: PipelineJob, log: EventLog) -> None:
        self._write_documents(job)
        if not job.emitted_segments():
            log.emit("warning", message="no cues to render; subtitle document is empty")
        if job.config.mux:
            vtt_rel = job.artifacts.get("vtt") or job.artifacts.get("srt")
            video = job.job_dir / job.input_video
            out_name = f"output{Path(job.input_video).suffix or '.mkv'}"
            try:
                self.media.mux_subtitles(
                    video, job.job_dir / vtt_rel, job.job_dir / out_name
                )
                job.artifacts["video_out"] = out_name
            except MediaToolError as exc:
                # Sidecar artifacts stay valid; muxing is best-effort.
                log.emit("warning", message=f"subtitle mux failed: {exc}")
        job.advance(Stage.DONE)

    # -- documents and edits ---------------------------------------------

    def _document(self, job: PipelineJob, mode: SubtitleMode) -> SubtitleDocument:
        cues = []
        for seg in job.emitted_segments():
            cues.append(
                SubtitleCue(
                    span=TimeSpan(seg.start, seg.end),
                    text=seg.translated_text or job.config.empty_segment_text or "",
                    speaker=seg.speaker or None,
                )
            )
        return SubtitleDocument(cues=tuple(cues), mode=mode)

    def _write_documents(self, job: PipelineJob) -> None:
        mode = SubtitleMode(job.config.subtitle_mode)
        if mode is SubtitleMode.SRT:
            text = serialize(self._document(job, SubtitleMode.SRT))
            _atomic_write_text(job.job_dir / SRT_ARTIFACT, text)
            job.artifacts["srt"] = SRT_ARTIFACT
        else:
            text = serialize(self._document(job, mode))
            _atomic_write_text(job.job_dir / VTT_ARTIFACT, text)
            job.artifacts["vtt"] = VTT_ARTIFACT
        if job.config.emit_srt and mode is not SubtitleMode.SRT:
            text = serialize(self._document(job, SubtitleMode.SRT))
            _atomic_write_text(job.job_dir / SRT_ARTIFACT, text)
            job.artifacts["srt"] = SRT_ARTIFACT

    def _cue_segment(self, job: PipelineJob, cue_index: int) -> TranscriptSegment:
        emitted = job.emitted_segments()
        if not 0 <= cue_index < len(emitted):
            raise IndexError(
                f"cue index {cue_index} out of range (document has {len(emitted)} cues)"
            )
        return emitted[cue_index]

    def update_cue(self, job: PipelineJob, cue_index: int, text: str) -> PipelineJob:
        """Replace one cue's text and re-render the documents atomically."""
        if job.stage not in (Stage.RENDERING, Stage.DONE):
            raise JobError(f"cannot edit cues while job is {job.stage.value}")
        if not text.strip():
            raise ValueError("cue text must be non-empty")
        seg = self._cue_segment(job, cue_index)
        seg.translated_text = text
        job.history.append({"action": "update_cue", "cue": cue_index, "text": text})
        self._write_documents(job)
        job.save()
        EventLog(job.job_dir).emit("edit", action="update_cue", index=cue_index)
        return job

    def retranslate_cue(self, job: PipelineJob, cue_index: int) -> PipelineJob:
        """Fresh MT call for one cue; on backend failure the old text stays."""
        seg = self._cue_segment(job, cue_index)
        if seg.status not in (SegmentStatus.TRANSCRIBED, SegmentStatus.TRANSLATED):
            raise JobError(f"segment {seg.index} has no transcript to retranslate")
        translator = self._backend(BackendRole.TRANSLATION)
        text = translator.translate(
            seg.source_text, job.config.language, job.config.target_language
        )
        seg.translated_text = text
        seg.status = SegmentStatus.TRANSLATED
        job.history.append({"action": "retranslate", "cue": cue_index})
        self._write_documents(job)
        job.save()
        EventLog(job.job_dir).emit("edit", action="retranslate", index=cue_index)
        return job

    def export_mp3(self, job: PipelineJob) -> Path:
        """Paper-fidelity mp3 of the extracted audio track."""
        if "audio" not in job.artifacts:
            raise JobError("job has no extracted audio yet")
        out = self.media.export_mp3(
            job.artifact_path("audio"), job.job_dir / MP3_ARTIFACT
        )
        job.artifacts["mp3"] = MP3_ARTIFACT
        job.save()
        return out


class _Failure:
    def __init__(self, message: str):
        self.message = message


def _trap_backend(fn: Callable[[TranscriptSegment], str], seg: TranscriptSegment):
    try:
        return fn(seg)
    except BackendError as exc:
        return _Failure(f"{type(exc).__name__}: {exc}")
