"""Subprocess wrapper around the external media tool (ffmpeg/ffprobe).

Argument templates are pinned in :class:`~dubkit.config.MediaToolConfig`
rather than assembled at call sites, so the exact subprocess contract is
visible (and overrideable) in one place. Only ``{input}``, ``{output}``,
``{subtitles}`` and ``{rate}`` are substituted.
"""

from __future__ import annotations

import json
import logging
import subprocess
from dataclasses import dataclass
from pathlib import Path

from dubkit.audio import AudioClip
from dubkit.config import MediaToolConfig

logger = logging.getLogger("dubkit.engine")

# Slack between container-reported duration and the extracted WAV.
EXTRACT_DURATION_TOLERANCE = 0.100


class MediaToolError(RuntimeError):
    """Media tool invocation failed."""


class MediaToolNotFoundError(MediaToolError):
    """The configured binary does not exist."""


class NoAudioTrackError(MediaToolError):
    """The container has no audio stream to extract."""


@dataclass(frozen=True)
class MediaInfo:
    duration: float
    has_audio: bool
    has_video: bool
    container: str


class MediaTool:
    def __init__(self, config: MediaToolConfig | None = None):
        self.config = config or MediaToolConfig()

    def _run(self, binary: str, template: tuple[str, ...], subs: dict[str, str]) -> str:
        argv = [binary] + [arg.format(**subs) for arg in template]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, check=False)
        except FileNotFoundError as exc:
            raise MediaToolNotFoundError(
                f"media tool {binary!r} not found; install it or set "
                f"media_tool.ffmpeg / media_tool.ffprobe in the config"
            ) from exc
        if proc.returncode != 0:
            tail = (proc.stderr or proc.stdout).strip().splitlines()[-3:]
            message = " | ".join(tail) if tail else f"exit status {proc.returncode}"
            if "no audio stream" in message.lower():
                raise NoAudioTrackError("no audio stream")
            raise MediaToolError(f"{Path(binary).name} failed: {message}")
        return proc.stdout

    def probe(self, path: Path | str) -> MediaInfo:
        """Container metadata via the probe template (JSON output)."""
        out = self._run(self.config.ffprobe, self.config.probe_args, {"input": str(path)})
        try:
            doc = json.loads(out)
            duration = float(doc["format"]["duration"])
            streams = doc.get("streams", [])
            container = str(doc["format"].get("format_name", "unknown"))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise MediaToolError(f"unparseable probe output for {path}: {exc}") from exc
        kinds = {s.get("codec_type") for s in streams}
        return MediaInfo(
            duration=duration,
            has_audio="audio" in kinds,
            has_video="video" in kinds,
            container=container,
        )

    def extract_audio(
        self, video: Path | str, out_wav: Path | str, *, rate: int = 16000
    ) -> AudioClip:
        """Extract the audio track as mono 16-bit PCM WAV at ``rate``."""
        info = self.probe(video)
        if not info.has_audio:
            raise NoAudioTrackError("no audio stream")
        self._run(
            self.config.ffmpeg,
            self.config.extract_args,
            {"input": str(video), "output": str(out_wav), "rate": str(rate)},
        )
        clip = AudioClip.from_wav_file(out_wav)
        if abs(clip.duration - info.duration) > EXTRACT_DURATION_TOLERANCE:
            raise MediaToolError(
                f"extracted audio is {clip.duration:.3f}s but the container "
                f"reports {info.duration:.3f}s"
            )
        return clip

    def mux_subtitles(
        self, video: Path | str, subtitles: Path | str, out_path: Path | str
    ) -> Path:
        """Attach a subtitle track to a copy of the video without re-encoding."""
        self._run(
            self.config.ffmpeg,
            self.config.mux_args,
            {"input": str(video), "subtitles": str(subtitles), "output": str(out_path)},
        )
        return Path(out_path)

    def export_mp3(self, source: Path | str, out_path: Path | str) -> Path:
        """Transcode the audio track of ``source`` to mp3."""
        self._run(
            self.config.ffmpeg,
            self.config.mp3_args,
            {"input": str(source), "output": str(out_path)},
        )
        return Path(out_path)
