"""Application configuration: one YAML file, env overrides, loud failures.

Layout mirrors the subsystems: ``store``, ``media_tool``, ``pipeline``,
``backends``, ``service``, ``forge``, ``eval``. Any key not listed below is
rejected by its dotted name so typos never silently fall back to defaults.

Environment overrides use ``DUBKIT_<SECTION>__<KEY>`` (double underscore
between path parts, case-insensitive), e.g. ``DUBKIT_SERVICE__PORT=9000`` or
``DUBKIT_BACKENDS__ASR__ENDPOINT=http://gpu-box:9001``. Values are parsed as
YAML scalars, so numbers, booleans and ``null`` work as expected.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from dubkit.subtitles import SubtitleMode


class ConfigError(ValueError):
    """Malformed configuration; message names the offending key(s)."""


@dataclass(frozen=True)
class StoreConfig:
    root: str = "dubkit-jobs"


@dataclass(frozen=True)
class MediaToolConfig:
    """Subprocess contract for the external media tool.

    The argument templates are pinned here, not assembled ad hoc at call
    sites; ``{input}``, ``{output}``, ``{subtitles}`` and ``{rate}`` are the
    only placeholders substituted.
    """

    ffmpeg: str = "ffmpeg"
    ffprobe: str = "ffprobe"
    probe_args: tuple[str, ...] = (
        "-v", "error", "-print_format", "json",
        "-show_format", "-show_streams", "{input}",
    )
    extract_args: tuple[str, ...] = (
        "-nostdin", "-y", "-i", "{input}", "-vn",
        "-acodec", "pcm_s16le", "-ac", "1", "-ar", "{rate}", "{output}",
    )
    mux_args: tuple[str, ...] = (
        "-nostdin", "-y", "-i", "{input}", "-i", "{subtitles}",
        "-map", "0", "-map", "1", "-c", "copy", "-c:s", "webvtt", "{output}",
    )
    mp3_args: tuple[str, ...] = (
        "-nostdin", "-y", "-i", "{input}", "-vn",
        "-acodec", "libmp3lame", "-q:a", "2", "{output}",
    )


@dataclass(frozen=True)
class JobConfig:
    """Per-job pipeline settings; a snapshot is stored in each job manifest."""

    language: str = "hi"
    target_language: str = "en"
    subtitle_mode: str = SubtitleMode.WEBVTT_STANDARD.value
    sample_rate: int = 16000
    # Same-speaker merging is off by default: diarization backends may
    # already emit consolidated turns, and fusing their spans would move
    # cue boundaries.
    merge_segments: bool = False
    merge_gap_tolerance: float = 0.5
    workers: int = 4
    # "abort" fails the job on the first segment error; "continue" marks the
    # segment failed and still emits the remaining cues.
    on_segment_failure: str = "abort"
    # Text to emit for segments whose ASR output is empty; None drops them.
    empty_segment_text: str | None = None
    emit_srt: bool = False
    mux: bool = False

    def __post_init__(self) -> None:
        SubtitleMode(self.subtitle_mode)
        if self.on_segment_failure not in ("abort", "continue"):
            raise ConfigError(
                "pipeline.on_segment_failure must be 'abort' or 'continue', "
                f"got {self.on_segment_failure!r}"
            )
        if self.merge_gap_tolerance < 0:
            raise ConfigError("pipeline.merge_gap_tolerance must be >= 0")
        if self.workers < 1:
            raise ConfigError("pipeline.workers must be >= 1")


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    max_upload_bytes: int = 2 * 1024**3


@dataclass(frozen=True)
class ForgeConfig:
    workers: int = 4
    failure_threshold: float = 0.0
    valid_fraction: float = 0.1
    split_seed: int | None = None
    # Overrides for voice-conversion parameters, merged over their defaults.
    conversion: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class EvalConfig:
    workers: int = 4
    language: str = "hi"
    strip_punctuation: bool = True


@dataclass(frozen=True)
class AppConfig:
    store: StoreConfig = field(default_factory=StoreConfig)
    media_tool: MediaToolConfig = field(default_factory=MediaToolConfig)
    pipeline: JobConfig = field(default_factory=JobConfig)
    backends: dict[str, dict[str, Any]] = field(default_factory=dict)
    service: ServiceConfig = field(default_factory=ServiceConfig)
    forge: ForgeConfig = field(default_factory=ForgeConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)


_SECTION_TYPES = {
    "store": StoreConfig,
    "media_tool": MediaToolConfig,
    "pipeline": JobConfig,
    "service": ServiceConfig,
    "forge": ForgeConfig,
    "eval": EvalConfig,
}
_BACKEND_ROLES = ("diarization", "asr", "translation", "voice_conversion")


def _check_section(name: str, cls: type, data: dict[str, Any]) -> None:
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(
            "unknown config key(s): " + ", ".join(f"{name}.{k}" for k in unknown)
        )


def _coerce(cls: type, name: str, data: dict[str, Any]):
    _check_section(name, cls, data)
    kwargs: dict[str, Any] = {}
    for f in dataclasses.fields(cls):
        if f.name not in data:
            continue
        value = data[f.name]
        if f.type in ("tuple[str, ...]",) and isinstance(value, list):
            value = tuple(str(v) for v in value)
        kwargs[f.name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad value in section '{name}': {exc}") from exc


def _deep_merge(base: dict[str, Any], override: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _env_overrides(environ: dict[str, str]) -> dict[str, Any]:
    tree: dict[str, Any] = {}
    for raw_key, raw_value in environ.items():
        if not raw_key.startswith("DUBKIT_"):
            continue
        rest = raw_key[len("DUBKIT_"):]
        if "__" not in rest:
            # Overrides are SECTION__KEY; names without the separator are
            # reserved for other duties (DUBKIT_CONFIG points at the file).
            continue
        parts = [p.lower() for p in rest.split("__") if p]
        if not parts:
            continue
        try:
            value = yaml.safe_load(raw_value)
        except yaml.YAMLError:
            value = raw_value
        node = tree
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"conflicting env override {raw_key}")
        node[parts[-1]] = value
    return tree


def job_config_from_dict(
    data: dict[str, Any], base: JobConfig | None = None
) -> JobConfig:
    """Validate per-job overrides on top of ``base`` (or the defaults)."""
    if not isinstance(data, dict):
        raise ConfigError("job config overrides must be a mapping")
    merged = _deep_merge(dataclasses.asdict(base or JobConfig()), data)
    return _coerce(JobConfig, "pipeline", merged)


def load_config(
    path: str | Path | None = None, *, environ: dict[str, str] | None = None
) -> AppConfig:
    """Load configuration: file (if given) merged under env overrides."""
    data: dict[str, Any] = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        loaded = yaml.safe_load(text)
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {path} must contain a mapping")
        data = loaded
    env_tree = _env_overrides(environ if environ is not None else dict(os.environ))
    data = _deep_merge(data, env_tree)

    unknown_sections = sorted(set(data) - set(_SECTION_TYPES) - {"backends"})
    if unknown_sections:
        raise ConfigError("unknown config section(s): " + ", ".join(unknown_sections))

    kwargs: dict[str, Any] = {}
    for name, cls in _SECTION_TYPES.items():
        section = data.get(name, {})
        if not isinstance(section, dict):
            raise ConfigError(f"config section '{name}' must be a mapping")
        kwargs[name] = _coerce(cls, name, section)

    backends = data.get("backends", {})
    if not isinstance(backends, dict):
        raise ConfigError("config section 'backends' must be a mapping")
    unknown_roles = sorted(set(backends) - set(_BACKEND_ROLES))
    if unknown_roles:
        raise ConfigError(
            "unknown config key(s): "
            + ", ".join(f"backends.{k}" for k in unknown_roles)
        )
    kwargs["backends"] = backends
    return AppConfig(**kwargs)
