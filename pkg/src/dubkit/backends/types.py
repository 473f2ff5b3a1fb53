"""Backend roles, descriptors, conversion parameters, and error taxonomy."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

from dubkit.audio import AudioClip
from dubkit.timeline import DiarizationSegment


class BackendRole(str, enum.Enum):
    DIARIZATION = "diarization"
    ASR = "asr"
    TRANSLATION = "translation"
    VOICE_CONVERSION = "voice_conversion"


class BackendKind(str, enum.Enum):
    MOCK = "mock"
    HTTP = "http"


class BackendError(Exception):
    """Base class for every failure a backend call can raise."""


class TransportError(BackendError):
    """Connection, timeout, or other transport-level failure."""


class ProtocolError(BackendError):
    """The server answered, but the payload does not match the wire protocol."""


class ServerError(BackendError):
    """The server reported an error (non-2xx with an error body)."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class UnsupportedLanguageError(ServerError):
    """The backend does not support the requested language."""


@dataclass(frozen=True)
class ConversionParams:
    """Voice-conversion inference parameters.

    Defaults follow the reference recipe: volume envelope scaling 0.25,
    filter radius 3, search feature ratio 0.75, consonant/breath protection
    0.33, output at 32 kHz.
    """

    volume_envelope: float = 0.25
    filter_radius: int = 3
    index_ratio: float = 0.75
    protect: float = 0.33
    target_sample_rate: int = 32000
    transpose_semitones: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.volume_envelope <= 1.0:
            raise ValueError(f"volume_envelope must be in [0, 1], got {self.volume_envelope}")
        if self.filter_radius < 0 or int(self.filter_radius) != self.filter_radius:
            raise ValueError(f"filter_radius must be a non-negative integer, got {self.filter_radius}")
        if not 0.0 <= self.index_ratio <= 1.0:
            raise ValueError(f"index_ratio must be in [0, 1], got {self.index_ratio}")
        if not 0.0 <= self.protect <= 0.5:
            raise ValueError(f"protect must be in [0, 0.5], got {self.protect}")
        if self.target_sample_rate <= 0:
            raise ValueError(f"target_sample_rate must be > 0, got {self.target_sample_rate}")
        if int(self.transpose_semitones) != self.transpose_semitones:
            raise ValueError(f"transpose_semitones must be an integer, got {self.transpose_semitones}")

    def as_query(self) -> dict[str, str]:
        """Flatten for the /v1/convert query string."""
        return {
            "volume_envelope": repr(self.volume_envelope),
            "filter_radius": str(self.filter_radius),
            "index_ratio": repr(self.index_ratio),
            "protect": repr(self.protect),
            "target_sample_rate": str(self.target_sample_rate),
            "transpose_semitones": str(self.transpose_semitones),
        }


@dataclass(frozen=True)
class BackendDescriptor:
    """Where a backend lives and what it is for."""

    role: BackendRole
    kind: BackendKind
    endpoint: str | None = None
    model_id: str | None = None
    language_hints: tuple[str, str] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "role", BackendRole(self.role))
        object.__setattr__(self, "kind", BackendKind(self.kind))
        if self.kind is BackendKind.HTTP and not self.endpoint:
            raise ValueError("http backends require an endpoint URL")


@runtime_checkable
class DiarizationBackend(Protocol):
    def diarize(self, audio: AudioClip) -> list[DiarizationSegment]: ...


@runtime_checkable
class AsrBackend(Protocol):
    def transcribe(self, audio: AudioClip, language: str) -> str: ...


@runtime_checkable
class TranslationBackend(Protocol):
    def translate(self, text: str, source: str, target: str) -> str: ...


@runtime_checkable
class VoiceConversionBackend(Protocol):
    def convert_voice(self, audio: AudioClip, params: ConversionParams) -> AudioClip: ...
