"""Deterministic mock backends for tests and offline runs.

Every mock is a pure function of its fixture configuration and the call
input: two identical calls always produce identical results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from dubkit import audio as audio_ops
from dubkit.audio import AudioClip
from dubkit.backends.types import ConversionParams, UnsupportedLanguageError
from dubkit.timeline import DiarizationSegment, segment


@dataclass(frozen=True)
class MockDiarizer:
    """Returns a fixed list of segments regardless of the audio content.

    An empty fixture models silence.
    """

    segments: tuple[tuple[float, float, str], ...] = field(default_factory=tuple)

    def diarize(self, audio: AudioClip) -> list[DiarizationSegment]:
        return [segment(s, e, label) for s, e, label in self.segments]


@dataclass(frozen=True)
class MockTranscriber:
    """Fixture table keyed by clip id (the audio file stem).

    Unknown clips transcribe to the empty string, which models silence.
    """

    transcripts: dict[str, str] = field(default_factory=dict)
    supported_languages: tuple[str, ...] | None = None

    def transcribe(self, audio: AudioClip, language: str) -> str:
        if self.supported_languages is not None and language not in self.supported_languages:
            raise UnsupportedLanguageError(f"language {language!r} not supported")
        return self.transcripts.get(audio.clip_id, "")


PASSTHROUGH_TAG = "⟦{source}→{target}⟧"  # e.g. ⟦hi→en⟧


@dataclass(frozen=True)
class MockTranslator:
    """Fixture table keyed by exact input text.

    Unknown inputs fall back to a tagged passthrough ("⟦hi→en⟧" + text),
    which keeps the mapping injective whenever the fixture table is.
    """

    table: dict[str, str] = field(default_factory=dict)

    def translate(self, text: str, source: str, target: str) -> str:
        if text in self.table:
            return self.table[text]
        return PASSTHROUGH_TAG.format(source=source, target=target) + text


@dataclass(frozen=True)
class MockVoiceConverter:
    """Resamples the input to the target rate with linear interpolation.

    Content is otherwise copied verbatim, so output is byte-stable for
    identical input and duration is preserved to within one frame.
    """

    def convert_voice(self, audio: AudioClip, params: ConversionParams) -> AudioClip:
        samples, rate = audio_ops.read_samples(audio)
        converted = audio_ops.resample(samples, rate, params.target_sample_rate)
        return AudioClip.from_wav_bytes(
            audio_ops.write_wav_bytes(converted, params.target_sample_rate)
        )
