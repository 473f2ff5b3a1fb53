"""WAV audio plumbing: clip handles, frame-accurate cropping, resampling.

The interchange format everywhere in dubkit is RIFF WAV, 16-bit PCM. Mono is
the norm for pipeline intermediates; multi-channel input is accepted and
downmixed where a backend requires mono.
"""

from __future__ import annotations

import io
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class AudioFormatError(ValueError):
    """Unreadable or unsupported audio payload."""


@dataclass(frozen=True)
class AudioClip:
    """A reference to PCM audio: either a file path or in-memory WAV bytes."""

    sample_rate: int
    channels: int
    duration: float
    path: Path | None = None
    data: bytes | None = None

    def __post_init__(self) -> None:
        if self.sample_rate <= 0:
            raise AudioFormatError(f"sample_rate must be > 0, got {self.sample_rate}")
        if self.channels < 1:
            raise AudioFormatError(f"channels must be >= 1, got {self.channels}")
        if self.duration <= 0:
            raise AudioFormatError(f"duration must be > 0, got {self.duration}")
        if (self.path is None) == (self.data is None):
            raise AudioFormatError("clip needs exactly one of path or data")

    @property
    def clip_id(self) -> str:
        """Stable identifier: the file stem for file-backed clips."""
        return self.path.stem if self.path is not None else "<memory>"

    @classmethod
    def from_wav_file(cls, path: Path | str) -> "AudioClip":
        path = Path(path)
        try:
            with wave.open(str(path), "rb") as wav:
                return cls(
                    sample_rate=wav.getframerate(),
                    channels=wav.getnchannels(),
                    duration=wav.getnframes() / wav.getframerate(),
                    path=path,
                )
        except (wave.Error, EOFError, OSError) as exc:
            raise AudioFormatError(f"cannot read WAV file {path}: {exc}") from exc

    @classmethod
    def from_wav_bytes(cls, data: bytes) -> "AudioClip":
        rate, channels, frames = _wav_params(data)
        return cls(
            sample_rate=rate, channels=channels, duration=frames / rate, data=data
        )

    def wav_bytes(self) -> bytes:
        """The full RIFF WAV payload for this clip."""
        if self.data is not None:
            return self.data
        assert self.path is not None
        return self.path.read_bytes()


def _wav_params(data: bytes) -> tuple[int, int, int]:
    try:
        with wave.open(io.BytesIO(data), "rb") as wav:
            rate, channels, frames = wav.getframerate(), wav.getnchannels(), wav.getnframes()
    except (wave.Error, EOFError, OSError) as exc:
        raise AudioFormatError(f"cannot parse WAV bytes: {exc}") from exc
    if rate <= 0 or frames <= 0:
        raise AudioFormatError("WAV payload has no frames")
    return rate, channels, frames


def read_samples(source: AudioClip | bytes | Path | str) -> tuple[np.ndarray, int]:
    """Decode 16-bit PCM WAV into an int16 array of shape (frames, channels)."""
    if isinstance(source, AudioClip):
        data = source.wav_bytes()
    elif isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    else:
        data = source
    try:
        with wave.open(io.BytesIO(data), "rb") as wav:
            if wav.getsampwidth() != 2:
                raise AudioFormatError(
                    f"expected 16-bit PCM, got sample width {wav.getsampwidth()}"
                )
            frames = wav.readframes(wav.getnframes())
            samples = np.frombuffer(frames, dtype="<i2").reshape(-1, wav.getnchannels())
            return samples, wav.getframerate()
    except (wave.Error, EOFError, OSError) as exc:
        raise AudioFormatError(f"cannot decode WAV payload: {exc}") from exc


def write_wav_bytes(samples: np.ndarray, sample_rate: int) -> bytes:
    """Encode an int16 array of shape (frames,) or (frames, channels) as WAV."""
    if samples.ndim == 1:
        samples = samples[:, np.newaxis]
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wav:
        wav.setnchannels(samples.shape[1])
        wav.setsampwidth(2)
        wav.setframerate(sample_rate)
        wav.writeframes(np.ascontiguousarray(samples, dtype="<i2").tobytes())
    return buf.getvalue()


def write_wav_file(path: Path | str, samples: np.ndarray, sample_rate: int) -> AudioClip:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(write_wav_bytes(samples, sample_rate))
    return AudioClip.from_wav_file(path)


def to_mono(samples: np.ndarray) -> np.ndarray:
    if samples.ndim == 1:
        return samples
    if samples.shape[1] == 1:
        return samples[:, 0]
    return np.round(samples.mean(axis=1)).astype(np.int16)


def resample(samples: np.ndarray, src_rate: int, dst_rate: int) -> np.ndarray:
    """Linear-interpolation resampling; duration is preserved to one frame."""
    if src_rate == dst_rate:
        return samples.copy()
    mono = samples.ndim == 1
    if mono:
        samples = samples[:, np.newaxis]
    n_src = samples.shape[0]
    n_dst = max(1, int(round(n_src * dst_rate / src_rate)))
    src_t = np.arange(n_src) / src_rate
    dst_t = np.arange(n_dst) / dst_rate
    out = np.empty((n_dst, samples.shape[1]), dtype=np.int16)
    for ch in range(samples.shape[1]):
        out[:, ch] = np.round(
            np.interp(dst_t, src_t, samples[:, ch].astype(np.float64))
        ).astype(np.int16)
    return out[:, 0] if mono else out


def crop_wav_bytes(source: AudioClip | Path | str, start: float, end: float) -> bytes:
    """Extract ``[start, end)`` seconds as a standalone WAV, frame-accurately."""
    samples, rate = read_samples(source if isinstance(source, AudioClip) else Path(source))
    first = int(round(start * rate))
    last = int(round(end * rate))
    first = max(0, min(first, samples.shape[0]))
    last = max(first, min(last, samples.shape[0]))
    if last == first:
        raise AudioFormatError(f"crop ({start}, {end}) selects no frames")
    return write_wav_bytes(samples[first:last], rate)
