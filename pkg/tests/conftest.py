"""Shared fixtures: WAV/FAKEVIDEO builders, fake media tool, fixture backends."""

from __future__ import annotations

import io
import math
import wave
from pathlib import Path

import pytest

from dubkit.backends.mock import MockDiarizer, MockTranscriber, MockTranslator
from dubkit.backends.types import BackendRole
from dubkit.config import MediaToolConfig
from dubkit.forge.corpus import Corpus, CorpusLayout, CorpusRecord, Split

TOOLS_DIR = Path(__file__).resolve().parents[1] / "tools"

# One outcome line per release criterion, printed after the run summary.
_acceptance_results: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    outcome = "PASS" if report.passed else "FAIL"
    _acceptance_results.append((report.nodeid.split("::")[-1], outcome))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance_results:
        terminalreporter.write_line(f"[{outcome}] {name}")

# The three-cue reference document: spans from the diarization fixture, texts
# from the translation fixture, serialized in listing1-compat mode.
LISTING1_SPANS = ((0.0, 6.4, "S0"), (6.4, 10.4, "S0"), (10.4, 32.4, "S0"))
LISTING1_HI = ("तो अब जापान की बात करते हैं", "और यहाँ कुछ लोग सैलरी के बारे में", "तो पर्सनली मुझे लगता है")
LISTING1_EN = (
    "So now let's come to Japan. When I came to Japan, I was about 22 years old and I have been living here for 8 years.",
    "And here some people are curious about the salary, how much salary is there in Japan.",
    "So personally, I feel that according to my salary, there is no problem in social media.",
)
LISTING1_GOLDEN = (
    "00:00.000 --> 00:06.400\n"
    + LISTING1_EN[0]
    + "\n\n00:06.400 --> 00:10.400\n"
    + LISTING1_EN[1]
    + "\n\n00:10.400 --> 00:32.400\n"
    + LISTING1_EN[2]
    + "\n"
)


def make_wav_bytes(
    duration: float, rate: int = 16000, channels: int = 1, tone: float = 220.0
) -> bytes:
    n = int(round(duration * rate))
    buf = io.BytesIO()
    with wave.open(buf, "wb") as handle:
        handle.setnchannels(channels)
        handle.setsampwidth(2)
        handle.setframerate(rate)
        frames = bytearray()
        for i in range(n):
            value = int(8000 * math.sin(2 * math.pi * tone * i / rate))
            for _ in range(channels):
                frames += value.to_bytes(2, "little", signed=True)
        handle.writeframes(bytes(frames))
    return buf.getvalue()


def make_video_bytes(duration: float, rate: int = 16000, audio: bool = True) -> bytes:
    if not audio:
        return f"FAKEVIDEO-NOAUDIO dur={duration}\n".encode("ascii")
    return b"FAKEVIDEO\n" + make_wav_bytes(duration, rate)


@pytest.fixture
def make_wav(tmp_path):
    def _make(name: str, duration: float, rate: int = 16000, channels: int = 1) -> Path:
        path = tmp_path / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(make_wav_bytes(duration, rate, channels))
        return path

    return _make


@pytest.fixture
def make_video(tmp_path):
    def _make(name: str, duration: float, audio: bool = True) -> Path:
        path = tmp_path / name
        path.write_bytes(make_video_bytes(duration, audio=audio))
        return path

    return _make


@pytest.fixture
def fake_media_config() -> MediaToolConfig:
    return MediaToolConfig(
        ffmpeg=str(TOOLS_DIR / "fake_ffmpeg.py"),
        ffprobe=str(TOOLS_DIR / "fake_ffprobe.py"),
    )


def listing1_backends() -> dict:
    """Mock backends that reproduce the reference three-cue run."""
    return {
        BackendRole.DIARIZATION: MockDiarizer(LISTING1_SPANS),
        BackendRole.ASR: MockTranscriber(
            {f"seg-{i:04d}": LISTING1_HI[i] for i in range(3)}
        ),
        BackendRole.TRANSLATION: MockTranslator(
            {LISTING1_HI[i]: LISTING1_EN[i] for i in range(3)}
        ),
    }


@pytest.fixture(name="listing1_backends")
def listing1_backends_fixture() -> dict:
    return listing1_backends()


@pytest.fixture
def lj_corpus(tmp_path):
    """Build an on-disk LJ corpus with n records and return it."""

    def _build(
        n: int,
        root: Path | None = None,
        rate: int = 16000,
        transcript: str = "नमूना वाक्य {i}",
    ) -> Corpus:
        corpus_root = root or (tmp_path / "corpus")
        (corpus_root / "wavs").mkdir(parents=True, exist_ok=True)
        records = []
        for i in range(1, n + 1):
            rel = f"wavs/utt-{i:04d}.wav"
            duration = 0.5 + (i % 5) * 0.25
            (corpus_root / rel).write_bytes(make_wav_bytes(duration, rate))
            records.append(
                CorpusRecord(
                    id=f"utt-{i:04d}",
                    audio_path=rel,
                    transcript=transcript.format(i=i),
                    duration=duration,
                    split=Split.TRAIN if i % 5 else Split.VALID,
                )
            )
        return Corpus(root=corpus_root, records=tuple(records), layout=CorpusLayout.LJ)

    return _build
