#!/usr/bin/env python3
"""Stand-in for ffmpeg used by the test suite (no ffmpeg in CI).

Implements exactly the three argument templates the toolkit pins in its
config — audio extraction, subtitle muxing, mp3 transcode — against the
FAKEVIDEO container (see tools/fake_ffprobe.py). Anything else is rejected.

Setting DUBKIT_FAKE_MUX_FAIL=1 makes the mux template fail, which the tests
use to exercise partial-success rendering.
"""

import io
import os
import sys
import wave

NOAUDIO_PREFIX = b"FAKEVIDEO-NOAUDIO"
VIDEO_PREFIX = b"FAKEVIDEO\n"
SUBS_MARKER = b"\nFAKESUBS\n"


def audio_payload(blob: bytes, path: str) -> bytes:
    if blob.startswith(NOAUDIO_PREFIX):
        fail(f"{path}: no audio stream")
    if blob.startswith(VIDEO_PREFIX):
        payload = blob[len(VIDEO_PREFIX):]
        subs_at = payload.find(SUBS_MARKER)
        return payload if subs_at == -1 else payload[:subs_at]
    return blob  # bare WAV


def fail(message: str) -> None:
    print(f"fake_ffmpeg: {message}", file=sys.stderr)
    sys.exit(1)


def read_wav(payload: bytes):
    with wave.open(io.BytesIO(payload)) as wav:
        if wav.getsampwidth() != 2:
            fail("only 16-bit PCM is supported")
        frames = wav.readframes(wav.getnframes())
        return frames, wav.getnchannels(), wav.getframerate()


def to_mono(frames: bytes, channels: int) -> bytes:
    if channels == 1:
        return frames
    import array

    samples = array.array("h", frames)
    mono = array.array(
        "h",
        (
            sum(samples[i : i + channels]) // channels
            for i in range(0, len(samples), channels)
        ),
    )
    return mono.tobytes()


def resample(frames: bytes, src_rate: int, dst_rate: int) -> bytes:
    if src_rate == dst_rate:
        return frames
    import array

    samples = array.array("h", frames)
    n_out = max(1, int(round(len(samples) * dst_rate / src_rate)))
    out = array.array("h", bytes(2 * n_out))
    for i in range(n_out):
        pos = i * (len(samples) - 1) / max(1, n_out - 1)
        i0 = int(pos)
        frac = pos - i0
        nxt = samples[min(i0 + 1, len(samples) - 1)]
        out[i] = int(samples[i0] * (1 - frac) + nxt * frac)
    return out.tobytes()


def write_wav(path: str, frames: bytes, rate: int) -> None:
    with wave.open(path, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(rate)
        wav.writeframes(frames)


def main(argv: list[str]) -> int:
    inputs = [argv[i + 1] for i, a in enumerate(argv[:-1]) if a == "-i"]
    if not inputs:
        fail("no -i input given")
    output = argv[-1]

    if "pcm_s16le" in argv:  # extraction template
        if "-ar" not in argv:
            fail("extraction requires -ar")
        rate = int(argv[argv.index("-ar") + 1])
        blob = open(inputs[0], "rb").read()
        frames, channels, src_rate = read_wav(audio_payload(blob, inputs[0]))
        write_wav(output, resample(to_mono(frames, channels), src_rate, rate), rate)
        return 0

    if "libmp3lame" in argv:  # mp3 transcode template
        blob = open(inputs[0], "rb").read()
        payload = audio_payload(blob, inputs[0])
        read_wav(payload)  # validates the source really is audio
        with open(output, "wb") as fh:
            fh.write(b"FAKEMP3\n" + payload)
        return 0

    if len(inputs) == 2 and "copy" in argv:  # subtitle mux template
        if os.environ.get("DUBKIT_FAKE_MUX_FAIL") == "1":
            fail("mux failure injected by DUBKIT_FAKE_MUX_FAIL")
        video = open(inputs[0], "rb").read()
        subs = open(inputs[1], "rb").read()
        if not video.startswith((VIDEO_PREFIX, NOAUDIO_PREFIX)):
            fail(f"{inputs[0]}: not a FAKEVIDEO container")
        with open(output, "wb") as fh:
            fh.write(video + SUBS_MARKER + subs)
        return 0

    fail(f"unsupported argument template: {' '.join(argv)}")
    return 1


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
