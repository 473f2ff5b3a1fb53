#!/usr/bin/env python3
"""Create a FAKEVIDEO fixture container for tests.

    make_fixture_video.py OUT.fv --duration 32.4 [--rate 16000] [--no-audio]

The container is b"FAKEVIDEO\n" followed by a mono 16-bit WAV of the given
duration (a quiet 220 Hz tone, so crops are non-degenerate), or a
b"FAKEVIDEO-NOAUDIO dur=...\n" header when --no-audio is given.
"""

import argparse
import io
import math
import sys
import wave


def make_wav(duration: float, rate: int) -> bytes:
    n = int(round(duration * rate))
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(rate)
        frames = bytearray()
        for i in range(n):
            value = int(8000 * math.sin(2 * math.pi * 220 * i / rate))
            frames += value.to_bytes(2, "little", signed=True)
        wav.writeframes(bytes(frames))
    return buf.getvalue()


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out")
    parser.add_argument("--duration", type=float, default=10.0)
    parser.add_argument("--rate", type=int, default=16000)
    parser.add_argument("--no-audio", action="store_true")
    args = parser.parse_args()
    if args.no_audio:
        blob = f"FAKEVIDEO-NOAUDIO dur={args.duration}\n".encode("ascii")
    else:
        blob = b"FAKEVIDEO\n" + make_wav(args.duration, args.rate)
    with open(args.out, "wb") as fh:
        fh.write(blob)
    return 0


if __name__ == "__main__":
    sys.exit(main())
