#!/usr/bin/env python3
"""Stand-in for ffprobe used by the test suite (no ffmpeg in CI).

Understands the FAKEVIDEO container produced by tools/make_fixture_video.py
and by tools/fake_ffmpeg.py:

    b"FAKEVIDEO\n" + <wav bytes>                      # video + audio
    b"FAKEVIDEO-NOAUDIO dur=<seconds>\n"              # video, no audio track
    ... + b"\nFAKESUBS\n" + <subtitle bytes>          # mux output suffix

Implements only the probe contract the toolkit pins in its config:
`-v error -print_format json -show_format -show_streams <input>` and prints
ffprobe-shaped JSON.
"""

import io
import json
import sys
import wave

NOAUDIO_PREFIX = b"FAKEVIDEO-NOAUDIO"
VIDEO_PREFIX = b"FAKEVIDEO\n"
SUBS_MARKER = b"\nFAKESUBS\n"


def wav_duration(payload: bytes) -> float:
    with wave.open(io.BytesIO(payload)) as wav:
        return wav.getnframes() / wav.getframerate()


def main(argv: list[str]) -> int:
    if not argv:
        print("fake_ffprobe: no arguments", file=sys.stderr)
        return 2
    path = argv[-1]
    try:
        blob = open(path, "rb").read()
    except OSError as exc:
        print(f"fake_ffprobe: {exc}", file=sys.stderr)
        return 1

    streams = []
    if blob.startswith(NOAUDIO_PREFIX):
        header = blob.split(b"\n", 1)[0].decode("ascii", "replace")
        duration = 0.0
        for token in header.split():
            if token.startswith("dur="):
                duration = float(token[4:])
        streams.append({"codec_type": "video"})
    elif blob.startswith(VIDEO_PREFIX):
        payload = blob[len(VIDEO_PREFIX):]
        subs_at = payload.find(SUBS_MARKER)
        if subs_at != -1:
            streams.append({"codec_type": "subtitle"})
            payload = payload[:subs_at]
        try:
            duration = wav_duration(payload)
        except (wave.Error, EOFError) as exc:
            print(f"fake_ffprobe: corrupt audio payload: {exc}", file=sys.stderr)
            return 1
        streams.append({"codec_type": "video"})
        streams.append({"codec_type": "audio"})
    else:
        # Bare WAV files probe fine too (audio-only container).
        try:
            duration = wav_duration(blob)
        except (wave.Error, EOFError):
            print(f"fake_ffprobe: unrecognized container {path}", file=sys.stderr)
            return 1
        streams.append({"codec_type": "audio"})

    print(
        json.dumps(
            {
                "format": {"duration": f"{duration:.6f}", "format_name": "fakevideo"},
                "streams": streams,
            }
        )
    )
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
