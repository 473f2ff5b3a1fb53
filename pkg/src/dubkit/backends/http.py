"""HTTP adapters speaking the model-server wire protocol.

All endpoints respond JSON (UTF-8) except /v1/convert, which returns WAV
bytes with an ``X-Sample-Rate`` header. Audio is uploaded as a raw binary
body with metadata in the query string. Errors arrive as non-2xx statuses
with an ``{"error": "..."}`` body; an optional ``"code":
"unsupported_language"`` marks the language failure distinctly.

Response decoding is total: every well-formed payload maps to a domain
value and every malformed payload raises a typed :class:`ProtocolError`.
"""

from __future__ import annotations

import json
import threading
from typing import Any

import httpx

from dubkit.audio import AudioClip, AudioFormatError
from dubkit.backends.types import (
    ConversionParams,
    ProtocolError,
    ServerError,
    TransportError,
    UnsupportedLanguageError,
)
from dubkit.timeline import DiarizationSegment, TimelineError, validate_segments

DEFAULT_TIMEOUT = 60.0
DEFAULT_MAX_CONCURRENT = 4


def _decode_json(payload: bytes) -> Any:
    try:
        return json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"response is not valid JSON: {exc}") from exc


def _require_number(value: Any, label: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProtocolError(f"{label} must be a number, got {value!r}")
    return float(value)


def decode_diarize_response(payload: bytes) -> list[DiarizationSegment]:
    doc = _decode_json(payload)
    if not isinstance(doc, dict) or "segments" not in doc:
        raise ProtocolError("expected an object with a 'segments' field")
    items = doc["segments"]
    if not isinstance(items, list):
        raise ProtocolError("'segments' must be a list")
    raw: list[tuple[float, float, str]] = []
    for i, item in enumerate(items):
        if not isinstance(item, dict):
            raise ProtocolError(f"segment {i} must be an object")
        start = _require_number(item.get("start"), f"segment {i} start")
        end = _require_number(item.get("end"), f"segment {i} end")
        speaker = item.get("speaker")
        if not isinstance(speaker, str) or not speaker:
            raise ProtocolError(f"segment {i} speaker must be a non-empty string")
        raw.append((start, end, speaker))
    try:
        # Sorts and drops degenerate spans; negative starts are corrupt output.
        return validate_segments(raw)
    except TimelineError as exc:
        raise ProtocolError(str(exc)) from exc


def decode_transcribe_response(payload: bytes) -> str:
    doc = _decode_json(payload)
    if not isinstance(doc, dict) or not isinstance(doc.get("text"), str):
        raise ProtocolError("expected an object with a string 'text' field")
    return doc["text"]


def decode_translate_response(payload: bytes) -> str:
    text = decode_transcribe_response(payload)
    if not text:
        raise ProtocolError("translation response text is empty")
    return text


def decode_convert_response(
    payload: bytes, sample_rate_header: str | None, params: ConversionParams
) -> AudioClip:
    if sample_rate_header is None:
        raise ProtocolError("missing X-Sample-Rate header")
    try:
        header_rate = int(sample_rate_header)
    except ValueError as exc:
        raise ProtocolError(f"bad X-Sample-Rate header {sample_rate_header!r}") from exc
    try:
        clip = AudioClip.from_wav_bytes(payload)
    except AudioFormatError as exc:
        raise ProtocolError(f"convert response is not a WAV payload: {exc}") from exc
    if clip.sample_rate != header_rate:
        raise ProtocolError(
            f"WAV rate {clip.sample_rate} contradicts X-Sample-Rate {header_rate}"
        )
    if clip.sample_rate != params.target_sample_rate:
        raise ProtocolError(
            f"server returned {clip.sample_rate} Hz, requested {params.target_sample_rate} Hz"
        )
    return clip


def _decode_error(response: httpx.Response) -> ServerError:
    message = f"server returned status {response.status_code}"
    code = None
    try:
        doc = json.loads(response.content.decode("utf-8"))
        if isinstance(doc, dict):
            if isinstance(doc.get("error"), str):
                message = doc["error"]
            code = doc.get("code")
    except (UnicodeDecodeError, json.JSONDecodeError):
        pass
    if code == "unsupported_language":
        return UnsupportedLanguageError(message, status=response.status_code)
    return ServerError(message, status=response.status_code)


class _HttpBackend:
    """Shared transport plumbing: one client, a timeout, a concurrency cap."""

    def __init__(
        self,
        endpoint: str,
        *,
        timeout: float = DEFAULT_TIMEOUT,
        max_concurrent: int = DEFAULT_MAX_CONCURRENT,
        transport: httpx.BaseTransport | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self._semaphore = threading.BoundedSemaphore(max(1, max_concurrent))
        self._client = httpx.Client(
            base_url=self.endpoint, timeout=timeout, transport=transport
        )

    def _post(
        self,
        *,
        path: str,
        content: bytes | None = None,
        json_body: dict | None = None,
        params: dict[str, str] | None = None,
        headers: dict[str, str] | None = None,
    ) -> httpx.Response:
        with self._semaphore:
            try:
                response = self._client.post(
                    path, content=content, json=json_body, params=params, headers=headers
                )
            except httpx.HTTPError as exc:
                raise TransportError(f"request to {path} failed: {exc}") from exc
        if response.status_code < 200 or response.status_code >= 300:
            raise _decode_error(response)
        return response

    def close(self) -> None:
        self._client.close()


class HttpDiarizer(_HttpBackend):
    def diarize(self, audio: AudioClip) -> list[DiarizationSegment]:
        response = self._post(
            path="/v1/diarize",
            content=audio.wav_bytes(),
            headers={"Content-Type": "audio/wav"},
        )
        return decode_diarize_response(response.content)


class HttpTranscriber(_HttpBackend):
    def transcribe(self, audio: AudioClip, language: str) -> str:
        response = self._post(
            path="/v1/transcribe",
            content=audio.wav_bytes(),
            params={"language": language},
            headers={"Content-Type": "audio/wav"},
        )
        return decode_transcribe_response(response.content)


class HttpTranslator(_HttpBackend):
    def translate(self, text: str, source: str, target: str) -> str:
        if not text:
            raise ValueError("translation input text must be non-empty")
        response = self._post(
            path="/v1/translate",
            json_body={"text": text, "source": source, "target": target},
        )
        return decode_translate_response(response.content)


class HttpVoiceConverter(_HttpBackend):
    def convert_voice(self, audio: AudioClip, params: ConversionParams) -> AudioClip:
        response = self._post(
            path="/v1/convert",
            content=audio.wav_bytes(),
            params=params.as_query(),
            headers={"Content-Type": "audio/wav"},
        )
        clip = decode_convert_response(
            response.content, response.headers.get("X-Sample-Rate"), params
        )
        if abs(clip.duration - audio.duration) > 0.02 * audio.duration:
            raise ProtocolError(
                f"converted duration {clip.duration:.3f}s deviates more than 2% "
                f"from input {audio.duration:.3f}s"
            )
        return clip
