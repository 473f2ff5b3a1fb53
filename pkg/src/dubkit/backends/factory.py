"""Construct backends from plain config mappings.

Each role is configured as ``{"kind": "mock", ...}`` or ``{"kind": "http",
"endpoint": ..., ...}``. Unknown keys are rejected by name so a typo in a
config file fails loudly instead of silently ignoring an option.
"""

from __future__ import annotations

from typing import Any

import httpx

from dubkit.backends.http import (
    DEFAULT_MAX_CONCURRENT,
    DEFAULT_TIMEOUT,
    HttpDiarizer,
    HttpTranscriber,
    HttpTranslator,
    HttpVoiceConverter,
)
from dubkit.backends.mock import (
    MockDiarizer,
    MockTranscriber,
    MockTranslator,
    MockVoiceConverter,
)
from dubkit.backends.types import BackendError, BackendRole

_HTTP_CLASSES = {
    BackendRole.DIARIZATION: HttpDiarizer,
    BackendRole.ASR: HttpTranscriber,
    BackendRole.TRANSLATION: HttpTranslator,
    BackendRole.VOICE_CONVERSION: HttpVoiceConverter,
}

_MOCK_KEYS = {
    BackendRole.DIARIZATION: {"segments"},
    BackendRole.ASR: {"transcripts", "languages"},
    BackendRole.TRANSLATION: {"table"},
    BackendRole.VOICE_CONVERSION: set(),
}


def _check_keys(cfg: dict[str, Any], allowed: set[str], role: BackendRole) -> None:
    unknown = sorted(set(cfg) - allowed - {"kind"})
    if unknown:
        raise BackendError(
            f"unknown {role.value} backend option(s): {', '.join(unknown)}"
        )


def _build_mock(role: BackendRole, cfg: dict[str, Any]):
    _check_keys(cfg, _MOCK_KEYS[role], role)
    if role is BackendRole.DIARIZATION:
        segments = tuple(
            (float(s), float(e), str(label)) for s, e, label in cfg.get("segments", [])
        )
        return MockDiarizer(segments)
    if role is BackendRole.ASR:
        transcripts = {str(k): str(v) for k, v in dict(cfg.get("transcripts", {})).items()}
        languages = cfg.get("languages")
        supported = frozenset(str(x) for x in languages) if languages else None
        return MockTranscriber(transcripts, supported_languages=supported)
    if role is BackendRole.TRANSLATION:
        table = {str(k): str(v) for k, v in dict(cfg.get("table", {})).items()}
        return MockTranslator(table)
    return MockVoiceConverter()


def _build_http(
    role: BackendRole, cfg: dict[str, Any], transport: httpx.BaseTransport | None
):
    _check_keys(cfg, {"endpoint", "timeout", "max_concurrent"}, role)
    endpoint = cfg.get("endpoint")
    if not isinstance(endpoint, str) or not endpoint:
        raise BackendError(f"{role.value} backend requires a non-empty 'endpoint'")
    return _HTTP_CLASSES[role](
        endpoint,
        timeout=float(cfg.get("timeout", DEFAULT_TIMEOUT)),
        max_concurrent=int(cfg.get("max_concurrent", DEFAULT_MAX_CONCURRENT)),
        transport=transport,
    )


def backend_from_config(
    role: BackendRole | str,
    cfg: dict[str, Any],
    *,
    transport: httpx.BaseTransport | None = None,
):
    """Build one backend. ``transport`` lets tests inject a fake HTTP layer."""
    role = BackendRole(role)
    if not isinstance(cfg, dict):
        raise BackendError(f"{role.value} backend config must be a mapping")
    kind = cfg.get("kind")
    if kind == "mock":
        return _build_mock(role, cfg)
    if kind == "http":
        return _build_http(role, cfg, transport)
    raise BackendError(f"{role.value} backend kind must be 'mock' or 'http', got {kind!r}")


def backends_from_config(
    cfg: dict[str, Any], *, transport: httpx.BaseTransport | None = None
) -> dict[BackendRole, Any]:
    """Build every configured role; at least ``asr`` and ``translation`` are
    needed for a subtitle run, diarization only when no segment file is given."""
    backends: dict[BackendRole, Any] = {}
    for key, role_cfg in cfg.items():
        role = BackendRole(key)
        backends[role] = backend_from_config(role, role_cfg, transport=transport)
    return backends
