"""Pluggable model backends: diarization, ASR, translation, voice conversion.

Each role is a small protocol with a deterministic mock implementation for
testing and an HTTP adapter speaking a fixed JSON-over-HTTP wire protocol to
external model servers.
"""

from dubkit.backends.factory import backend_from_config, backends_from_config
from dubkit.backends.http import (
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
from dubkit.backends.types import (
    BackendDescriptor,
    BackendError,
    BackendKind,
    BackendRole,
    ConversionParams,
    ProtocolError,
    ServerError,
    TransportError,
    UnsupportedLanguageError,
)

__all__ = [
    "BackendDescriptor",
    "BackendError",
    "BackendKind",
    "BackendRole",
    "ConversionParams",
    "HttpDiarizer",
    "HttpTranscriber",
    "HttpTranslator",
    "HttpVoiceConverter",
    "MockDiarizer",
    "MockTranscriber",
    "MockTranslator",
    "MockVoiceConverter",
    "ProtocolError",
    "ServerError",
    "TransportError",
    "UnsupportedLanguageError",
    "backend_from_config",
    "backends_from_config",
]
