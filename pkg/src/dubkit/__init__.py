"""dubkit: diarization-driven subtitling pipeline and speech-corpus workbench."""

__version__ = "0.1.0"
