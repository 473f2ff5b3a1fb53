"""Corpus-building operations: ingest, split, batch voice conversion.

Operations that materialize a directory build it in a sibling temp dir and
promote it with one atomic rename, so a crash never leaves a half-written
corpus at the destination.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import logging
import os
import random
import shutil
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path

import dubkit
from dubkit.audio import AudioClip, crop_wav_bytes
from dubkit.backends.types import (
    AsrBackend,
    BackendError,
    ConversionParams,
    DiarizationBackend,
    VoiceConversionBackend,
)
from dubkit.forge.corpus import (
    Corpus,
    CorpusError,
    CorpusLayout,
    CorpusRecord,
    Split,
    write_lj,
)
from dubkit.timeline import plan_crops, validate_segments

logger = logging.getLogger("dubkit.forge")

DEFAULT_MIN_TOTAL = 600.0  # seconds of speech below which ingest warns
PROVENANCE_FILE = "provenance.json"


class EmptyCorpusError(CorpusError):
    """Ingest produced no usable records."""


class ConvertCorpusError(CorpusError):
    """Batch conversion exceeded the allowed failure fraction."""


def _claim_out_root(out_root: Path) -> None:
    # The destination must be absent or an empty directory; remove the empty
    # directory so os.replace() of the temp dir can take its place.
    if out_root.exists():
        if not out_root.is_dir() or any(out_root.iterdir()):
            raise CorpusError(f"output directory {out_root} is not empty")
        out_root.rmdir()
    out_root.parent.mkdir(parents=True, exist_ok=True)


def _promote(tmp_root: Path, out_root: Path) -> None:
    os.replace(tmp_root, out_root)


def ingest_long_audio(
    audio: AudioClip,
    diarizer: DiarizationBackend,
    transcriber: AsrBackend,
    out_root: Path | str,
    *,
    language: str = "hi",
    min_total: float = DEFAULT_MIN_TOTAL,
) -> Corpus:
    """Turn one long recording into an LJ-layout corpus.

    Speech spans come from the diarizer, each span is cropped to
    ``wavs/seg-NNNN.wav`` and transcribed. Spans whose transcript comes back
    empty are dropped with a warning. All records start in the train split;
    use :func:`split_train_valid` to carve out a validation set.
    """
    out_root = Path(out_root)
    _claim_out_root(out_root)
    segments = validate_segments(diarizer.diarize(audio))
    if not segments:
        raise EmptyCorpusError("diarizer reported no speech spans")
    windows = plan_crops(segments, audio.duration)

    tmp_root = out_root.parent / f".{out_root.name}.tmp-{os.getpid()}"
    if tmp_root.exists():
        shutil.rmtree(tmp_root)
    (tmp_root / "wavs").mkdir(parents=True)
    # Pull the recording into memory once; cropping per window from disk
    # would re-read the whole file for every span.
    source = AudioClip.from_wav_bytes(audio.wav_bytes()) if audio.path else audio

    records: list[CorpusRecord] = []
    try:
        for window in windows:
            record_id = f"seg-{window.index + 1:04d}"
            rel = f"wavs/{record_id}.wav"
            wav = crop_wav_bytes(source, window.span.start, window.span.end)
            (tmp_root / rel).write_bytes(wav)
            clip = AudioClip.from_wav_file(tmp_root / rel)
            text = transcriber.transcribe(clip, language)
            if not text.strip():
                logger.warning("span %s produced an empty transcript; dropped", record_id)
                (tmp_root / rel).unlink()
                continue
            records.append(
                CorpusRecord(
                    id=record_id,
                    audio_path=rel,
                    transcript=text,
                    duration=clip.duration,
                    split=Split.TRAIN,
                )
            )
        if not records:
            raise EmptyCorpusError("every speech span produced an empty transcript")
        total = sum(r.duration for r in records)
        if total < min_total:
            logger.warning(
                "ingested only %.1f s of speech (< %.0f s); the corpus may be "
                "too small for fine-tuning",
                total,
                min_total,
            )
        corpus = Corpus(root=tmp_root, records=tuple(records), layout=CorpusLayout.LJ)
        write_lj(corpus)
    except BaseException:
        shutil.rmtree(tmp_root, ignore_errors=True)
        raise
    _promote(tmp_root, out_root)
    return replace(corpus, root=out_root)


def split_train_valid(corpus: Corpus, valid_fraction: float, seed: int) -> Corpus:
    """Deterministically assign splits.

    Record ids are sorted, shuffled with ``random.Random(seed)``, and the
    first ``round(valid_fraction * N)`` become the validation set (ties round
    half up). Same corpus, fraction and seed always produce the same split.
    """
    if not 0.0 <= valid_fraction <= 1.0:
        raise CorpusError(f"valid_fraction must be within [0, 1], got {valid_fraction}")
    ids = sorted(r.id for r in corpus.records)
    random.Random(seed).shuffle(ids)
    n_valid = int(valid_fraction * len(ids) + 0.5)
    valid_ids = set(ids[:n_valid])
    records = tuple(
        replace(r, split=Split.VALID if r.id in valid_ids else Split.TRAIN)
        for r in corpus.records
    )
    return replace(corpus, records=records)


def corpus_digest(corpus: Corpus) -> str:
    """sha256 over (id, transcript, split, audio bytes) sorted by record id."""
    digest = hashlib.sha256()
    for r in sorted(corpus.records, key=lambda r: r.id):
        digest.update(r.id.encode("utf-8"))
        digest.update(b"\x00")
        digest.update(r.transcript.encode("utf-8"))
        digest.update(b"\x00")
        digest.update(r.split.value.encode("utf-8"))
        digest.update(b"\x00")
        digest.update((corpus.root / r.audio_path).read_bytes())
        digest.update(b"\x01")
    return digest.hexdigest()


def _write_metadata(corpus: Corpus) -> None:
    if corpus.layout is CorpusLayout.LJ:
        write_lj(corpus)
        return
    rows: dict[Split, list[str]] = {Split.TRAIN: [], Split.VALID: []}
    for r in corpus.records:
        rows[r.split].append(f"{r.audio_path}\t{r.transcript}\n")
    for split, stem in ((Split.TRAIN, "train"), (Split.VALID, "valid")):
        with open(corpus.root / f"{stem}.tsv", "w", encoding="utf-8") as fh:
            fh.write("path\tsentence\n")
            fh.writelines(rows[split])


def convert_corpus(
    corpus: Corpus,
    vc_backend: VoiceConversionBackend,
    params: ConversionParams,
    out_root: Path | str,
    *,
    workers: int = 4,
    failure_threshold: float = 0.0,
) -> Corpus:
    """Run every record through the voice-conversion backend.

    Ids, transcripts and split tags carry over verbatim; only the audio
    changes. Per-record backend failures are collected, and the whole job
    fails once the failed fraction exceeds ``failure_threshold`` (default:
    any failure). A ``provenance.json`` at the output root records the
    parameters and a digest of the source corpus.
    """
    out_root = Path(out_root)
    _claim_out_root(out_root)
    audio_dir = "wavs" if corpus.layout is CorpusLayout.LJ else "clips"
    tmp_root = out_root.parent / f".{out_root.name}.tmp-{os.getpid()}"
    if tmp_root.exists():
        shutil.rmtree(tmp_root)
    (tmp_root / audio_dir).mkdir(parents=True)

    def convert_one(record: CorpusRecord) -> CorpusRecord:
        clip = AudioClip.from_wav_file(corpus.root / record.audio_path)
        converted = vc_backend.convert_voice(clip, params)
        rel = f"{audio_dir}/{record.id}.wav"
        (tmp_root / rel).write_bytes(converted.wav_bytes())
        return replace(record, audio_path=rel, duration=converted.duration)

    converted: dict[str, CorpusRecord] = {}
    failures: dict[str, str] = {}
    try:
        if corpus.records:
            with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
                for record, outcome in zip(
                    corpus.records,
                    pool.map(
                        lambda r: _catch_backend_error(convert_one, r), corpus.records
                    ),
                ):
                    if isinstance(outcome, str):
                        failures[record.id] = outcome
                    else:
                        converted[record.id] = outcome
            fraction = len(failures) / len(corpus.records)
            if fraction > failure_threshold:
                names = ", ".join(sorted(failures))
                raise ConvertCorpusError(
                    f"{len(failures)}/{len(corpus.records)} record(s) failed "
                    f"conversion ({names}): {failures[sorted(failures)[0]]}"
                )
            for record_id, message in sorted(failures.items()):
                logger.warning("record %s failed conversion: %s", record_id, message)
        out_records = tuple(
            converted[r.id] for r in corpus.records if r.id in converted
        )
        result = Corpus(root=tmp_root, records=out_records, layout=corpus.layout)
        _write_metadata(result)
        provenance = {
            "operation": "convert_corpus",
            "tool_version": dubkit.__version__,
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "params": asdict(params),
            "source_root": str(corpus.root),
            "source_digest": corpus_digest(corpus),
            "records": len(out_records),
            "failed_records": sorted(failures),
        }
        (tmp_root / PROVENANCE_FILE).write_text(
            json.dumps(provenance, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    except BaseException:
        shutil.rmtree(tmp_root, ignore_errors=True)
        raise
    _promote(tmp_root, out_root)
    return replace(result, root=out_root)


def _catch_backend_error(fn, record):
    try:
        return fn(record)
    except BackendError as exc:
        return f"{type(exc).__name__}: {exc}"
