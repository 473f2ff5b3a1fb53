"""Corpus model and on-disk layouts.

Two layouts are supported:

* LJ layout: ``wavs/<id>.wav`` plus ``train.txt`` / ``valid.txt`` manifests,
  one record per line as ``wavs/<id>.wav|<transcript>`` (pipe-delimited,
  UTF-8, LF).
* Common-Voice-like layout: ``clips/<id>.wav`` plus ``train.tsv`` /
  ``valid.tsv`` manifests with a ``path\tsentence`` header row.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, replace
from pathlib import Path

from dubkit.audio import AudioClip, AudioFormatError

logger = logging.getLogger("dubkit.forge")

DURATION_TOLERANCE = 0.010  # seconds; verify() slack for manifest durations


class CorpusError(ValueError):
    """Invalid corpus structure or serialization input."""


class Split(str, enum.Enum):
    TRAIN = "train"
    VALID = "valid"
    UNASSIGNED = "unassigned"


class CorpusLayout(str, enum.Enum):
    LJ = "lj"
    COMMONVOICE_LIKE = "commonvoice-like"


@dataclass(frozen=True)
class CorpusRecord:
    """One utterance: an audio file, its transcript, and a split tag."""

    id: str
    audio_path: str  # relative to the corpus root
    transcript: str
    duration: float
    split: Split = Split.UNASSIGNED

    def __post_init__(self) -> None:
        if not self.id:
            raise CorpusError("record id must be non-empty")
        if not self.transcript:
            raise CorpusError(f"record {self.id}: transcript must be non-empty")
        if self.duration <= 0:
            raise CorpusError(f"record {self.id}: duration must be > 0")
        object.__setattr__(self, "split", Split(self.split))


@dataclass(frozen=True)
class Corpus:
    """A rooted collection of records in one of the supported layouts."""

    root: Path
    records: tuple[CorpusRecord, ...]
    layout: CorpusLayout = CorpusLayout.LJ

    def __post_init__(self) -> None:
        object.__setattr__(self, "root", Path(self.root))
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "layout", CorpusLayout(self.layout))
        ids = [r.id for r in self.records]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise CorpusError(f"duplicate record ids: {dupes}")

    def by_split(self, split: Split) -> list[CorpusRecord]:
        return [r for r in self.records if r.split is split]

    def record(self, record_id: str) -> CorpusRecord:
        for r in self.records:
            if r.id == record_id:
                return r
        raise KeyError(record_id)

    @property
    def total_duration(self) -> float:
        return sum(r.duration for r in self.records)


_SPLIT_FILES = {Split.TRAIN: "train", Split.VALID: "valid"}


def _assigned_records(corpus: Corpus, op: str) -> list[CorpusRecord]:
    unassigned = [r.id for r in corpus.records if r.split is Split.UNASSIGNED]
    if unassigned:
        raise CorpusError(
            f"{op} requires every record to carry a train/valid split; "
            f"unassigned: {unassigned[:5]}"
        )
    return list(corpus.records)


def write_lj(corpus: Corpus) -> Corpus:
    """Write LJ manifests at the corpus root. Audio files must already exist.

    Transcripts containing the ``|`` delimiter are rejected, naming the
    offending record.
    """
    records = _assigned_records(corpus, "write_lj")
    for r in records:
        if "|" in r.transcript:
            raise CorpusError(f"record {r.id}: transcript contains the '|' delimiter")
        if not (corpus.root / r.audio_path).exists():
            raise CorpusError(f"record {r.id}: audio file {r.audio_path} missing under root")
    corpus.root.mkdir(parents=True, exist_ok=True)
    for split, stem in _SPLIT_FILES.items():
        lines = [f"{r.audio_path}|{r.transcript}\n" for r in records if r.split is split]
        (corpus.root / f"{stem}.txt").write_text("".join(lines), encoding="utf-8")
    return replace(corpus, layout=CorpusLayout.LJ)


def _measure(root: Path, path: str, strict: bool) -> float:
    """Record duration comes from the audio itself (manifests do not carry
    it). In lenient mode unreadable audio yields NaN instead of raising, so
    callers that handle per-record failures themselves can still load the
    rest of the corpus."""
    try:
        return AudioClip.from_wav_file(root / path).duration
    except AudioFormatError as exc:
        if strict:
            raise CorpusError(f"record {Path(path).stem}: {exc}") from exc
        return float("nan")


def read_lj(root: Path | str, *, strict: bool = True) -> Corpus:
    """Load an LJ-layout corpus; durations are measured from the WAV files."""
    root = Path(root)
    records: list[CorpusRecord] = []
    for split, stem in _SPLIT_FILES.items():
        manifest = root / f"{stem}.txt"
        if not manifest.exists():
            raise CorpusError(f"missing manifest {manifest}")
        for lineno, line in enumerate(
            manifest.read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not line.strip():
                continue
            if "|" not in line:
                raise CorpusError(f"{manifest.name}:{lineno}: expected 'path|transcript'")
            path, transcript = line.split("|", 1)
            records.append(
                CorpusRecord(
                    id=Path(path).stem,
                    audio_path=path,
                    transcript=transcript,
                    duration=_measure(root, path, strict),
                    split=split,
                )
            )
    return Corpus(root=root, records=tuple(records), layout=CorpusLayout.LJ)


def export_commonvoice_like(corpus: Corpus, out_root: Path | str) -> Path:
    """Materialize a Common-Voice-like copy: ``clips/`` plus TSV manifests.

    Tabs inside transcripts are replaced with single spaces (with a warning)
    since TSV cannot carry them.
    """
    records = _assigned_records(corpus, "export_commonvoice_like")
    out_root = Path(out_root)
    clips = out_root / "clips"
    clips.mkdir(parents=True, exist_ok=True)
    rows: dict[Split, list[str]] = {Split.TRAIN: [], Split.VALID: []}
    for r in records:
        sentence = r.transcript
        if "\t" in sentence:
            logger.warning("record %s: transcript tab replaced with space", r.id)
            sentence = sentence.replace("\t", " ")
        src = corpus.root / r.audio_path
        rel = f"clips/{r.id}.wav"
        (out_root / rel).write_bytes(src.read_bytes())
        rows[r.split].append(f"{rel}\t{sentence}\n")
    for split, stem in _SPLIT_FILES.items():
        with open(out_root / f"{stem}.tsv", "w", encoding="utf-8") as fh:
            fh.write("path\tsentence\n")
            fh.writelines(rows[split])
    return out_root


def read_commonvoice_like(root: Path | str, *, strict: bool = True) -> Corpus:
    """Load a Common-Voice-like corpus written by :func:`export_commonvoice_like`."""
    root = Path(root)
    records: list[CorpusRecord] = []
    for split, stem in _SPLIT_FILES.items():
        manifest = root / f"{stem}.tsv"
        if not manifest.exists():
            raise CorpusError(f"missing manifest {manifest}")
        lines = manifest.read_text(encoding="utf-8").splitlines()
        if not lines or lines[0] != "path\tsentence":
            raise CorpusError(f"{manifest.name}: expected 'path\\tsentence' header")
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise CorpusError(f"{manifest.name}:{lineno}: expected two TSV fields")
            path, sentence = parts
            records.append(
                CorpusRecord(
                    id=Path(path).stem,
                    audio_path=path,
                    transcript=sentence,
                    duration=_measure(root, path, strict),
                    split=split,
                )
            )
    return Corpus(root=root, records=tuple(records), layout=CorpusLayout.COMMONVOICE_LIKE)


def verify_corpus(corpus: Corpus) -> list[str]:
    """Check that manifest and directory agree. Returns a list of problems.

    Checks: every record's audio exists and is readable, its measured
    duration matches the manifest within 10 ms, and the audio directory
    contains no stray WAV files the manifest does not mention.
    """
    problems: list[str] = []
    audio_dir = "wavs" if corpus.layout is CorpusLayout.LJ else "clips"
    referenced: set[Path] = set()
    for r in corpus.records:
        full = corpus.root / r.audio_path
        referenced.add(full.resolve())
        if not full.exists():
            problems.append(f"record {r.id}: missing audio file {r.audio_path}")
            continue
        try:
            clip = AudioClip.from_wav_file(full)
        except AudioFormatError as exc:
            problems.append(f"record {r.id}: unreadable audio: {exc}")
            continue
        if abs(clip.duration - r.duration) > DURATION_TOLERANCE:
            problems.append(
                f"record {r.id}: duration {r.duration:.3f}s does not match "
                f"file ({clip.duration:.3f}s)"
            )
    wav_dir = corpus.root / audio_dir
    if wav_dir.is_dir():
        for path in sorted(wav_dir.glob("*.wav")):
            if path.resolve() not in referenced:
                problems.append(f"stray audio file not in any manifest: {audio_dir}/{path.name}")
    return problems
