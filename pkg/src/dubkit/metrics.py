"""Word error rate computation and corpus-level ASR evaluation."""

from __future__ import annotations

import logging
import unicodedata
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from dubkit.audio import AudioClip, AudioFormatError
from dubkit.forge.corpus import Corpus

logger = logging.getLogger("dubkit.metrics")

# The reported accuracy figure is defined as max(0, 1 - WER). Raw counts are
# always included so any alternative definition can be recomputed.
ACCURACY_CAVEAT = (
    "accuracy = max(0, 1 - wer); substitution/deletion/insertion counts are "
    "included so alternative definitions can be recomputed"
)


@dataclass(frozen=True)
class WerBreakdown:
    """Minimal-edit-distance alignment counts for one reference/hypothesis pair.

    ``degenerate`` marks the empty-reference-with-hypothesis convention,
    where the rate is the insertion count over a denominator of 1.
    """

    substitutions: int
    deletions: int
    insertions: int
    reference_length: int
    rate: float
    degenerate: bool = False

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def accuracy(self) -> float:
        return max(0.0, 1.0 - self.rate)


def wer(reference: Sequence[str], hypothesis: Sequence[str]) -> WerBreakdown:
    """Align two token sequences with unit costs and count S/D/I.

    Ties between minimal alignments are broken in favor of substitutions
    (over insertions over deletions). Once the total and the substitution
    count are fixed, the deletion/insertion split is forced by the length
    difference, so the result is fully deterministic.
    """
    n, m = len(reference), len(hypothesis)
    if n == 0 and m == 0:
        return WerBreakdown(0, 0, 0, 0, 0.0)
    if n == 0:
        return WerBreakdown(0, 0, m, 0, float(m), degenerate=True)

    # DP over (total, -substitutions) kept lexicographically minimal.
    # Each cell stores (total, subs, dels, ins).
    prev = [(j, 0, 0, j) for j in range(m + 1)]
    for i in range(1, n + 1):
        cur = [(i, 0, i, 0)]
        ref_tok = reference[i - 1]
        for j in range(1, m + 1):
            diag = prev[j - 1]
            if ref_tok == hypothesis[j - 1]:
                best = diag
            else:
                best = (diag[0] + 1, diag[1] + 1, diag[2], diag[3])
            up = prev[j]
            cand = (up[0] + 1, up[1], up[2] + 1, up[3])  # deletion
            if (cand[0], -cand[1]) < (best[0], -best[1]):
                best = cand
            left = cur[j - 1]
            cand = (left[0] + 1, left[1], left[2], left[3] + 1)  # insertion
            if (cand[0], -cand[1]) < (best[0], -best[1]):
                best = cand
            cur.append(best)
        prev = cur
    total, subs, dels, ins = prev[m]
    assert subs + dels + ins == total
    return WerBreakdown(subs, dels, ins, n, total / n)


def tokenize(text: str) -> list[str]:
    """Default tokenization: whitespace split, no case folding."""
    return text.split()


def normalize_text(text: str, *, strip_punctuation: bool = True, nfc: bool = True) -> str:
    """Optional normalizer for scripts like Devanagari: NFC plus punctuation
    removal (Unicode category P*). Whitespace runs collapse to single spaces."""
    if nfc:
        text = unicodedata.normalize("NFC", text)
    if strip_punctuation:
        text = "".join(
            " " if unicodedata.category(ch).startswith("P") else ch for ch in text
        )
    return " ".join(text.split())


@dataclass(frozen=True)
class RecordEval:
    record_id: str
    breakdown: WerBreakdown | None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.breakdown is None


@dataclass(frozen=True)
class EvalReport:
    """Corpus-level WER aggregation; averages are None for empty input."""

    records: tuple[RecordEval, ...] = field(default_factory=tuple)
    failures: int = 0
    micro_wer: float | None = None
    macro_wer: float | None = None

    @property
    def scored(self) -> list[RecordEval]:
        return [r for r in self.records if not r.failed]

    @property
    def micro_accuracy(self) -> float | None:
        return None if self.micro_wer is None else max(0.0, 1.0 - self.micro_wer)


def evaluate_corpus(
    asr,
    corpus: Corpus,
    text_normalizer: Callable[[str], str] | None = None,
    *,
    language: str = "hi",
    workers: int = 4,
) -> EvalReport:
    """Transcribe every record and score it against its reference transcript.

    Records whose audio cannot be read, or whose backend call fails, are
    marked failed, excluded from the averages, and counted in ``failures``.
    The micro average is total errors over total reference tokens; the macro
    average is the mean of per-record rates.
    """

    def prepare(text: str) -> list[str]:
        if text_normalizer is not None:
            text = text_normalizer(text)
        return tokenize(text)

    def score(record) -> RecordEval:
        try:
            clip = AudioClip.from_wav_file(corpus.root / record.audio_path)
            hypothesis = asr.transcribe(clip, language=language)
        except Exception as exc:  # failures become report rows, not crashes
            logger.warning("record %s failed: %s", record.id, exc)
            return RecordEval(record.id, None, error=str(exc))
        return RecordEval(record.id, wer(prepare(record.transcript), prepare(hypothesis)))

    results: dict[str, RecordEval] = {}
    if corpus.records:
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            for evaluated in pool.map(score, corpus.records):
                results[evaluated.record_id] = evaluated
    ordered = tuple(results[r.id] for r in corpus.records)
    scored = [r for r in ordered if not r.failed]
    micro = macro = None
    total_ref = sum(r.breakdown.reference_length for r in scored)
    if scored and total_ref > 0:
        micro = sum(r.breakdown.errors for r in scored) / total_ref
        macro = sum(r.breakdown.rate for r in scored) / len(scored)
    return EvalReport(
        records=ordered,
        failures=len(ordered) - len(scored),
        micro_wer=micro,
        macro_wer=macro,
    )


def render_report(report: EvalReport) -> str:
    """Render the documented run-report format: a key/value header followed
    by a tab-separated per-record table."""

    def fmt(value: float | None) -> str:
        return "undefined" if value is None else f"{value:.6f}"

    lines = [
        "# dubkit ASR evaluation report",
        f"# {ACCURACY_CAVEAT}",
        f"records: {len(report.records)}",
        f"failures: {report.failures}",
        f"micro_wer: {fmt(report.micro_wer)}",
        f"macro_wer: {fmt(report.macro_wer)}",
        f"micro_accuracy: {fmt(report.micro_accuracy)}",
        "",
        "id\tref_len\tsub\tdel\tins\twer\tstatus",
    ]
    for r in report.records:
        if r.failed:
            lines.append(f"{r.record_id}\t-\t-\t-\t-\t-\tfailed: {r.error}")
        else:
            b = r.breakdown
            lines.append(
                f"{r.record_id}\t{b.reference_length}\t{b.substitutions}"
                f"\t{b.deletions}\t{b.insertions}\t{b.rate:.6f}\tok"
            )
    return "\n".join(lines) + "\n"


def write_report(report: EvalReport, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_report(report), encoding="utf-8")
    return path
