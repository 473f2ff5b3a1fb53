import random

import pytest

from dubkit.backends.mock import MockTranscriber
from dubkit.metrics import (
    ACCURACY_CAVEAT,
    EvalReport,
    WerBreakdown,
    evaluate_corpus,
    normalize_text,
    render_report,
    tokenize,
    wer,
    write_report,
)
from wer_oracle import all_token_lists, oracle_wer, random_pair

ABC = ("a", "b", "c")


# -- oracle agreement (reduced grid here; the exhaustive run is in acceptance) --


def test_wer_matches_oracle_on_small_grid():
    lists = list(all_token_lists(ABC, 3))
    for ref in lists:
        for hyp in lists:
            got = wer(list(ref), list(hyp))
            assert (
                got.errors,
                got.substitutions,
                got.deletions,
                got.insertions,
            ) == oracle_wer(ref, hyp), (ref, hyp)


def test_wer_matches_oracle_on_random_pairs():
    rng = random.Random(99)
    for _ in range(300):
        ref, hyp = random_pair(rng, ("x", "y", "z", "w"), 8)
        got = wer(list(ref), list(hyp))
        assert (
            got.errors,
            got.substitutions,
            got.deletions,
            got.insertions,
        ) == oracle_wer(ref, hyp), (ref, hyp)


# -- hand-checked cases -----------------------------------------------------------


def test_identical_sequences():
    b = wer(["a", "b", "c"], ["a", "b", "c"])
    assert (b.substitutions, b.deletions, b.insertions, b.rate) == (0, 0, 0, 0.0)
    assert b.accuracy == 1.0


def test_single_substitution():
    b = wer(["a", "b", "c"], ["a", "x", "c"])
    assert (b.substitutions, b.deletions, b.insertions) == (1, 0, 0)
    assert b.rate == pytest.approx(1 / 3)


def test_all_deleted():
    b = wer(["a", "b"], [])
    assert (b.substitutions, b.deletions, b.insertions, b.rate) == (0, 2, 0, 1.0)


def test_pure_insertion():
    b = wer(["a"], ["a", "b", "c"])
    assert (b.substitutions, b.deletions, b.insertions) == (0, 0, 2)
    assert b.rate == 2.0  # rate may exceed 1; accuracy floors at 0
    assert b.accuracy == 0.0


def test_tie_prefers_substitution():
    b = wer(["a"], ["b"])
    assert (b.substitutions, b.deletions, b.insertions) == (1, 0, 0)


def test_swap_symmetry():
    rng = random.Random(5)
    for _ in range(200):
        ref, hyp = random_pair(rng, ABC, 6)
        if not ref or not hyp:
            continue
        fwd, rev = wer(list(ref), list(hyp)), wer(list(hyp), list(ref))
        assert fwd.substitutions == rev.substitutions
        assert (fwd.deletions, fwd.insertions) == (rev.insertions, rev.deletions)


def test_empty_both():
    b = wer([], [])
    assert b.rate == 0.0 and not b.degenerate


def test_empty_reference_is_degenerate():
    b = wer([], ["a", "b"])
    assert b.degenerate
    assert b.rate == 2.0
    assert (b.substitutions, b.deletions, b.insertions) == (0, 0, 2)


# -- text preparation ---------------------------------------------------------------


def test_tokenize_is_whitespace_split():
    assert tokenize(" नमस्ते  दुनिया \n") == ["नमस्ते", "दुनिया"]


def test_normalize_strips_punctuation():
    assert normalize_text("वह घर गया।") == "वह घर गया"
    assert normalize_text("a, b. c!") == "a b c"


def test_normalize_nfc_composes():
    decomposed = "क़"  # ka + nukta
    composed = "क़"  # qa
    assert normalize_text(decomposed) == normalize_text(composed)


def test_normalize_flags_off():
    assert normalize_text("a, b", strip_punctuation=False) == "a, b"


# -- corpus evaluation ----------------------------------------------------------------


def freeze_words(n: int, offset: int = 0) -> list[str]:
    return [f"w{offset + i:04d}" for i in range(n)]


def corrupt_every_fourth(words: list[str]) -> list[str]:
    return [f"x{w}" if i % 4 == 3 else w for i, w in enumerate(words)]


def build_quarter_error_corpus(lj_corpus):
    """10 records x 20 globally distinct words; ASR corrupts every 4th word."""
    corpus = lj_corpus(10, transcript="placeholder {i}")
    records = []
    transcripts = {}
    for i, record in enumerate(corpus.records):
        words = freeze_words(20, offset=20 * i)
        records.append(
            type(record)(
                id=record.id,
                audio_path=record.audio_path,
                transcript=" ".join(words),
                duration=record.duration,
                split=record.split,
            )
        )
        transcripts[record.id] = " ".join(corrupt_every_fourth(words))
    corpus = type(corpus)(root=corpus.root, records=tuple(records), layout=corpus.layout)
    return corpus, MockTranscriber(transcripts)


def test_synthetic_quarter_error_corpus(lj_corpus):
    corpus, asr = build_quarter_error_corpus(lj_corpus)
    report = evaluate_corpus(asr, corpus)
    assert report.failures == 0
    assert report.micro_wer == 0.25
    assert report.macro_wer == 0.25
    assert report.micro_accuracy == 0.75


def test_evaluate_excludes_failures_from_averages(lj_corpus):
    corpus, asr = build_quarter_error_corpus(lj_corpus)
    # making one audio file unreadable turns that record into a failure row
    (corpus.root / corpus.records[0].audio_path).write_bytes(b"not a wav")
    report = evaluate_corpus(asr, corpus)
    assert report.failures == 1
    assert report.records[0].failed and report.records[0].error
    assert report.micro_wer == 0.25  # remaining 180 words, 45 errors


def test_evaluate_empty_corpus(lj_corpus):
    corpus = lj_corpus(0)
    report = evaluate_corpus(MockTranscriber({}), corpus)
    assert report.micro_wer is None and report.macro_wer is None
    assert report.micro_accuracy is None


def test_evaluate_is_deterministic_across_worker_counts(lj_corpus):
    corpus, asr = build_quarter_error_corpus(lj_corpus)
    sequential = evaluate_corpus(asr, corpus, workers=1)
    parallel = evaluate_corpus(asr, corpus, workers=7)
    assert render_report(sequential) == render_report(parallel)


def test_report_contains_caveat_and_rows(lj_corpus, tmp_path):
    corpus, asr = build_quarter_error_corpus(lj_corpus)
    report = evaluate_corpus(asr, corpus)
    text = render_report(report)
    assert ACCURACY_CAVEAT in text
    assert "micro_wer: 0.250000" in text
    assert text.count("\tok") == 10
    out = write_report(report, tmp_path / "report.txt")
    assert out.read_text(encoding="utf-8") == text


def test_report_formats_undefined_averages():
    text = render_report(EvalReport())
    assert "micro_wer: undefined" in text
