"""Speech-corpus workbench: ingest, layouts, splitting, batch voice conversion."""

from dubkit.forge.corpus import (
    Corpus,
    CorpusError,
    CorpusLayout,
    CorpusRecord,
    Split,
    export_commonvoice_like,
    read_commonvoice_like,
    read_lj,
    verify_corpus,
    write_lj,
)
from dubkit.forge.finetune import (
    FINETUNE_DEFAULTS,
    FinetuneConfigError,
    build_finetune_config,
    emit_finetune_config,
)
from dubkit.forge.ops import (
    ConvertCorpusError,
    EmptyCorpusError,
    convert_corpus,
    corpus_digest,
    ingest_long_audio,
    split_train_valid,
)

__all__ = [
    "Corpus",
    "CorpusError",
    "CorpusLayout",
    "CorpusRecord",
    "Split",
    "ConvertCorpusError",
    "EmptyCorpusError",
    "FINETUNE_DEFAULTS",
    "FinetuneConfigError",
    "build_finetune_config",
    "convert_corpus",
    "corpus_digest",
    "emit_finetune_config",
    "export_commonvoice_like",
    "ingest_long_audio",
    "read_commonvoice_like",
    "read_lj",
    "split_train_valid",
    "verify_corpus",
    "write_lj",
]
