"""Emit the hyperparameter file consumed by an external fine-tuning run.

Nothing here trains a model; the artifact is a documented YAML file with
the known-good defaults plus dataset paths.
"""

from __future__ import annotations

from pathlib import Path
from types import MappingProxyType
from typing import Any

import yaml

FINETUNE_DEFAULTS = MappingProxyType(
    {
        "epochs": 40,
        "learning_rate": 1e-4,
        "weight_decay": 2.5e-6,
        "rvc_epochs": 200,
        "rvc_batch_size": 40,
        "language": "hi",
    }
)

_TYPES: dict[str, tuple[type, ...]] = {
    "epochs": (int,),
    "learning_rate": (int, float),
    "weight_decay": (int, float),
    "rvc_epochs": (int,),
    "rvc_batch_size": (int,),
    "language": (str,),
}

_HEADER = """\
# Fine-tuning run configuration.
#
# This file is an input for an external trainer; nothing in this toolkit
# consumes it besides tests. `epochs`, `learning_rate` and `weight_decay`
# drive the acoustic-model fine-tune; `rvc_*` describe the voice-conversion
# training stage. `dataset` points at an LJ-layout corpus.
"""


class FinetuneConfigError(ValueError):
    pass


def build_finetune_config(
    overrides: dict[str, Any] | None = None, dataset_root: str | Path | None = None
) -> dict[str, Any]:
    overrides = dict(overrides or {})
    unknown = sorted(set(overrides) - set(FINETUNE_DEFAULTS))
    if unknown:
        raise FinetuneConfigError(
            f"unknown fine-tune option(s): {', '.join(unknown)}; "
            f"valid keys are: {', '.join(sorted(FINETUNE_DEFAULTS))}"
        )
    for key, value in overrides.items():
        if isinstance(value, bool) or not isinstance(value, _TYPES[key]):
            expected = " or ".join(t.__name__ for t in _TYPES[key])
            raise FinetuneConfigError(f"{key} must be {expected}, got {value!r}")
    config: dict[str, Any] = {**FINETUNE_DEFAULTS, **overrides}
    if dataset_root is not None:
        root = Path(dataset_root)
        config["dataset"] = {
            "root": str(root),
            "train": str(root / "train.txt"),
            "valid": str(root / "valid.txt"),
            "wavs": str(root / "wavs"),
        }
    return config


def emit_finetune_config(
    out_path: str | Path,
    overrides: dict[str, Any] | None = None,
    dataset_root: str | Path | None = None,
) -> Path:
    """Write the config file and return its path."""
    config = build_finetune_config(overrides, dataset_root)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    body = yaml.safe_dump(config, sort_keys=True, allow_unicode=True)
    out_path.write_text(_HEADER + body, encoding="utf-8")
    return out_path
