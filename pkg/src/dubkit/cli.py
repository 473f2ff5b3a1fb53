"""Operator CLI. Every verb goes through the same internals as the HTTP API."""

from __future__ import annotations

import json
import shutil
import sys
from pathlib import Path

import click

import dubkit
from dubkit.audio import AudioClip
from dubkit.backends.factory import backend_from_config, backends_from_config
from dubkit.backends.types import BackendRole, ConversionParams
from dubkit.config import AppConfig, ConfigError, job_config_from_dict, load_config
from dubkit.engine.media import MediaTool
from dubkit.engine.runner import PipelineEngine
from dubkit.forge import (
    CorpusError,
    convert_corpus,
    emit_finetune_config,
    export_commonvoice_like,
    ingest_long_audio,
    read_commonvoice_like,
    read_lj,
    split_train_valid,
    verify_corpus,
    write_lj,
)
from dubkit.metrics import evaluate_corpus, render_report, write_report
from dubkit.service.store import JobStore


def _load_app_config(path: str | None) -> AppConfig:
    try:
        return load_config(path)
    except (ConfigError, FileNotFoundError) as exc:
        raise click.ClickException(str(exc))


def _store_and_engine(cfg: AppConfig) -> tuple[JobStore, PipelineEngine]:
    store = JobStore(cfg.store.root)
    engine = PipelineEngine(
        backends_from_config(cfg.backends), MediaTool(cfg.media_tool)
    )
    return store, engine


def _read_corpus(root: Path, *, strict: bool = True):
    # strict=False defers unreadable audio to the caller (verify reports it,
    # eval records it as a per-record failure) instead of aborting the load.
    try:
        if (root / "train.txt").exists():
            return read_lj(root, strict=strict)
        if (root / "train.tsv").exists():
            return read_commonvoice_like(root, strict=strict)
    except CorpusError as exc:
        raise click.ClickException(str(exc))
    raise click.ClickException(f"{root} has neither train.txt nor train.tsv")


@click.group()
@click.version_option(version=dubkit.__version__, prog_name="dubkit")
@click.option(
    "--config",
    "-c",
    "config_path",
    envvar="DUBKIT_CONFIG",
    type=click.Path(exists=True, dir_okay=False),
    help="Path to the YAML config file.",
)
@click.pass_context
def main(ctx: click.Context, config_path: str | None) -> None:
    ctx.obj = _load_app_config(config_path)


# -- subtitle ---------------------------------------------------------------


@main.group()
def subtitle() -> None:
    """Run the video → subtitled-output pipeline."""


@subtitle.command("run")
@click.argument("video", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--mode", type=str, default=None, help="Subtitle serialization mode.")
@click.option("--language", default=None, help="Source language code.")
@click.option("--merge/--no-merge", "merge", default=None, help="Merge same-speaker segments.")
@click.option("--emit-srt", is_flag=True, default=False)
@click.option("--mux", is_flag=True, default=False)
@click.pass_obj
def subtitle_run(
    cfg: AppConfig,
    video: Path,
    mode: str | None,
    language: str | None,
    merge: bool | None,
    emit_srt: bool,
    mux: bool,
) -> None:
    overrides: dict = {}
    if mode is not None:
        overrides["subtitle_mode"] = mode
    if language is not None:
        overrides["language"] = language
    if merge is not None:
        overrides["merge_segments"] = merge
    if emit_srt:
        overrides["emit_srt"] = True
    if mux:
        overrides["mux"] = True
    try:
        job_config = job_config_from_dict(overrides, base=cfg.pipeline)
    except ConfigError as exc:
        raise click.ClickException(str(exc))
    store, engine = _store_and_engine(cfg)
    job = store.create_job(video, video.name, job_config)
    click.echo(f"job {job.id}")
    engine.run_job(job)
    if job.error:
        raise click.ClickException(f"job failed at {job.error}")
    for name in sorted(job.artifacts):
        click.echo(f"{name}\t{job.artifact_path(name)}")


# -- forge --------------------------------------------------------------------


@main.group()
def forge() -> None:
    """Corpus workbench: ingest, split, convert, export, verify."""


@forge.command("ingest")
@click.argument("audio", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("out_root", type=click.Path(path_type=Path))
@click.option("--language", default=None)
@click.option("--min-total", type=float, default=600.0, show_default=True,
              help="Warn when total speech falls below this many seconds.")
@click.pass_obj
def forge_ingest(
    cfg: AppConfig, audio: Path, out_root: Path, language: str | None, min_total: float
) -> None:
    backends = backends_from_config(cfg.backends)
    try:
        diarizer = backends[BackendRole.DIARIZATION]
        transcriber = backends[BackendRole.ASR]
    except KeyError as exc:
        raise click.ClickException(f"config has no {exc.args[0].value} backend")
    corpus = ingest_long_audio(
        AudioClip.from_wav_file(audio),
        diarizer,
        transcriber,
        out_root,
        language=language or cfg.pipeline.language,
        min_total=min_total,
    )
    click.echo(f"ingested {len(corpus.records)} records "
               f"({corpus.total_duration:.1f}s) into {out_root}")


@forge.command("split")
@click.argument("root", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--valid-fraction", type=float, default=None,
              help="Fraction of records assigned to valid (default from config).")
@click.option("--seed", type=int, default=None,
              help="Shuffle seed; required here or in config (forge.split_seed).")
@click.pass_obj
def forge_split(
    cfg: AppConfig, root: Path, valid_fraction: float | None, seed: int | None
) -> None:
    if seed is None:
        seed = cfg.forge.split_seed
    if seed is None:
        raise click.ClickException(
            "a split seed is required (--seed or forge.split_seed in the config)"
        )
    fraction = cfg.forge.valid_fraction if valid_fraction is None else valid_fraction
    corpus = split_train_valid(_read_corpus(root), fraction, seed)
    if corpus.layout.value == "lj":
        write_lj(corpus)
    else:
        export_commonvoice_like(corpus, corpus.root)
    train = sum(1 for r in corpus.records if r.split.value == "train")
    valid = len(corpus.records) - train
    click.echo(f"split {len(corpus.records)} records: {train} train / {valid} valid (seed {seed})")


@forge.command("convert")
@click.argument("root", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.argument("out_root", type=click.Path(path_type=Path))
@click.option("--volume-envelope", type=float, default=None)
@click.option("--filter-radius", type=int, default=None)
@click.option("--index-ratio", type=float, default=None)
@click.option("--protect", type=float, default=None)
@click.option("--target-rate", type=int, default=None)
@click.pass_obj
def forge_convert(
    cfg: AppConfig,
    root: Path,
    out_root: Path,
    volume_envelope: float | None,
    filter_radius: int | None,
    index_ratio: float | None,
    protect: float | None,
    target_rate: int | None,
) -> None:
    if "voice_conversion" not in cfg.backends:
        raise click.ClickException("config has no voice_conversion backend")
    vc = backend_from_config("voice_conversion", cfg.backends["voice_conversion"])
    overrides = dict(cfg.forge.conversion)
    for key, value in (
        ("volume_envelope", volume_envelope),
        ("filter_radius", filter_radius),
        ("index_ratio", index_ratio),
        ("protect", protect),
        ("target_sample_rate", target_rate),
    ):
        if value is not None:
            overrides[key] = value
    try:
        params = ConversionParams(**overrides)
    except (TypeError, ValueError) as exc:
        raise click.ClickException(str(exc))
    corpus = convert_corpus(
        _read_corpus(root),
        vc,
        params,
        out_root,
        workers=cfg.forge.workers,
        failure_threshold=cfg.forge.failure_threshold,
    )
    click.echo(f"converted {len(corpus.records)} records into {out_root}")


@forge.command("export")
@click.argument("root", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.argument("out_root", type=click.Path(path_type=Path))
def forge_export(root: Path, out_root: Path) -> None:
    try:
        corpus = read_lj(root)
    except CorpusError as exc:
        raise click.ClickException(str(exc))
    export_commonvoice_like(corpus, out_root)
    click.echo(f"exported {len(corpus.records)} records to {out_root}")


@forge.command("verify")
@click.argument("root", type=click.Path(exists=True, file_okay=False, path_type=Path))
def forge_verify(root: Path) -> None:
    problems = verify_corpus(_read_corpus(root, strict=False))
    for problem in problems:
        click.echo(problem)
    if problems:
        raise SystemExit(1)
    click.echo("ok")


@forge.command("finetune-config")
@click.argument("out_path", type=click.Path(path_type=Path))
@click.option("--dataset", type=click.Path(path_type=Path), default=None,
              help="LJ-corpus root recorded in the file.")
@click.option("--set", "assignments", multiple=True, metavar="KEY=VALUE",
              help="Override a hyperparameter; repeatable.")
def forge_finetune_config(
    out_path: Path, dataset: Path | None, assignments: tuple[str, ...]
) -> None:
    overrides: dict = {}
    for assignment in assignments:
        if "=" not in assignment:
            raise click.ClickException(f"expected KEY=VALUE, got {assignment!r}")
        key, raw = assignment.split("=", 1)
        try:
            overrides[key] = json.loads(raw)
        except json.JSONDecodeError:
            overrides[key] = raw
    try:
        emit_finetune_config(out_path, overrides, dataset)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    click.echo(str(out_path))


# -- eval ---------------------------------------------------------------------


@main.group(name="eval")
def eval_group() -> None:
    """Accuracy evaluation of an ASR backend against a reference corpus."""


@eval_group.command("run")
@click.argument("root", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--report", "report_path", type=click.Path(path_type=Path), default=None,
              help="Write the report here as well as printing it.")
@click.pass_obj
def eval_run(cfg: AppConfig, root: Path, report_path: Path | None) -> None:
    if "asr" not in cfg.backends:
        raise click.ClickException("config has no asr backend")
    asr = backend_from_config("asr", cfg.backends["asr"])
    corpus = _read_corpus(root, strict=False)
    report = evaluate_corpus(
        asr, corpus, language=cfg.eval.language, workers=cfg.eval.workers
    )
    click.echo(render_report(report), nl=False)
    if report_path is not None:
        write_report(report, report_path)
    if report.failures:
        raise SystemExit(1)


# -- service & jobs ------------------------------------------------------------


@main.command()
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--ui-dir", type=click.Path(file_okay=False, path_type=Path),
              default=None, help="Static review-UI directory to serve at /ui.")
@click.pass_obj
def serve(cfg: AppConfig, host: str | None, port: int | None, ui_dir: Path | None) -> None:
    """Run the HTTP job service."""
    import uvicorn

    from dubkit.service.app import create_app

    if ui_dir is None:
        candidate = Path.cwd() / "frontend" / "dist"
        ui_dir = candidate if candidate.is_dir() else None
    app = create_app(cfg, ui_dir=ui_dir)
    uvicorn.run(
        app,
        host=host or cfg.service.host,
        port=port or cfg.service.port,
        log_level="info",
    )


@main.group()
def jobs() -> None:
    """Inspect and export pipeline jobs."""


@jobs.command("ls")
@click.pass_obj
def jobs_ls(cfg: AppConfig) -> None:
    store = JobStore(cfg.store.root)
    for job in store.list_jobs():
        click.echo(f"{job.id}\t{job.stage.value}\t{Path(job.input_video).name}\t{job.created}")


@jobs.command("show")
@click.argument("job_id")
@click.pass_obj
def jobs_show(cfg: AppConfig, job_id: str) -> None:
    from dubkit.service.app import job_view

    store = JobStore(cfg.store.root)
    try:
        job = store.load(job_id)
    except KeyError:
        raise click.ClickException(f"unknown job {job_id!r}")
    click.echo(json.dumps(job_view(job), ensure_ascii=False, indent=2))


@jobs.command("export")
@click.argument("job_id")
@click.option("--what", default="vtt", show_default=True,
              help="Artifact name: vtt, srt, audio, mp3, video_out.")
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None)
@click.pass_obj
def jobs_export(cfg: AppConfig, job_id: str, what: str, out_path: Path | None) -> None:
    store = JobStore(cfg.store.root)
    try:
        job = store.load(job_id)
    except KeyError:
        raise click.ClickException(f"unknown job {job_id!r}")
    if what == "mp3" and "mp3" not in job.artifacts:
        _, engine = _store_and_engine(cfg)
        engine.export_mp3(job)
    if what not in job.artifacts:
        raise click.ClickException(
            f"job has no {what!r} artifact (available: {', '.join(sorted(job.artifacts))})"
        )
    source = job.artifact_path(what)
    if out_path is None:
        click.echo(str(source))
    else:
        shutil.copyfile(source, out_path)
        click.echo(str(out_path))


if __name__ == "__main__":
    main()
