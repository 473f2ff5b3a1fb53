"""HTTP job service.

JSON/UTF-8 API under ``/api``; artifacts stream as files; progress is a
server-sent-event stream whose event ids are the log's monotone sequence
numbers, so ``Last-Event-ID`` (or ``?after=``) resumes without loss. The
review UI, when built, is served statically under ``/ui``.
"""

from __future__ import annotations

import asyncio
import json
import logging
import threading
from pathlib import Path

import httpx
from fastapi import FastAPI, HTTPException, Request, UploadFile
from fastapi.responses import FileResponse, RedirectResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from dubkit.backends.factory import backends_from_config
from dubkit.backends.types import BackendError
from dubkit.config import AppConfig, ConfigError, job_config_from_dict
from dubkit.engine.job import EventLog, JobError, PipelineJob, Stage
from dubkit.engine.media import MediaTool
from dubkit.engine.runner import PipelineEngine
from dubkit.service.store import JobStore, StoreError, UnknownJobError

logger = logging.getLogger("dubkit.service")

_MEDIA_TYPES = {
    "vtt": "text/vtt; charset=utf-8",
    "srt": "application/x-subrip",
    "audio": "audio/wav",
    "mp3": "audio/mpeg",
    "video_out": "application/octet-stream",
}
_UPLOAD_CHUNK = 1024 * 1024
_EVENT_POLL_SECONDS = 0.05


def job_view(job: PipelineJob) -> dict:
    cues = [
        {
            "index": i,
            "start": seg.start,
            "end": seg.end,
            "speaker": seg.speaker,
            "text": seg.translated_text or job.config.empty_segment_text or "",
        }
        for i, seg in enumerate(job.emitted_segments())
    ]
    return {
        "id": job.id,
        "stage": job.stage.value,
        "error": job.error,
        "input_video": Path(job.input_video).name,
        "created": job.created,
        "updated": job.updated,
        "config": {
            "language": job.config.language,
            "target_language": job.config.target_language,
            "subtitle_mode": job.config.subtitle_mode,
        },
        "segments": [seg.to_dict() for seg in job.segments],
        "cues": cues,
        "artifacts": sorted(job.artifacts),
        "history": list(job.history),
    }


def create_app(
    config: AppConfig,
    *,
    store: JobStore | None = None,
    engine: PipelineEngine | None = None,
    transport: httpx.BaseTransport | None = None,
    ui_dir: Path | str | None = None,
) -> FastAPI:
    store = store or JobStore(config.store.root)
    if engine is None:
        backends = backends_from_config(config.backends, transport=transport)
        engine = PipelineEngine(backends, MediaTool(config.media_tool))

    app = FastAPI(title="dubkit", version="0.1.0", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.engine = engine
    app.state.config = config

    def get_job_or_404(job_id: str) -> PipelineJob:
        try:
            return store.load(job_id)
        except UnknownJobError:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id!r}")

    def schedule(job: PipelineJob) -> None:
        thread = threading.Thread(
            target=engine.run_job, args=(job,), name=f"job-{job.id}", daemon=True
        )
        thread.start()

    @app.post("/api/jobs", status_code=201)
    async def submit_job(request: Request, file: UploadFile, config_json: str = ""):
        form = await request.form()
        raw_overrides = form.get("config") or config_json or "{}"
        try:
            overrides = json.loads(raw_overrides)
            job_config = job_config_from_dict(overrides, base=config.pipeline)
        except (json.JSONDecodeError, ConfigError) as exc:
            raise HTTPException(status_code=400, detail=f"malformed config: {exc}")

        limit = config.service.max_upload_bytes
        chunks: list[bytes] = []
        total = 0
        while True:
            chunk = await file.read(_UPLOAD_CHUNK)
            if not chunk:
                break
            total += len(chunk)
            if total > limit:
                raise HTTPException(
                    status_code=413, detail=f"upload exceeds {limit} bytes"
                )
            chunks.append(chunk)
        try:
            job = store.create_job(
                b"".join(chunks), file.filename or "video.bin", job_config
            )
        except StoreError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        schedule(job)
        return {"id": job.id, "stage": job.stage.value}

    @app.get("/api/jobs")
    def list_jobs():
        return {
            "jobs": [
                {
                    "id": j.id,
                    "stage": j.stage.value,
                    "input_video": Path(j.input_video).name,
                    "created": j.created,
                    "updated": j.updated,
                    "error": j.error,
                }
                for j in store.list_jobs()
            ]
        }

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        return job_view(get_job_or_404(job_id))

    @app.get("/api/jobs/{job_id}/artifacts/{name}")
    def get_artifact(job_id: str, name: str):
        job = get_job_or_404(job_id)
        if name not in job.artifacts:
            raise HTTPException(status_code=404, detail=f"no artifact {name!r}")
        path = job.artifact_path(name)
        if not path.is_file():
            raise HTTPException(status_code=404, detail=f"artifact {name!r} missing on disk")
        return FileResponse(
            path, media_type=_MEDIA_TYPES.get(name, "application/octet-stream")
        )

    @app.patch("/api/jobs/{job_id}/cues/{index}")
    async def update_cue(job_id: str, index: int, request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError:
            raise HTTPException(status_code=400, detail="body must be JSON")
        text = body.get("text") if isinstance(body, dict) else None
        if not isinstance(text, str) or not text.strip():
            raise HTTPException(status_code=400, detail="field 'text' must be a non-empty string")
        with store.lock(job_id):
            job = get_job_or_404(job_id)
            try:
                app.state.engine.update_cue(job, index, text)
            except IndexError as exc:
                raise HTTPException(status_code=404, detail=str(exc))
            except JobError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
        return job_view(job)

    @app.post("/api/jobs/{job_id}/cues/{index}/retranslate")
    def retranslate(job_id: str, index: int):
        with store.lock(job_id):
            job = get_job_or_404(job_id)
            try:
                app.state.engine.retranslate_cue(job, index)
            except IndexError as exc:
                raise HTTPException(status_code=404, detail=str(exc))
            except JobError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            except BackendError as exc:
                raise HTTPException(status_code=502, detail=str(exc))
        return job_view(job)

    @app.get("/api/jobs/{job_id}/events")
    async def stream_events(job_id: str, request: Request, after: int = 0):
        get_job_or_404(job_id)
        header = request.headers.get("last-event-id")
        if header is not None:
            try:
                after = int(header)
            except ValueError:
                raise HTTPException(status_code=400, detail="bad Last-Event-ID header")
        log = EventLog(store.job_dir(job_id))

        def is_final(event) -> bool:
            return event["type"] == "stage" and event.get("stage") in (
                Stage.DONE.value,
                Stage.FAILED.value,
            )

        # A log that already holds a terminal stage event will never grow, so
        # the connection is replay-only: send what the client is missing and
        # close. Without this a resume positioned at or past the terminal
        # event would hold the poll loop open forever.
        replay_only = any(is_final(event) for event in log.read())

        async def generate():
            last = after
            while True:
                for event in log.read(after=last):
                    last = event["seq"]
                    payload = json.dumps(event, ensure_ascii=False)
                    yield f"id: {event['seq']}\nevent: {event['type']}\ndata: {payload}\n\n"
                    if is_final(event):
                        return
                if replay_only or await request.is_disconnected():
                    return
                await asyncio.sleep(_EVENT_POLL_SECONDS)

        return StreamingResponse(
            generate(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

        @app.get("/", include_in_schema=False)
        def index():
            return RedirectResponse(url="/ui/")

    return app
