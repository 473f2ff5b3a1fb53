"""Filesystem job store: one directory per job, manifest as the only index.

There is no separate index file to drift out of sync — listing the store is
defined as "the set of loadable manifests on disk". Manifests are written
atomically (see :mod:`dubkit.engine.job`), so a reader never sees a torn
one; directories whose manifest is missing (a crash between mkdir and the
first save) are skipped.
"""

from __future__ import annotations

import logging
import shutil
import threading
import uuid
from pathlib import Path

from dubkit.config import JobConfig
from dubkit.engine.job import EventLog, JobError, PipelineJob, Stage

logger = logging.getLogger("dubkit.service")


class StoreError(ValueError):
    pass


class UnknownJobError(KeyError):
    pass


class JobStore:
    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def lock(self, job_id: str) -> threading.Lock:
        """Per-job mutation lock; callers serialize edits through this."""
        with self._locks_guard:
            return self._locks.setdefault(job_id, threading.Lock())

    def job_dir(self, job_id: str) -> Path:
        return self.root / job_id

    def exists(self, job_id: str) -> bool:
        return (self.job_dir(job_id) / "manifest.json").is_file()

    def load(self, job_id: str) -> PipelineJob:
        if not self.exists(job_id):
            raise UnknownJobError(job_id)
        return PipelineJob.load(self.job_dir(job_id))

    def list_jobs(self) -> list[PipelineJob]:
        jobs: list[PipelineJob] = []
        for child in sorted(self.root.iterdir()):
            if not child.is_dir():
                continue
            try:
                jobs.append(PipelineJob.load(child))
            except JobError:
                logger.warning("skipping %s: no readable manifest", child.name)
        jobs.sort(key=lambda j: (j.created, j.id))
        return jobs

    def create_job(
        self,
        video: bytes | Path,
        filename: str,
        config: JobConfig | None = None,
    ) -> PipelineJob:
        """Persist the upload and the initial manifest; emits the first event."""
        if isinstance(video, Path):
            data = video.read_bytes()
            filename = filename or video.name
        else:
            data = video
        if not data:
            raise StoreError("uploaded video is empty")
        safe_name = Path(filename).name or "video.bin"
        job_id = uuid.uuid4().hex[:12]
        job_dir = self.job_dir(job_id)
        (job_dir / "input").mkdir(parents=True)
        (job_dir / "input" / safe_name).write_bytes(data)
        job = PipelineJob(
            id=job_id,
            job_dir=job_dir,
            input_video=f"input/{safe_name}",
            config=config or JobConfig(),
        )
        job.save()
        EventLog(job_dir).emit("stage", stage=Stage.CREATED.value)
        return job

    def delete_job(self, job_id: str) -> None:
        if not self.exists(job_id):
            raise UnknownJobError(job_id)
        shutil.rmtree(self.job_dir(job_id))
        with self._locks_guard:
            self._locks.pop(job_id, None)
