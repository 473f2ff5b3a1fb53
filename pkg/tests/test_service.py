"""HTTP service tests: submit/poll/artifacts, cue edits, SSE, store."""

import json
import threading
import time

import pytest
from fastapi.testclient import TestClient

from dubkit.backends.mock import MockTranslator
from dubkit.backends.types import BackendRole, ServerError
from dubkit.config import AppConfig, JobConfig, StoreConfig
from dubkit.engine import MediaTool, PipelineEngine
from dubkit.service import JobStore, StoreError
from dubkit.service.app import create_app
from dubkit.service.store import UnknownJobError
from conftest import (
    LISTING1_EN,
    LISTING1_GOLDEN,
    LISTING1_HI,
    make_video_bytes,
)


def build_service(
    tmp_path,
    backends,
    fake_media_config,
    *,
    subdir="jobs",
    pipeline=None,
    max_upload=None,
    ui_dir=None,
):
    service_kwargs = {}
    if max_upload is not None:
        from dubkit.config import ServiceConfig

        service_kwargs["service"] = ServiceConfig(max_upload_bytes=max_upload)
    config = AppConfig(
        store=StoreConfig(root=str(tmp_path / subdir)),
        media_tool=fake_media_config,
        pipeline=pipeline or JobConfig(subtitle_mode="listing1-compat"),
        **service_kwargs,
    )
    store = JobStore(config.store.root)
    engine = PipelineEngine(backends, MediaTool(fake_media_config))
    app = create_app(config, store=store, engine=engine, ui_dir=ui_dir)
    return TestClient(app), store, engine


@pytest.fixture
def service(tmp_path, listing1_backends, fake_media_config):
    client, store, engine = build_service(tmp_path, listing1_backends, fake_media_config)
    with client:
        yield client, store, engine


def submit(client, duration=33.0, config=None, filename="clip.mkv"):
    data = {}
    if config is not None:
        data["config"] = json.dumps(config)
    response = client.post(
        "/api/jobs",
        files={"file": (filename, make_video_bytes(duration), "application/octet-stream")},
        data=data,
    )
    return response


def wait_done(client, job_id, deadline=30.0):
    t0 = time.monotonic()
    while time.monotonic() - t0 < deadline:
        doc = client.get(f"/api/jobs/{job_id}").json()
        if doc["stage"] in ("done", "failed"):
            return doc
        time.sleep(0.05)
    raise AssertionError(f"job {job_id} did not reach a terminal stage in {deadline}s")


def parse_sse(text):
    events = []
    for block in text.split("\n\n"):
        if not block.strip():
            continue
        evt = {}
        for line in block.splitlines():
            key, _, value = line.partition(": ")
            evt[key] = value
        evt["data"] = json.loads(evt["data"])
        events.append(evt)
    return events


class TestSubmitAndFetch:
    def test_full_run_golden_artifact(self, service):
        client, _, _ = service
        response = submit(client)
        assert response.status_code == 201
        body = response.json()
        assert body["stage"] == "created"
        doc = wait_done(client, body["id"])
        assert doc["stage"] == "done"
        assert doc["error"] is None
        assert doc["input_video"] == "clip.mkv"
        assert [c["text"] for c in doc["cues"]] == list(LISTING1_EN)
        assert [(c["start"], c["end"]) for c in doc["cues"]] == [
            (0.0, 6.4),
            (6.4, 10.4),
            (10.4, 32.4),
        ]
        artifact = client.get(f"/api/jobs/{body['id']}/artifacts/vtt")
        assert artifact.status_code == 200
        assert artifact.headers["content-type"] == "text/vtt; charset=utf-8"
        assert artifact.content == LISTING1_GOLDEN.encode("utf-8")

    def test_audio_artifact_media_type(self, service):
        client, _, _ = service
        job_id = submit(client).json()["id"]
        wait_done(client, job_id)
        audio = client.get(f"/api/jobs/{job_id}/artifacts/audio")
        assert audio.headers["content-type"] == "audio/wav"
        assert audio.content[:4] == b"RIFF"

    def test_per_job_config_override(self, service):
        client, _, _ = service
        job_id = submit(client, config={"subtitle_mode": "webvtt-standard"}).json()["id"]
        wait_done(client, job_id)
        artifact = client.get(f"/api/jobs/{job_id}/artifacts/vtt")
        assert artifact.content.startswith(b"WEBVTT\n\n")

    def test_listing(self, service):
        client, _, _ = service
        first = submit(client).json()["id"]
        second = submit(client).json()["id"]
        wait_done(client, first)
        wait_done(client, second)
        listed = client.get("/api/jobs").json()["jobs"]
        assert {j["id"] for j in listed} >= {first, second}
        assert all(j["stage"] == "done" for j in listed)


class TestValidation:
    def test_unknown_job_404(self, service):
        client, _, _ = service
        assert client.get("/api/jobs/nope").status_code == 404
        assert client.get("/api/jobs/nope/artifacts/vtt").status_code == 404

    def test_unknown_artifact_404(self, service):
        client, _, _ = service
        job_id = submit(client).json()["id"]
        wait_done(client, job_id)
        response = client.get(f"/api/jobs/{job_id}/artifacts/mp3")
        assert response.status_code == 404
        assert "mp3" in response.json()["detail"]

    def test_artifact_missing_on_disk_404(self, service):
        client, store, _ = service
        job_id = submit(client).json()["id"]
        wait_done(client, job_id)
        (store.job_dir(job_id) / "output.vtt").unlink()
        response = client.get(f"/api/jobs/{job_id}/artifacts/vtt")
        assert response.status_code == 404
        assert "missing on disk" in response.json()["detail"]

    def test_malformed_config_400(self, service):
        client, _, _ = service
        response = client.post(
            "/api/jobs",
            files={"file": ("a.mkv", make_video_bytes(1.0), "application/octet-stream")},
            data={"config": "{not json"},
        )
        assert response.status_code == 400
        assert "malformed config" in response.json()["detail"]

    def test_unknown_config_key_named(self, service):
        client, _, _ = service
        response = submit(client, config={"moed": "srt"})
        assert response.status_code == 400
        assert "pipeline.moed" in response.json()["detail"]

    def test_empty_upload_400(self, service):
        client, _, _ = service
        response = client.post(
            "/api/jobs",
            files={"file": ("a.mkv", b"", "application/octet-stream")},
        )
        assert response.status_code == 400
        assert "empty" in response.json()["detail"]

    def test_oversized_upload_413(self, tmp_path, listing1_backends, fake_media_config):
        client, _, _ = build_service(
            tmp_path, listing1_backends, fake_media_config, max_upload=1000
        )
        response = client.post(
            "/api/jobs",
            files={"file": ("a.mkv", b"x" * 2000, "application/octet-stream")},
        )
        assert response.status_code == 413


class TestCueEdits:
    def test_patch_rewrites_artifact(self, service):
        client, _, _ = service
        job_id = submit(client).json()["id"]
        wait_done(client, job_id)
        response = client.patch(
            f"/api/jobs/{job_id}/cues/1", json={"text": "Reviewed salary line."}
        )
        assert response.status_code == 200
        assert response.json()["cues"][1]["text"] == "Reviewed salary line."
        artifact = client.get(f"/api/jobs/{job_id}/artifacts/vtt")
        expected = LISTING1_GOLDEN.replace(LISTING1_EN[1], "Reviewed salary line.")
        assert artifact.content == expected.encode("utf-8")

    def test_patch_validation(self, service):
        client, store, _ = service
        job_id = submit(client).json()["id"]
        wait_done(client, job_id)
        bad_json = client.patch(
            f"/api/jobs/{job_id}/cues/0",
            content=b"{ nope",
            headers={"Content-Type": "application/json"},
        )
        assert bad_json.status_code == 400
        empty = client.patch(f"/api/jobs/{job_id}/cues/0", json={"text": "  "})
        assert empty.status_code == 400
        out_of_range = client.patch(f"/api/jobs/{job_id}/cues/9", json={"text": "x"})
        assert out_of_range.status_code == 404
        # a job that has not rendered yet cannot be edited
        young = store.create_job(make_video_bytes(2.0), "young.mkv", JobConfig())
        conflict = client.patch(f"/api/jobs/{young.id}/cues/0", json={"text": "x"})
        assert conflict.status_code == 409

    def test_concurrent_edits_to_different_cues_both_stick(self, service):
        client, _, _ = service
        job_id = submit(client).json()["id"]
        wait_done(client, job_id)
        results = {}

        def edit(index, text):
            results[index] = client.patch(
                f"/api/jobs/{job_id}/cues/{index}", json={"text": text}
            ).status_code

        threads = [
            threading.Thread(target=edit, args=(0, "First edited cue.")),
            threading.Thread(target=edit, args=(2, "Third edited cue.")),
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert results == {0: 200, 2: 200}
        artifact = client.get(f"/api/jobs/{job_id}/artifacts/vtt").text
        assert "First edited cue." in artifact
        assert "Third edited cue." in artifact
        assert LISTING1_EN[1] in artifact  # untouched cue survives

    def test_retranslate_uses_configured_backend(
        self, tmp_path, listing1_backends, fake_media_config
    ):
        backends = dict(listing1_backends)
        table = {LISTING1_HI[i]: LISTING1_EN[i] for i in range(3)}
        backends[BackendRole.TRANSLATION] = MockTranslator(dict(table))
        client, _, engine = build_service(tmp_path, backends, fake_media_config)
        job_id = submit(client).json()["id"]
        wait_done(client, job_id)
        # the backend's table changes between runs (a "better" model)
        engine.backends[BackendRole.TRANSLATION] = MockTranslator(
            {LISTING1_HI[1]: "A better salary line."}
        )
        response = client.post(f"/api/jobs/{job_id}/cues/1/retranslate")
        assert response.status_code == 200
        assert response.json()["cues"][1]["text"] == "A better salary line."

    def test_retranslate_backend_failure_502(
        self, tmp_path, listing1_backends, fake_media_config
    ):
        class DownTranslator:
            def translate(self, text, source, target):
                raise ServerError("mt down", status=503)

        client, _, engine = build_service(tmp_path, listing1_backends, fake_media_config)
        job_id = submit(client).json()["id"]
        wait_done(client, job_id)
        engine.backends[BackendRole.TRANSLATION] = DownTranslator()
        response = client.post(f"/api/jobs/{job_id}/cues/1/retranslate")
        assert response.status_code == 502
        # old text intact
        artifact = client.get(f"/api/jobs/{job_id}/artifacts/vtt")
        assert artifact.content == LISTING1_GOLDEN.encode("utf-8")


class TestEventStream:
    def test_streams_all_stages_then_closes(self, service):
        client, _, _ = service
        job_id = submit(client).json()["id"]
        with client.stream("GET", f"/api/jobs/{job_id}/events") as response:
            assert response.headers["content-type"].startswith("text/event-stream")
            text = "".join(response.iter_text())
        events = parse_sse(text)
        ids = [int(e["id"]) for e in events]
        assert ids == sorted(ids) and len(set(ids)) == len(ids)
        stages = [e["data"]["stage"] for e in events if e["event"] == "stage"]
        assert stages == [
            "created",
            "audio_extracted",
            "diarized",
            "segmented",
            "transcribing",
            "translating",
            "rendering",
            "done",
        ]
        segment_events = [e for e in events if e["event"] == "segment"]
        assert len(segment_events) == 6

    def test_resume_with_after_param(self, service):
        client, _, _ = service
        job_id = submit(client).json()["id"]
        wait_done(client, job_id)
        with client.stream("GET", f"/api/jobs/{job_id}/events") as response:
            all_events = parse_sse("".join(response.iter_text()))
        cut = all_events[3]
        with client.stream(
            "GET", f"/api/jobs/{job_id}/events?after={cut['id']}"
        ) as response:
            resumed = parse_sse("".join(response.iter_text()))
        assert [e["id"] for e in resumed] == [e["id"] for e in all_events[4:]]

    def test_resume_with_last_event_id_header(self, service):
        client, _, _ = service
        job_id = submit(client).json()["id"]
        wait_done(client, job_id)
        with client.stream(
            "GET", f"/api/jobs/{job_id}/events", headers={"Last-Event-ID": "3"}
        ) as response:
            resumed = parse_sse("".join(response.iter_text()))
        assert int(resumed[0]["id"]) == 4

    def test_resume_past_final_event_closes_empty(self, service):
        # a finished job's log never grows, so a resume positioned at its
        # last id must close with an empty replay instead of blocking
        client, _, _ = service
        job_id = submit(client).json()["id"]
        wait_done(client, job_id)
        with client.stream("GET", f"/api/jobs/{job_id}/events") as response:
            all_events = parse_sse("".join(response.iter_text()))
        last_id = all_events[-1]["id"]
        with client.stream(
            "GET", f"/api/jobs/{job_id}/events?after={last_id}"
        ) as response:
            resumed = parse_sse("".join(response.iter_text()))
        assert resumed == []

    def test_bad_last_event_id_400(self, service):
        client, _, _ = service
        job_id = submit(client).json()["id"]
        wait_done(client, job_id)
        response = client.get(
            f"/api/jobs/{job_id}/events", headers={"Last-Event-ID": "third"}
        )
        assert response.status_code == 400

    def test_unknown_job_404(self, service):
        client, _, _ = service
        assert client.get("/api/jobs/missing/events").status_code == 404


class TestUiMount:
    def test_redirect_and_static(self, tmp_path, listing1_backends, fake_media_config):
        ui = tmp_path / "dist"
        ui.mkdir()
        (ui / "index.html").write_text("<!doctype html><title>dubkit</title>", encoding="utf-8")
        client, _, _ = build_service(
            tmp_path, listing1_backends, fake_media_config, ui_dir=ui
        )
        root = client.get("/", follow_redirects=False)
        assert root.status_code in (302, 307)
        assert root.headers["location"] == "/ui/"
        page = client.get("/ui/")
        assert page.status_code == 200
        assert "dubkit" in page.text

    def test_no_mount_without_dir(self, tmp_path, listing1_backends, fake_media_config):
        client, _, _ = build_service(tmp_path, listing1_backends, fake_media_config)
        assert client.get("/ui/", follow_redirects=False).status_code == 404


class TestStore:
    def test_create_load_delete(self, tmp_path):
        store = JobStore(tmp_path / "jobs")
        job = store.create_job(make_video_bytes(1.0), "a.mkv", JobConfig())
        assert store.exists(job.id)
        assert store.load(job.id).input_video == "input/a.mkv"
        store.delete_job(job.id)
        assert not store.exists(job.id)
        with pytest.raises(UnknownJobError):
            store.load(job.id)
        with pytest.raises(UnknownJobError):
            store.delete_job(job.id)

    def test_empty_upload_rejected(self, tmp_path):
        store = JobStore(tmp_path / "jobs")
        with pytest.raises(StoreError, match="empty"):
            store.create_job(b"", "a.mkv", JobConfig())

    def test_filename_is_sanitized(self, tmp_path):
        store = JobStore(tmp_path / "jobs")
        job = store.create_job(make_video_bytes(1.0), "../../../etc/passwd", JobConfig())
        assert job.input_video == "input/passwd"
        assert (store.job_dir(job.id) / "input" / "passwd").is_file()

    def test_listing_skips_corrupt_manifest(self, tmp_path, caplog):
        store = JobStore(tmp_path / "jobs")
        keep = store.create_job(make_video_bytes(1.0), "keep.mkv", JobConfig())
        broken = store.create_job(make_video_bytes(1.0), "broken.mkv", JobConfig())
        (store.job_dir(broken.id) / "manifest.json").write_text("{ torn", encoding="utf-8")
        listed = store.list_jobs()
        assert [j.id for j in listed] == [keep.id]

    def test_lock_identity(self, tmp_path):
        store = JobStore(tmp_path / "jobs")
        assert store.lock("a") is store.lock("a")
        assert store.lock("a") is not store.lock("b")
