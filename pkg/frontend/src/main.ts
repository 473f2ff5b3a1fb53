/** Page glue: hash routing, DOM wiring, one event-stream per open job. */

import { apiClient } from "./api";
import { editCue, retranslateCue } from "./cues";
import { mountPlayer, seekTo } from "./player";
import { EventStream } from "./sse";
import { applyEvent, applySnapshot, Store } from "./state";
import { submitUpload } from "./upload";
import {
  escapeHtml,
  renderArtifacts,
  renderConnection,
  renderCueTable,
  renderError,
  renderJobList,
  renderSegments,
  renderStages,
  renderWarnings,
} from "./view";
import { isTerminal } from "./types";

const api = apiClient();
const app = document.getElementById("app") as HTMLElement;

let activeStream: EventStream | null = null;

function route(): void {
  activeStream?.stop();
  activeStream = null;
  const hash = window.location.hash;
  const jobMatch = /^#\/jobs\/([A-Za-z0-9_-]+)$/.exec(hash);
  if (jobMatch && jobMatch[1]) {
    void jobPage(jobMatch[1]);
  } else {
    void homePage();
  }
}

async function homePage(): Promise<void> {
  app.innerHTML = `
    <section class="upload">
      <h2>New job</h2>
      <form id="upload-form">
        <input type="file" id="file" accept="video/*,.mkv,.mp4" />
        <details>
          <summary>config overrides (JSON)</summary>
          <textarea id="config" rows="4" placeholder='{"subtitle_mode": "srt"}'></textarea>
        </details>
        <button type="submit" id="submit" disabled>upload</button>
        <p id="upload-error" class="error" hidden></p>
      </form>
    </section>
    <section class="job-list"><h2>Jobs</h2><div id="jobs">loading…</div></section>`;

  const fileInput = document.getElementById("file") as HTMLInputElement;
  const submit = document.getElementById("submit") as HTMLButtonElement;
  const errorBox = document.getElementById("upload-error") as HTMLElement;
  fileInput.addEventListener("change", () => {
    submit.disabled = !fileInput.files?.length;
  });
  (document.getElementById("upload-form") as HTMLFormElement).addEventListener(
    "submit",
    (event) => {
      event.preventDefault();
      const file = fileInput.files?.[0] ?? null;
      const configRaw =
        (document.getElementById("config") as HTMLTextAreaElement).value;
      void submitUpload(api, file, file?.name ?? "video.bin", configRaw).then(
        (result) => {
          if (result.ok && result.jobId) {
            window.location.hash = `#/jobs/${result.jobId}`;
          } else {
            errorBox.hidden = false;
            errorBox.textContent = result.error ?? "upload failed";
          }
        },
      );
    },
  );

  const jobsBox = document.getElementById("jobs") as HTMLElement;
  try {
    jobsBox.innerHTML = renderJobList(await api.listJobs());
  } catch (error) {
    jobsBox.innerHTML = `<p class="error">${escapeHtml(String(error))}</p>`;
  }
}

async function jobPage(jobId: string): Promise<void> {
  const store = new Store();
  app.innerHTML = `
    <nav><a href="#/">← jobs</a></nav>
    <h2>job ${jobId} <span id="connection"></span></h2>
    <div id="stages"></div>
    <div id="segments"></div>
    <div id="player" class="player"></div>
    <div id="artifacts"></div>
    <div id="cues"></div>
    <div id="warnings"></div>
    <div id="toast"></div>`;

  let video: HTMLVideoElement | null = null;
  let playerMounted = false;

  store.subscribe((state) => {
    byId("connection").innerHTML = renderConnection(state);
    byId("stages").innerHTML = renderStages(state);
    byId("segments").innerHTML = renderSegments(state);
    byId("cues").innerHTML = renderCueTable(state);
    byId("artifacts").innerHTML = renderArtifacts(state, (name) =>
      api.artifactUrl(jobId, name),
    );
    byId("warnings").innerHTML = renderWarnings(state);
    byId("toast").innerHTML = renderError(state);
    if (!playerMounted && state.job && isTerminal(state.job.stage)) {
      const playable = state.job.artifacts.includes("video_out")
        ? api.artifactUrl(jobId, "video_out")
        : state.job.artifacts.includes("audio")
          ? api.artifactUrl(jobId, "audio")
          : null;
      if (playable !== null) {
        playerMounted = true;
        const captions = state.job.artifacts.includes("vtt")
          ? api.artifactUrl(jobId, "vtt")
          : null;
        video = mountPlayer(byId("player"), playable, captions);
      }
    }
  });

  byId("cues").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const action = target.dataset.action;
    if (action === "seek") {
      seekTo(video, Number(target.dataset.start ?? 0));
    } else if (action === "retranslate") {
      void retranslateCue(api, store, jobId, Number(target.dataset.cue));
    } else if (action === "edit") {
      const row = target.closest("tr");
      const index = Number(row?.dataset.cue);
      const current = store.state.job?.cues[index]?.text ?? "";
      const next = window.prompt("cue text", current);
      if (next !== null && next.trim() !== "" && next !== current) {
        void editCue(api, store, jobId, index, next);
      }
    }
  });

  try {
    const view = await api.getJob(jobId);
    store.update((state) => applySnapshot(state, view));
  } catch (error) {
    store.update((state) => {
      state.lastError = String(error);
    });
    return;
  }

  activeStream = new EventStream(api, jobId, {
    onEvent: (event) => store.update((state) => applyEvent(state, event)),
    onSnapshot: (view) => store.update((state) => applySnapshot(state, view)),
    onStatus: (status) =>
      store.update((state) => {
        state.connection = status === "live" ? "live" : status;
      }),
  });
  const stream = activeStream;
  await stream.run();
  if (stream === activeStream) {
    // stream closed at a terminal stage: fetch the final snapshot once so
    // cues/artifacts reflect the finished job
    const view = await api.getJob(jobId);
    store.update((state) => applySnapshot(state, view));
  }
}

function byId(id: string): HTMLElement {
  return document.getElementById(id) as HTMLElement;
}

window.addEventListener("hashchange", route);
route();
