/** HTML renderers: pure functions from state to markup strings. Event
 * handlers are bound by main.ts via delegation on data-* attributes. */

import type { JobPageState } from "./state";
import type { CueView, JobSummary } from "./types";
import { isTerminal } from "./types";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function formatClock(t: number): string {
  // Display only; exported timestamps always come from the service.
  const ms = Math.floor(t * 1000 + 0.5);
  const s = Math.floor(ms / 1000);
  const mm = String(Math.floor(s / 60)).padStart(2, "0");
  const ss = String(s % 60).padStart(2, "0");
  return `${mm}:${ss}.${String(ms % 1000).padStart(3, "0")}`;
}

export function renderJobList(jobs: JobSummary[]): string {
  if (jobs.length === 0) return `<p class="empty">No jobs yet.</p>`;
  const rows = jobs
    .map(
      (job) => `
      <tr>
        <td><a href="#/jobs/${job.id}">${job.id}</a></td>
        <td><span class="stage stage-${job.stage}">${job.stage}</span></td>
        <td>${escapeHtml(job.input_video)}</td>
        <td>${escapeHtml(job.updated)}</td>
      </tr>`,
    )
    .join("");
  return `<table class="jobs"><thead><tr>
    <th>job</th><th>stage</th><th>input</th><th>updated</th>
  </tr></thead><tbody>${rows}</tbody></table>`;
}

export function renderStages(state: JobPageState): string {
  const chips = state.stages
    .map((stage) => `<li class="stage stage-${stage}">${stage}</li>`)
    .join("");
  return `<ol class="stage-track">${chips}</ol>`;
}

export function renderSegments(state: JobPageState): string {
  const entries = [...state.segmentStatuses.entries()].sort((a, b) => a[0] - b[0]);
  if (entries.length === 0) return `<p class="empty">No segments yet.</p>`;
  const chips = entries
    .map(
      ([index, status]) =>
        `<li class="segment seg-${status}" data-segment="${index}">` +
        `#${index} ${status}</li>`,
    )
    .join("");
  return `<ul class="segment-chips">${chips}</ul>`;
}

export function renderConnection(state: JobPageState): string {
  const label =
    state.connection === "closed" && state.job && isTerminal(state.job.stage)
      ? "finished"
      : state.connection;
  return `<span class="connection connection-${state.connection}">${label}</span>`;
}

export function renderCueRow(cue: CueView): string {
  return `<tr data-cue="${cue.index}">
    <td class="cue-time" data-action="seek" data-start="${cue.start}">
      ${formatClock(cue.start)} → ${formatClock(cue.end)}
    </td>
    <td class="cue-speaker">${escapeHtml(cue.speaker)}</td>
    <td class="cue-text" data-action="edit">${escapeHtml(cue.text)}</td>
    <td class="cue-actions">
      <button data-action="retranslate" data-cue="${cue.index}">retranslate</button>
    </td>
  </tr>`;
}

export function renderCueTable(state: JobPageState): string {
  const job = state.job;
  if (!job || job.cues.length === 0) {
    return `<p class="empty">Cues appear when the job reaches rendering.</p>`;
  }
  return `<table class="cues"><thead><tr>
      <th>time</th><th>speaker</th><th>text</th><th></th>
    </tr></thead>
    <tbody>${job.cues.map(renderCueRow).join("")}</tbody></table>`;
}

export function renderArtifacts(state: JobPageState, urlFor: (name: string) => string): string {
  const job = state.job;
  if (!job || job.artifacts.length === 0) return "";
  const links = job.artifacts
    .map(
      (name) =>
        `<a class="artifact" download href="${urlFor(name)}">${name}</a>`,
    )
    .join(" ");
  return `<div class="artifacts">export: ${links}</div>`;
}

export function renderWarnings(state: JobPageState): string {
  if (state.warnings.length === 0) return "";
  const items = state.warnings
    .map((message) => `<li>${escapeHtml(message)}</li>`)
    .join("");
  return `<ul class="warnings">${items}</ul>`;
}

export function renderError(state: JobPageState): string {
  if (!state.lastError) return "";
  return `<div class="toast error">${escapeHtml(state.lastError)}</div>`;
}
