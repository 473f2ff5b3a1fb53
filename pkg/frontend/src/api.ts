/** Typed wrappers over the documented HTTP API, one function per endpoint. */

import type { JobSummary, JobView } from "./types";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

async function fail(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { detail?: string };
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) await fail(response);
  return (await response.json()) as T;
}

export interface ApiClient {
  listJobs(): Promise<JobSummary[]>;
  createJob(
    file: Blob,
    filename: string,
    config?: Record<string, unknown>,
  ): Promise<{ id: string; stage: string }>;
  getJob(id: string): Promise<JobView>;
  artifactUrl(id: string, name: string): string;
  fetchArtifact(id: string, name: string): Promise<Uint8Array>;
  updateCue(id: string, index: number, text: string): Promise<JobView>;
  retranslateCue(id: string, index: number): Promise<JobView>;
  eventsUrl(id: string, after?: number): string;
}

export function apiClient(base = ""): ApiClient {
  return {
    async listJobs() {
      const doc = await asJson<{ jobs: JobSummary[] }>(
        await fetch(`${base}/api/jobs`),
      );
      return doc.jobs;
    },

    async createJob(file, filename, config) {
      const form = new FormData();
      form.append("file", file, filename);
      if (config !== undefined) form.append("config", JSON.stringify(config));
      return asJson(await fetch(`${base}/api/jobs`, { method: "POST", body: form }));
    },

    async getJob(id) {
      return asJson(await fetch(`${base}/api/jobs/${id}`));
    },

    artifactUrl(id, name) {
      return `${base}/api/jobs/${id}/artifacts/${name}`;
    },

    async fetchArtifact(id, name) {
      const response = await fetch(this.artifactUrl(id, name));
      if (!response.ok) await fail(response);
      return new Uint8Array(await response.arrayBuffer());
    },

    async updateCue(id, index, text) {
      return asJson(
        await fetch(`${base}/api/jobs/${id}/cues/${index}`, {
          method: "PATCH",
          headers: { "content-type": "application/json" },
          body: JSON.stringify({ text }),
        }),
      );
    },

    async retranslateCue(id, index) {
      return asJson(
        await fetch(`${base}/api/jobs/${id}/cues/${index}/retranslate`, {
          method: "POST",
        }),
      );
    },

    eventsUrl(id, after = 0) {
      return after > 0
        ? `${base}/api/jobs/${id}/events?after=${after}`
        : `${base}/api/jobs/${id}/events`;
    },
  };
}
