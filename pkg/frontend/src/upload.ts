/** Upload form logic, DOM-free: validation + the one API call. */

import type { ApiClient } from "./api";
import { ApiError } from "./api";

export interface UploadResult {
  ok: boolean;
  jobId?: string;
  error?: string;
}

export function parseConfigInput(raw: string): Record<string, unknown> | undefined {
  const trimmed = raw.trim();
  if (trimmed === "") return undefined;
  const parsed: unknown = JSON.parse(trimmed); // may throw; caller renders it
  if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
    throw new Error("config must be a JSON object");
  }
  return parsed as Record<string, unknown>;
}

export async function submitUpload(
  api: ApiClient,
  file: Blob | null,
  filename: string,
  configRaw: string,
): Promise<UploadResult> {
  if (file === null) return { ok: false, error: "choose a video file first" };
  let config: Record<string, unknown> | undefined;
  try {
    config = parseConfigInput(configRaw);
  } catch (error) {
    return { ok: false, error: `config: ${(error as Error).message}` };
  }
  try {
    const created = await api.createJob(file, filename, config);
    return { ok: true, jobId: created.id };
  } catch (error) {
    if (error instanceof ApiError) return { ok: false, error: error.detail };
    return { ok: false, error: String(error) };
  }
}
