/** Mirrors of the service's JSON schemas. The UI never invents fields:
 * everything rendered comes from these payloads or from the event stream. */

export interface JobSummary {
  id: string;
  stage: string;
  input_video: string;
  created: string;
  updated: string;
  error: string | null;
}

export interface CueView {
  index: number;
  start: number;
  end: number;
  speaker: string;
  text: string;
}

export interface SegmentView {
  index: number;
  start: number;
  end: number;
  speaker: string;
  source_text: string;
  translated_text: string;
  status: string;
  error: string | null;
}

export interface JobView {
  id: string;
  stage: string;
  error: string | null;
  input_video: string;
  created: string;
  updated: string;
  config: { language: string; target_language: string; subtitle_mode: string };
  segments: SegmentView[];
  cues: CueView[];
  artifacts: string[];
  history: string[];
}

/** One server-sent event, decoded. `data` carries the full event record
 * including its sequence number; `id` repeats that number as the SSE id. */
export interface ServerEvent {
  id: number;
  type: string;
  data: Record<string, unknown>;
}

export const TERMINAL_STAGES = ["done", "failed"];

export function isTerminal(stage: string): boolean {
  return TERMINAL_STAGES.includes(stage);
}
