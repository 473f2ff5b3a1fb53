/** Job-page state: a snapshot plus everything learned from the event stream.
 * Pure data + reducers so the page logic is testable without a DOM. */

import type { JobView, ServerEvent } from "./types";

export interface JobPageState {
  job: JobView | null;
  /** Stage names in arrival order, as streamed. */
  stages: string[];
  /** Latest streamed status per segment index. */
  segmentStatuses: Map<number, string>;
  warnings: string[];
  connection: "connecting" | "live" | "reconnecting" | "polling" | "closed";
  lastError: string | null;
}

export function initialState(): JobPageState {
  return {
    job: null,
    stages: [],
    segmentStatuses: new Map(),
    warnings: [],
    connection: "connecting",
    lastError: null,
  };
}

export function applyEvent(state: JobPageState, event: ServerEvent): JobPageState {
  switch (event.type) {
    case "stage": {
      const stage = String(event.data.stage ?? "");
      state.stages.push(stage);
      if (state.job) state.job.stage = stage;
      break;
    }
    case "segment": {
      const index = Number(event.data.index);
      const status = String(event.data.status ?? "");
      if (Number.isInteger(index)) state.segmentStatuses.set(index, status);
      break;
    }
    case "warning":
      state.warnings.push(String(event.data.message ?? ""));
      break;
    default:
      break; // edit events etc. only matter through the next snapshot
  }
  return state;
}

export function applySnapshot(state: JobPageState, view: JobView): JobPageState {
  state.job = view;
  for (const segment of view.segments) {
    state.segmentStatuses.set(segment.index, segment.status);
  }
  return state;
}

/** True once every segment the job knows about has reached `status`. */
export function segmentsAt(state: JobPageState, status: string): number {
  let count = 0;
  for (const value of state.segmentStatuses.values()) {
    if (value === status) count += 1;
  }
  return count;
}

type Listener = (state: JobPageState) => void;

/** Minimal observable wrapper so DOM code re-renders on every change. */
export class Store {
  readonly state = initialState();
  private listeners: Listener[] = [];

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
    listener(this.state);
  }

  update(mutate: (state: JobPageState) => void): void {
    mutate(this.state);
    for (const listener of this.listeners) listener(this.state);
  }
}
