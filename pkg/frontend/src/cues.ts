/** Cue edit/retranslate interactions: optimistic update, server reconcile.
 * Failed calls restore the previous text and surface the error. */

import type { ApiClient } from "./api";
import { ApiError } from "./api";
import type { Store } from "./state";
import { applySnapshot } from "./state";

function describe(error: unknown): string {
  return error instanceof ApiError ? error.detail : String(error);
}

export async function editCue(
  api: ApiClient,
  store: Store,
  jobId: string,
  index: number,
  text: string,
): Promise<boolean> {
  const job = store.state.job;
  const cue = job?.cues[index];
  if (!job || !cue) return false;
  const previous = cue.text;
  store.update((state) => {
    const target = state.job?.cues[index];
    if (target) target.text = text; // optimistic
    state.lastError = null;
  });
  try {
    const view = await api.updateCue(jobId, index, text);
    store.update((state) => applySnapshot(state, view));
    return true;
  } catch (error) {
    store.update((state) => {
      const target = state.job?.cues[index];
      if (target) target.text = previous;
      state.lastError = `edit failed: ${describe(error)}`;
    });
    return false;
  }
}

export async function retranslateCue(
  api: ApiClient,
  store: Store,
  jobId: string,
  index: number,
): Promise<boolean> {
  store.update((state) => {
    state.lastError = null;
  });
  try {
    const view = await api.retranslateCue(jobId, index);
    store.update((state) => applySnapshot(state, view));
    return true;
  } catch (error) {
    store.update((state) => {
      state.lastError = `retranslate failed: ${describe(error)}`;
    });
    return false;
  }
}
