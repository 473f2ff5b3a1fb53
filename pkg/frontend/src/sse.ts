/** Event-stream client over fetch.
 *
 * Not EventSource: we need the stream in environments without it (tests run
 * under node) and we want explicit control of resume. The server numbers
 * events monotonically and closes the stream after a terminal stage; on a
 * dropped connection we reconnect with the last seen id, and after repeated
 * failures we degrade to polling the job snapshot so the page keeps moving.
 */

import type { ApiClient } from "./api";
import type { JobView, ServerEvent } from "./types";
import { isTerminal } from "./types";

export interface StreamHandlers {
  onEvent(event: ServerEvent): void;
  /** Snapshot updates delivered while in polling fallback. */
  onSnapshot?(view: JobView): void;
  onStatus?(status: "live" | "reconnecting" | "polling" | "closed"): void;
}

export interface StreamOptions {
  /** Consecutive connection failures tolerated before polling. */
  maxReconnects?: number;
  reconnectDelayMs?: number;
  pollIntervalMs?: number;
}

interface Frame {
  id?: string;
  event?: string;
  data?: string;
}

function parseFrame(block: string): Frame {
  const frame: Frame = {};
  for (const line of block.split("\n")) {
    const colon = line.indexOf(":");
    if (colon <= 0) continue; // comment or blank
    const field = line.slice(0, colon);
    const value = line.slice(colon + 1).replace(/^ /, "");
    if (field === "id") frame.id = value;
    else if (field === "event") frame.event = value;
    else if (field === "data") frame.data = (frame.data ?? "") + value;
  }
  return frame;
}

export function decodeEvent(block: string): ServerEvent | null {
  const frame = parseFrame(block);
  if (frame.data === undefined) return null;
  let data: Record<string, unknown>;
  try {
    data = JSON.parse(frame.data) as Record<string, unknown>;
  } catch {
    return null; // torn frame; the resume id will replay it
  }
  const id = frame.id !== undefined ? Number(frame.id) : Number(data.seq ?? 0);
  return { id, type: frame.event ?? String(data.type ?? "message"), data };
}

export class EventStream {
  lastEventId = 0;
  private stopped = false;

  constructor(
    private readonly api: ApiClient,
    private readonly jobId: string,
    private readonly handlers: StreamHandlers,
    private readonly options: StreamOptions = {},
  ) {}

  stop(): void {
    this.stopped = true;
  }

  /** Runs until the server closes the stream (terminal stage) or stop(). */
  async run(): Promise<void> {
    const maxReconnects = this.options.maxReconnects ?? 3;
    let failures = 0;
    while (!this.stopped) {
      try {
        this.handlers.onStatus?.("live");
        const finished = await this.consumeOnce();
        if (finished) {
          this.handlers.onStatus?.("closed");
          return;
        }
        failures = 0; // stream ended cleanly but job not terminal: reconnect
      } catch {
        failures += 1;
        if (failures > maxReconnects) {
          await this.pollUntilTerminal();
          this.handlers.onStatus?.("closed");
          return;
        }
        this.handlers.onStatus?.("reconnecting");
        await sleep(this.options.reconnectDelayMs ?? 250);
      }
    }
  }

  /** @returns true when the server closed after a terminal stage event. */
  private async consumeOnce(): Promise<boolean> {
    const response = await fetch(this.api.eventsUrl(this.jobId, this.lastEventId));
    if (!response.ok || response.body === null) {
      throw new Error(`stream unavailable: ${response.status}`);
    }
    let sawTerminal = false;
    const decoder = new TextDecoder();
    let buffer = "";
    const reader = response.body.getReader();
    try {
      while (!this.stopped) {
        const { done, value } = await reader.read();
        if (done) break;
        buffer += decoder.decode(value, { stream: true });
        let cut;
        // stop() may fire inside onEvent; halt before the next frame so the
        // resume id stays exactly where the caller saw it.
        while (!this.stopped && (cut = buffer.indexOf("\n\n")) >= 0) {
          const block = buffer.slice(0, cut);
          buffer = buffer.slice(cut + 2);
          const event = decodeEvent(block);
          if (event === null || event.id <= this.lastEventId) continue;
          this.lastEventId = event.id;
          this.handlers.onEvent(event);
          if (event.type === "stage" && isTerminal(String(event.data.stage))) {
            sawTerminal = true;
          }
        }
      }
    } finally {
      // Abandoning mid-stream must drop the connection, not just the reader,
      // or the server keeps feeding a socket nobody reads.
      await reader.cancel().catch(() => undefined);
      reader.releaseLock();
    }
    return sawTerminal;
  }

  private async pollUntilTerminal(): Promise<void> {
    this.handlers.onStatus?.("polling");
    while (!this.stopped) {
      const view = await this.api.getJob(this.jobId);
      this.handlers.onSnapshot?.(view);
      if (isTerminal(view.stage)) return;
      await sleep(this.options.pollIntervalMs ?? 1000);
    }
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
