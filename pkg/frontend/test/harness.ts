/** Spawns the real HTTP service (uvicorn, mock backends, fake media tools)
 * and builds fixture uploads. The UI tests run against actual sockets — no
 * request mocking anywhere. */

import { type ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

const REPO_ROOT = resolve(fileURLToPath(new URL(".", import.meta.url)), "../..");
const TOOLS = join(REPO_ROOT, "tools");

export const FIXTURE_HI = [
  "तो अब जापान की बात करते हैं",
  "और यहाँ कुछ लोग सैलरी के बारे में",
  "तो पर्सनली मुझे लगता है",
];

export const FIXTURE_EN = [
  "So now let's come to Japan. When I came to Japan, I was about 22 years old and I have been living here for 8 years.",
  "And here some people are curious about the salary, how much salary is there in Japan.",
  "So personally, I feel that according to my salary, there is no problem in social media.",
];

const FIXTURE_SPANS: Array<[number, number, string]> = [
  [0.0, 6.4, "S0"],
  [6.4, 10.4, "S0"],
  [10.4, 32.4, "S0"],
];

export function makeWavBytes(durationSeconds: number, rate = 16000): Uint8Array<ArrayBuffer> {
  const frames = Math.round(durationSeconds * rate);
  const dataSize = frames * 2; // PCM16 mono
  const buffer = new ArrayBuffer(44 + dataSize);
  const view = new DataView(buffer);
  const ascii = (offset: number, text: string) => {
    for (let i = 0; i < text.length; i++) view.setUint8(offset + i, text.charCodeAt(i));
  };
  ascii(0, "RIFF");
  view.setUint32(4, 36 + dataSize, true);
  ascii(8, "WAVE");
  ascii(12, "fmt ");
  view.setUint32(16, 16, true);
  view.setUint16(20, 1, true); // PCM
  view.setUint16(22, 1, true); // mono
  view.setUint32(24, rate, true);
  view.setUint32(28, rate * 2, true);
  view.setUint16(32, 2, true);
  view.setUint16(34, 16, true);
  ascii(36, "data");
  view.setUint32(40, dataSize, true);
  for (let i = 0; i < frames; i++) {
    const sample = Math.round(8000 * Math.sin((2 * Math.PI * 220 * i) / rate));
    view.setInt16(44 + i * 2, sample, true);
  }
  return new Uint8Array(buffer);
}

export function makeVideoBytes(durationSeconds: number): Uint8Array<ArrayBuffer> {
  const wav = makeWavBytes(durationSeconds);
  const header = new TextEncoder().encode("FAKEVIDEO\n");
  const out = new Uint8Array<ArrayBuffer>(new ArrayBuffer(header.length + wav.length));
  out.set(header, 0);
  out.set(wav, header.length);
  return out;
}

function fixtureConfig(workDir: string): Record<string, unknown> {
  const asr: Record<string, string> = {};
  const table: Record<string, string> = {};
  FIXTURE_HI.forEach((hi, i) => {
    asr[`seg-${String(i).padStart(4, "0")}`] = hi;
    table[hi] = FIXTURE_EN[i]!;
  });
  return {
    store: { root: join(workDir, "jobs") },
    media_tool: {
      ffmpeg: join(TOOLS, "fake_ffmpeg.py"),
      ffprobe: join(TOOLS, "fake_ffprobe.py"),
    },
    pipeline: { subtitle_mode: "listing1-compat" },
    backends: {
      diarization: { kind: "mock", segments: FIXTURE_SPANS },
      asr: { kind: "mock", transcripts: asr },
      translation: { kind: "mock", table },
    },
  };
}

export interface Service {
  baseUrl: string;
  stop(): Promise<void>;
}

export async function startService(): Promise<Service> {
  const workDir = mkdtempSync(join(tmpdir(), "dubkit-ui-"));
  const configPath = join(workDir, "dubkit.json");
  // JSON is valid YAML, so the config loader takes it as-is
  writeFileSync(configPath, JSON.stringify(fixtureConfig(workDir)));

  const port = 21000 + Math.floor(Math.random() * 20000);
  const baseUrl = `http://127.0.0.1:${port}`;
  const proc: ChildProcess = spawn(
    "python3",
    ["-m", "dubkit.cli", "serve", "--host", "127.0.0.1", "--port", String(port)],
    {
      cwd: workDir,
      env: { ...process.env, DUBKIT_CONFIG: configPath },
      stdio: ["ignore", "pipe", "pipe"],
    },
  );
  const logs: string[] = [];
  proc.stdout?.on("data", (chunk: Buffer) => logs.push(chunk.toString()));
  proc.stderr?.on("data", (chunk: Buffer) => logs.push(chunk.toString()));

  const deadline = Date.now() + 30_000;
  for (;;) {
    if (proc.exitCode !== null) {
      throw new Error(`service exited early:\n${logs.join("")}`);
    }
    try {
      const response = await fetch(`${baseUrl}/api/jobs`);
      if (response.ok) break;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      proc.kill("SIGKILL");
      throw new Error(`service never became ready:\n${logs.join("")}`);
    }
    await new Promise((resolveSleep) => setTimeout(resolveSleep, 150));
  }

  return {
    baseUrl,
    stop: () =>
      new Promise<void>((resolveStop) => {
        proc.once("exit", () => resolveStop());
        proc.kill("SIGTERM");
        setTimeout(() => proc.kill("SIGKILL"), 3_000).unref();
      }),
  };
}

export async function waitForStage(
  baseUrl: string,
  jobId: string,
  stage: string,
  timeoutMs = 30_000,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const response = await fetch(`${baseUrl}/api/jobs/${jobId}`);
    const view = (await response.json()) as { stage: string; error: string | null };
    if (view.stage === stage) return;
    if (view.stage === "failed") throw new Error(`job failed: ${view.error}`);
    if (Date.now() > deadline) throw new Error(`job stuck before ${stage}`);
    await new Promise((resolveSleep) => setTimeout(resolveSleep, 100));
  }
}
