// End-to-end check against the real annotation service: builds a small
// synthetic corpus with the pipeline CLI, starts `meanbirds serve`, and
// drives the DOM exactly like a human annotator.

import { ChildProcess, execFileSync, spawn } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it, vi } from "vitest";

import { AnnotationApi, ApiError } from "../src/api.js";
import { App } from "../src/app.js";

const PORT = 18000 + (process.pid % 2000);
const BASE = `http://127.0.0.1:${PORT}`;

let child: ChildProcess | null = null;
let workdir: string;

async function serviceUp(timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const r = await fetch(`${BASE}/stats`);
      if (r.ok) return;
    } catch {
      /* not up yet */
    }
    await new Promise((resolve) => setTimeout(resolve, 300));
  }
  throw new Error("annotation service did not come up");
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "meanbirds-ui-"));
  execFileSync("python3", [
    "-m", "meanbirds.cli", "run", "-w", workdir,
    "--users", "120", "--seed", "3",
    "--stages", "ingest,spamfilter,sessionize,batch", "--no-figures",
  ], { stdio: "ignore" });

  const batches = readFileSync(join(workdir, "batches.jsonl"), "utf-8")
    .trim().split("\n").map((line) => JSON.parse(line));
  const planted: Record<string, string> = {};
  for (const line of readFileSync(join(workdir, "planted_labels.jsonl"), "utf-8")
    .trim().split("\n")) {
    const row = JSON.parse(line);
    planted[row.user_id] = row.label;
  }
  const gold = batches.slice(0, 3).map((b) => ({
    batch_id: b.batch_id,
    label: planted[b.user_id] ?? "normal",
  }));
  writeFileSync(
    join(workdir, "gold.jsonl"),
    gold.map((g) => JSON.stringify(g)).join("\n") + "\n",
  );

  child = spawn("python3", [
    "-m", "meanbirds.cli", "serve", "-w", workdir,
    "--port", String(PORT), "--seed", "5",
    "--gold", join(workdir, "gold.jsonl"),
  ], { stdio: "ignore" });
  await serviceUp();
});

afterAll(() => {
  child?.kill();
});

async function registerAndLabel(root: HTMLElement, token: string) {
  (root.querySelector("#field-token") as HTMLInputElement).value = token;
  (root.querySelector("form") as HTMLFormElement).dispatchEvent(
    new Event("submit", { bubbles: true, cancelable: true }),
  );
  await vi.waitFor(() => {
    if (!root.querySelector(".screen-labeling")) throw new Error("registering");
  }, { timeout: 20_000 });
}

describe("labeling UI against the live service", () => {
  it("completes the demographics -> 10 batches -> done flow", async () => {
    const root = document.createElement("div");
    document.body.replaceChildren(root);
    const api = new AnnotationApi(BASE);
    new App(root, api, `${BASE}/stats`).start();

    expect(root.querySelector(".screen-demographics")).toBeTruthy();
    await registerAndLabel(root, `live-${Date.now()}`);

    expect(root.querySelectorAll(".nav-dot").length).toBe(10);
    expect(root.querySelector(".definitions-text")?.textContent).toContain("bully");

    for (let i = 0; i < 10; i += 1) {
      (root.querySelector('[data-label="normal"]') as HTMLButtonElement).click();
      await vi.waitFor(() => {
        const b = root.querySelector(".submit-label") as HTMLButtonElement;
        if (b.disabled) throw new Error("submit disabled");
      });
      (root.querySelector(".submit-label") as HTMLButtonElement).click();
      await vi.waitFor(() => {
        const doneScreen = root.querySelector(".screen-done");
        const progress = root.querySelector(".progress")?.textContent ?? "";
        if (!doneScreen && !progress.includes(`${i + 1} labeled`)) {
          throw new Error(`waiting for submission ${i + 1}`);
        }
      }, { timeout: 20_000 });
    }
    expect(root.querySelector(".screen-done")).toBeTruthy();

    const stats = (await api.fetchStats()) as { workers: number };
    expect(stats.workers).toBeGreaterThanOrEqual(1);
  });

  it("server rejects duplicate submissions outside the UI too", async () => {
    const api = new AnnotationApi(BASE);
    const { worker_id } = await api.registerWorker({
      token: `dup-${Date.now()}`,
      gender: "unknown",
      age_band: "unknown",
      nationality: "unknown",
      education: "unknown",
      income_band: "unknown",
    });
    const assignment = await api.fetchAssignment(worker_id);
    expect(assignment.batch_ids.length).toBe(10);
    const first = assignment.batch_ids[0];
    await api.submitLabel(worker_id, first, "normal");
    await expect(api.submitLabel(worker_id, first, "normal")).rejects.toThrowError(
      ApiError,
    );
  });

  it("duplicate registration token is a 409 with a banner-worthy message", async () => {
    const api = new AnnotationApi(BASE);
    const token = `twice-${Date.now()}`;
    await api.registerWorker({
      token, gender: "unknown", age_band: "unknown", nationality: "unknown",
      education: "unknown", income_band: "unknown",
    });
    try {
      await api.registerWorker({
        token, gender: "unknown", age_band: "unknown", nationality: "unknown",
        education: "unknown", income_band: "unknown",
      });
      expect.unreachable("second registration must fail");
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).status).toBe(409);
    }
  });

  it("control batch payload is indistinguishable from real ones", async () => {
    const api = new AnnotationApi(BASE);
    const { worker_id } = await api.registerWorker({
      token: `parity-${Date.now()}`, gender: "unknown", age_band: "unknown",
      nationality: "unknown", education: "unknown", income_band: "unknown",
    });
    const assignment = await api.fetchAssignment(worker_id);
    const keysets = new Set(
      assignment.batches.map((b) => JSON.stringify(Object.keys(b).sort())),
    );
    expect(keysets.size).toBe(1);
    expect([...keysets][0]).not.toContain("control");
    expect([...keysets][0]).not.toContain("gold");
  });
});
