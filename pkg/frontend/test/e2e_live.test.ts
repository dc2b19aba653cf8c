/**
 * End to end against the real Python service: spawn it, run the recorded
 * session through the HTTP client, and check the result panel content.
 * Set FDEXPLAIN_SKIP_E2E=1 to skip (e.g. when python is unavailable).
 */
import { spawn, type ChildProcess } from "node:child_process";
import { readFileSync } from "node:fs";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { HttpApiClient } from "../src/api.js";
import { SessionController } from "../src/session.js";

const SKIP = process.env.FDEXPLAIN_SKIP_E2E === "1";
const PORT = 8757 + (process.pid % 100);
const BASE = `http://127.0.0.1:${PORT}`;
const MODEL = readFileSync(
  new URL("../../models/conference_buggy.fd", import.meta.url),
  "utf-8",
);

let server: ChildProcess | null = null;

async function waitForServer(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt += 1) {
    try {
      const resp = await fetch(`${BASE}/models/none`, { method: "GET" });
      if (resp.status === 404) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
  throw new Error("service did not come up");
}

describe.skipIf(SKIP)("live service", () => {
  beforeAll(async () => {
    server = spawn(
      "python3",
      ["-m", "fdexplain.cli", "serve", "--port", String(PORT)],
      { stdio: "ignore" },
    );
    await waitForServer();
  }, 30000);

  afterAll(() => {
    server?.kill();
  });

  it("yes, yes, no ends at PM>MP, and a replay agrees", async () => {
    const controller = new SessionController(new HttpApiClient(BASE));
    await controller.loadModelAndStart(MODEL, "AM", 1, "dac");
    expect(controller.error).toBeNull();
    expect(controller.view().banner).toBe("Is (MA,3) expected to be kept?");

    for (const answer of ["yes", "yes", "no"] as const) {
      await controller.submitAnswer(answer);
      expect(controller.error).toBeNull();
    }
    const view = controller.view();
    expect(view.phase).toBe("done");
    expect(view.resultText).toContain("PM>MP");

    const replayed = await controller.replayTranscript(
      MODEL, "AM", 1, "dac", ["yes", "yes", "no"],
    );
    expect(replayed.resultText).toBe(view.resultText);
    expect(replayed.resultDetail).toEqual(view.resultDetail);
  }, 30000);
});
