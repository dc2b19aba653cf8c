import { describe, expect, it } from "vitest";

import { ApiError, type ApiClient } from "../src/api.js";
import { SessionController } from "../src/session.js";
import type { AnswerWord } from "../src/types.js";
import { FakeApi, fixture, gated } from "./fake_api.js";

async function startedController(api: ApiClient = new FakeApi()) {
  const controller = new SessionController(api);
  await controller.loadModelAndStart(fixture.model_text, "AM", 1, "dac");
  return controller;
}

describe("session flow against recorded server payloads", () => {
  it("asks the recorded questions and ends at the faulty constraint", async () => {
    const controller = await startedController();
    expect(controller.view().phase).toBe("question");
    expect(controller.view().banner).toBe("Is (MA,3) expected to be kept?");

    await controller.submitAnswer("yes");
    expect(controller.view().banner).toBe("Is (PM,2) expected to be kept?");
    await controller.submitAnswer("yes");
    expect(controller.view().banner).toBe("Is (MP,1) expected to be kept?");
    await controller.submitAnswer("no");

    const view = controller.view();
    expect(view.phase).toBe("done");
    expect(view.resultText).toContain("PM>MP");
    expect(view.resultDetail).toContain("erroneous rule (PM,2) <- (MP,1)");
    expect(view.controlsEnabled).toBe(false);
    expect(view.transcript).toEqual([
      "(MA,3) -> yes",
      "(PM,2) -> yes",
      "(MP,1) -> no",
    ]);
  });

  it("keeps the controls in lockstep with the server state", async () => {
    const controller = await startedController();
    for (const answer of fixture.answers) {
      const state = controller.session!.state;
      expect(controller.view().controlsEnabled).toBe(
        state === "question_pending",
      );
      await controller.submitAnswer(answer as AnswerWord);
    }
    expect(controller.session!.state).toBe("done");
    expect(controller.view().controlsEnabled).toBe(false);
  });

  it("replaying the recorded transcript reproduces the same result panel", async () => {
    const controller = await startedController();
    for (const answer of fixture.answers) {
      await controller.submitAnswer(answer as AnswerWord);
    }
    const direct = controller.view();

    const replayed = await controller.replayTranscript(
      fixture.model_text,
      "AM",
      1,
      "dac",
      fixture.answers as AnswerWord[],
    );
    expect(replayed).toEqual(direct);
  });

  it("drops a second submit while one is in flight", async () => {
    const inner = new FakeApi();
    const { api, release } = gated(inner);
    const controller = await startedController(api);

    const first = controller.submitAnswer("yes");
    const second = controller.submitAnswer("yes");
    release();
    await Promise.all([first, second]);

    const answerCalls = inner.calls.filter((c) => c.startsWith("postAnswer"));
    expect(answerCalls).toEqual(["postAnswer:yes"]);
    expect(controller.session!.transcript).toHaveLength(1);
  });

  it("surfaces a kept pair as an inline error", async () => {
    const controller = new SessionController(new FakeApi());
    await controller.loadModelAndStart(fixture.model_text, "AM", 3, "dac");
    const view = controller.view();
    expect(view.phase).toBe("error");
    expect(view.error).toContain("not a symptom");
    expect(view.controlsEnabled).toBe(false);
    expect(view.retryable).toBe(false);
  });

  it("marks an unreachable service as retryable", async () => {
    const unreachable: ApiClient = {
      postModel: async () => {
        throw new ApiError(0, "service unreachable: connection refused");
      },
      postSession: async () => {
        throw new ApiError(0, "service unreachable: connection refused");
      },
      getSession: async () => {
        throw new ApiError(0, "service unreachable: connection refused");
      },
      postAnswer: async () => {
        throw new ApiError(0, "service unreachable: connection refused");
      },
    };
    const controller = new SessionController(unreachable);
    await controller.loadModelAndStart(fixture.model_text, "AM", 1, "dac");
    const view = controller.view();
    expect(view.phase).toBe("error");
    expect(view.retryable).toBe(true);
  });

  it("refresh re-fetches the server state without other memory", async () => {
    const controller = await startedController();
    await controller.submitAnswer("yes");
    const before = controller.view();
    await controller.refresh();
    expect(controller.view()).toEqual(before);
  });
});
