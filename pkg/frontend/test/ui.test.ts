// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from "vitest";

import { mount, type App } from "../src/ui.js";
import { FakeApi, fixture } from "./fake_api.js";

function setup(): App {
  document.body.innerHTML = `<div id="app"></div>`;
  return mount(document.getElementById("app")!, new FakeApi());
}

function click(selector: string): void {
  const el = document.querySelector<HTMLButtonElement>(selector);
  expect(el, selector).not.toBeNull();
  el!.click();
}

async function startSession(app: App): Promise<void> {
  const model = document.querySelector<HTMLTextAreaElement>("#model-text")!;
  const symptom = document.querySelector<HTMLInputElement>("#symptom")!;
  model.value = fixture.model_text;
  symptom.value = "AM=1";
  click("#start");
  await app.settle();
}

describe("browser client", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("clicking yes, yes, no puts the faulty constraint in the result panel", async () => {
    const app = setup();
    await startSession(app);
    expect(document.querySelector("#banner")!.textContent).toBe(
      "Is (MA,3) expected to be kept?",
    );

    click("#answer-yes");
    await app.settle();
    click("#answer-yes");
    await app.settle();
    click("#answer-no");
    await app.settle();

    const panel = document.querySelector("#result-panel")!;
    expect(panel.textContent).toContain("PM>MP");
    expect(panel.textContent).toContain("minimal symptom (PM,2)");
  });

  it("renders the proof tree with the question highlighted", async () => {
    const app = setup();
    await startSession(app);
    const highlighted = document.querySelectorAll("#tree .node.question");
    expect(highlighted).toHaveLength(1);
    expect(highlighted[0].textContent).toBe("(MA,3)");
    const edges = [...document.querySelectorAll("#tree .edge")].map((e) =>
      e.textContent!.trim(),
    );
    expect(edges).toContain("MA>AM");
    expect(edges).toContain("PM>MP");
  });

  it("disables the answer controls once the session is done", async () => {
    const app = setup();
    await startSession(app);
    for (const word of ["yes", "yes", "no"]) {
      expect(
        document.querySelector<HTMLButtonElement>("#answer-yes")!.disabled,
      ).toBe(false);
      click(`#answer-${word}`);
      await app.settle();
    }
    for (const word of ["yes", "no", "unknown"]) {
      expect(
        document.querySelector<HTMLButtonElement>(`#answer-${word}`)!.disabled,
      ).toBe(true);
    }
    // a click on a disabled control changes nothing
    click("#answer-yes");
    await app.settle();
    expect(document.querySelectorAll("#transcript li")).toHaveLength(3);
  });

  it("shows inline errors for a kept pair", async () => {
    const app = setup();
    const model = document.querySelector<HTMLTextAreaElement>("#model-text")!;
    const symptom = document.querySelector<HTMLInputElement>("#symptom")!;
    model.value = fixture.model_text;
    symptom.value = "AM=3";
    click("#start");
    await app.settle();
    const error = document.querySelector<HTMLElement>("#error")!;
    expect(error.hidden).toBe(false);
    expect(error.textContent).toContain("not a symptom");
  });

  it("rejects a malformed symptom before calling the server", async () => {
    const app = setup();
    const symptom = document.querySelector<HTMLInputElement>("#symptom")!;
    symptom.value = "AM";
    click("#start");
    await app.settle();
    expect(document.querySelector("#error")!.textContent).toContain(
      "expected VAR=value",
    );
  });
});
