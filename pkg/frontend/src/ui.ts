/** DOM layer: renders the controller's view and forwards clicks back. */

import type { ApiClient } from "./api.js";
import { SessionController, type ViewState } from "./session.js";
import { buildTreeView, toggleExpanded, type TreeNodeView } from "./tree.js";
import type { AnswerWord } from "./types.js";

const ANSWERS: AnswerWord[] = ["yes", "no", "unknown"];

export class App {
  readonly controller: SessionController;
  private expanded = new Set<number>();
  private inflight: Promise<void> = Promise.resolve();

  private readonly modelInput: HTMLTextAreaElement;
  private readonly symptomInput: HTMLInputElement;
  private readonly strategySelect: HTMLSelectElement;
  private readonly startButton: HTMLButtonElement;
  private readonly banner: HTMLElement;
  private readonly answerButtons = new Map<AnswerWord, HTMLButtonElement>();
  private readonly treePanel: HTMLElement;
  private readonly transcriptPanel: HTMLElement;
  private readonly resultPanel: HTMLElement;
  private readonly errorPanel: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    api: ApiClient,
  ) {
    this.controller = new SessionController(api);
    root.innerHTML = `
      <section class="setup">
        <textarea id="model-text" rows="12" spellcheck="false"
          placeholder="# model text"></textarea>
        <div class="controls">
          <input id="symptom" placeholder="VAR=value" />
          <select id="strategy">
            <option value="dac">divide and conquer</option>
            <option value="topdown">top down</option>
          </select>
          <button id="start">Start session</button>
        </div>
      </section>
      <section id="error" class="error" hidden></section>
      <section id="banner" class="banner" hidden></section>
      <section class="answers">
        ${ANSWERS.map(
          (a) => `<button class="answer" id="answer-${a}">${a}</button>`,
        ).join("")}
      </section>
      <section id="tree" class="tree"></section>
      <section class="bottom">
        <div><h3>Transcript</h3><ul id="transcript"></ul></div>
        <div><h3>Result</h3><div id="result-panel"></div></div>
      </section>
    `;
    this.modelInput = root.querySelector("#model-text")!;
    this.symptomInput = root.querySelector("#symptom")!;
    this.strategySelect = root.querySelector("#strategy")!;
    this.startButton = root.querySelector("#start")!;
    this.banner = root.querySelector("#banner")!;
    this.treePanel = root.querySelector("#tree")!;
    this.transcriptPanel = root.querySelector("#transcript")!;
    this.resultPanel = root.querySelector("#result-panel")!;
    this.errorPanel = root.querySelector("#error")!;

    this.startButton.addEventListener("click", () => this.track(this.start()));
    for (const word of ANSWERS) {
      const button = root.querySelector<HTMLButtonElement>(`#answer-${word}`)!;
      this.answerButtons.set(word, button);
      button.addEventListener("click", () =>
        this.track(this.answer(word)),
      );
    }
    this.render();
  }

  /** Resolves when the last click handler finished its round-trip. */
  settle(): Promise<void> {
    return this.inflight;
  }

  private track(work: Promise<void>): void {
    this.inflight = this.inflight.then(() => work);
  }

  private async start(): Promise<void> {
    const raw = this.symptomInput.value.trim();
    const match = /^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(-?\d+)$/.exec(raw);
    if (!match) {
      this.errorPanel.hidden = false;
      this.errorPanel.textContent = `expected VAR=value, got "${raw}"`;
      return;
    }
    this.expanded = new Set();
    await this.controller.loadModelAndStart(
      this.modelInput.value,
      match[1],
      Number(match[2]),
      this.strategySelect.value,
    );
    this.render();
  }

  private async answer(word: AnswerWord): Promise<void> {
    await this.controller.submitAnswer(word);
    this.render();
  }

  private renderNode(view: TreeNodeView): HTMLElement {
    const li = document.createElement("li");
    const label = document.createElement("span");
    label.className = `node ${view.cssClass}`;
    if (view.isQuestion) label.classList.add("question");
    if (view.inCandidate) label.classList.add("candidate");
    label.textContent = view.label;
    li.appendChild(label);
    const edge = document.createElement("span");
    edge.className = "edge";
    edge.textContent = ` ${view.edgeLabel}`;
    li.appendChild(edge);
    if (view.collapsed) {
      const expander = document.createElement("button");
      expander.className = "expander";
      expander.textContent = `+${view.hiddenCount}`;
      expander.addEventListener("click", () => {
        this.expanded = toggleExpanded(this.expanded, view.id);
        this.render();
      });
      li.appendChild(expander);
    } else if (view.children.length > 0) {
      const ul = document.createElement("ul");
      for (const child of view.children) ul.appendChild(this.renderNode(child));
      li.appendChild(ul);
    }
    return li;
  }

  render(): void {
    const view: ViewState = this.controller.view();

    this.errorPanel.hidden = view.error === null;
    this.errorPanel.textContent =
      view.error === null
        ? ""
        : view.retryable
          ? `${view.error} (check the server and retry)`
          : view.error;

    this.banner.hidden = view.banner === null;
    this.banner.textContent = view.banner ?? "";

    for (const button of this.answerButtons.values()) {
      button.disabled = !view.controlsEnabled;
    }
    this.startButton.disabled = this.controller.busy;

    this.transcriptPanel.innerHTML = "";
    for (const line of view.transcript) {
      const li = document.createElement("li");
      li.textContent = line;
      this.transcriptPanel.appendChild(li);
    }

    this.resultPanel.textContent = view.resultText ?? "";
    if (view.resultDetail.length > 0) {
      const ul = document.createElement("ul");
      for (const line of view.resultDetail) {
        const li = document.createElement("li");
        li.textContent = line;
        ul.appendChild(li);
      }
      this.resultPanel.appendChild(ul);
    }

    this.treePanel.innerHTML = "";
    if (this.controller.session) {
      const ul = document.createElement("ul");
      ul.appendChild(
        this.renderNode(buildTreeView(this.controller.session, this.expanded)),
      );
      this.treePanel.appendChild(ul);
    }
  }
}

export function mount(root: HTMLElement, api: ApiClient): App {
  return new App(root, api);
}
