/** Session state machine: the server owns the truth, this mirrors it. */

import { ApiError, type ApiClient } from "./api.js";
import {
  pairText,
  type AnswerWord,
  type DiagnosisPayload,
  type ModelPayload,
  type SessionPayload,
} from "./types.js";

export type Phase = "idle" | "error" | "question" | "done";

export interface ViewState {
  phase: Phase;
  /** The pending question sentence while the oracle still has work to do. */
  banner: string | null;
  /** Yes/No/Unknown buttons are live only in exactly this state. */
  controlsEnabled: boolean;
  resultText: string | null;
  resultDetail: string[];
  transcript: string[];
  error: string | null;
  retryable: boolean;
}

export function resultPanel(result: DiagnosisPayload): {
  text: string;
  detail: string[];
} {
  if (result.definite) {
    return {
      text: `constraint ${result.constraint}`,
      detail: [
        `minimal symptom ${pairText(result.minimal_symptom!)}`,
        `erroneous rule ${result.rule!.text}`,
        `operator ${result.operator ?? "(start)"}`,
      ],
    };
  }
  return {
    text: `no definite culprit; ${result.candidates.length} candidate rule(s)`,
    detail: result.candidates.map(
      (c) => `${c.rule.text} via ${c.constraint}`,
    ),
  };
}

export class SessionController {
  model: ModelPayload | null = null;
  session: SessionPayload | null = null;
  error: string | null = null;
  retryable = false;
  private inflight = false;

  constructor(private readonly api: ApiClient) {}

  get busy(): boolean {
    return this.inflight;
  }

  private async guarded<T>(work: () => Promise<T>): Promise<T | undefined> {
    if (this.inflight) return undefined; // double submits are dropped
    this.inflight = true;
    this.error = null;
    this.retryable = false;
    try {
      return await work();
    } catch (err) {
      if (err instanceof ApiError) {
        this.error = err.message;
        this.retryable = err.status === 0;
      } else {
        this.error = String(err);
        this.retryable = false;
      }
      return undefined;
    } finally {
      this.inflight = false;
    }
  }

  /** Upload the model, then open a session on the claimed symptom. */
  async loadModelAndStart(
    modelText: string,
    varName: string,
    value: number,
    strategy = "dac",
  ): Promise<void> {
    await this.guarded(async () => {
      this.session = null;
      this.model = await this.api.postModel(modelText);
      this.session = await this.api.postSession(
        this.model.model_id,
        varName,
        value,
        strategy,
      );
    });
  }

  async submitAnswer(answer: AnswerWord): Promise<void> {
    const session = this.session;
    if (!session || session.state !== "question_pending") return;
    await this.guarded(async () => {
      this.session = await this.api.postAnswer(session.session_id, answer);
    });
  }

  /** Re-fetch the server state; the page keeps no other session memory. */
  async refresh(): Promise<void> {
    const session = this.session;
    if (!session) return;
    await this.guarded(async () => {
      this.session = await this.api.getSession(session.session_id);
    });
  }

  /**
   * Drive a fresh session with a recorded transcript and return its final
   * view; used to check a saved session still reproduces its verdict.
   */
  async replayTranscript(
    modelText: string,
    varName: string,
    value: number,
    strategy: string,
    answers: AnswerWord[],
  ): Promise<ViewState> {
    const replay = new SessionController(this.api);
    await replay.loadModelAndStart(modelText, varName, value, strategy);
    for (const answer of answers) {
      if (replay.session?.state !== "question_pending") break;
      await replay.submitAnswer(answer);
    }
    return replay.view();
  }

  view(): ViewState {
    const transcript =
      this.session?.transcript.map(
        (t) => `${pairText(t)} -> ${t.answer}`,
      ) ?? [];
    if (this.error !== null) {
      return {
        phase: "error",
        banner: null,
        controlsEnabled: false,
        resultText: null,
        resultDetail: [],
        transcript,
        error: this.error,
        retryable: this.retryable,
      };
    }
    if (!this.session) {
      return {
        phase: "idle",
        banner: null,
        controlsEnabled: false,
        resultText: null,
        resultDetail: [],
        transcript: [],
        error: null,
        retryable: false,
      };
    }
    if (this.session.state === "done") {
      const panel = resultPanel(this.session.result!);
      return {
        phase: "done",
        banner: null,
        controlsEnabled: false,
        resultText: panel.text,
        resultDetail: panel.detail,
        transcript,
        error: null,
        retryable: false,
      };
    }
    return {
      phase: "question",
      banner: this.session.question!.sentence,
      controlsEnabled: !this.inflight,
      resultText: null,
      resultDetail: [],
      transcript,
      error: null,
      retryable: false,
    };
  }
}
