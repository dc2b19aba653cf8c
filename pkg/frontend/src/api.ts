/** Typed fetch client for the fdexplain HTTP API. */

import type { AnswerWord, ModelPayload, SessionPayload } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(typeof detail === "string" ? detail : JSON.stringify(detail));
    this.name = "ApiError";
  }
}

export interface ApiClient {
  postModel(text: string): Promise<ModelPayload>;
  postSession(
    modelId: string,
    varName: string,
    value: number,
    strategy: string,
  ): Promise<SessionPayload>;
  getSession(sessionId: string): Promise<SessionPayload>;
  postAnswer(sessionId: string, answer: AnswerWord): Promise<SessionPayload>;
}

export class HttpApiClient implements ApiClient {
  constructor(private readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await fetch(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      // non-JSON error bodies fall through with a null detail
    }
    if (!response.ok) {
      const detail =
        body && typeof body === "object" && "detail" in body
          ? (body as { detail: unknown }).detail
          : body;
      throw new ApiError(response.status, detail);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  postModel(text: string): Promise<ModelPayload> {
    return this.post("/models", { text });
  }

  postSession(
    modelId: string,
    varName: string,
    value: number,
    strategy: string,
  ): Promise<SessionPayload> {
    return this.post(`/models/${modelId}/sessions`, {
      var: varName,
      value,
      strategy,
    });
  }

  getSession(sessionId: string): Promise<SessionPayload> {
    return this.request(`/sessions/${sessionId}`);
  }

  postAnswer(sessionId: string, answer: AnswerWord): Promise<SessionPayload> {
    return this.post(`/sessions/${sessionId}/answer`, { answer });
  }
}
