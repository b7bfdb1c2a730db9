/** Typed client for the triadscale collection-service HTTP API. */

export interface Progress {
  answered: number;
  total: number;
}

export interface QuestionPayload {
  kind: "question";
  triplet_index: number;
  ref: number;
  opt1: number;
  opt2: number;
  ref_asset: string | null;
  opt1_asset: string | null;
  opt2_asset: string | null;
  phase: "practice" | "main";
  repeat_index: number | null;
  deadline_ms: number;
  fixation_ms: number;
  progress: Progress;
}

export interface BreakPayload {
  kind: "break";
  phase: "break";
  progress: Progress;
}

export interface DonePayload {
  kind: "done";
  progress: Progress;
  export: string;
}

export type NextPayload = QuestionPayload | BreakPayload | DonePayload;

export type Choice = "opt1" | "opt2";

export interface AnswerResult {
  recorded: "answered" | "unanswered";
  triplet_index: number;
  answer?: number;
}

export interface SessionInfo {
  session_id: string;
  total_questions: number;
  phase: string;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export interface ApiClientOptions {
  baseUrl?: string;
  fetchFn?: typeof fetch;
  /** Network-failure retries per request. */
  retries?: number;
  /** Base backoff delay; doubles per attempt. */
  backoffMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: typeof fetch;
  private readonly retries: number;
  private readonly backoffMs: number;
  private readonly sleep: (ms: number) => Promise<void>;

  constructor(options: ApiClientOptions = {}) {
    this.baseUrl = (options.baseUrl ?? "").replace(/\/$/, "");
    this.fetchFn = options.fetchFn ?? fetch.bind(globalThis);
    this.retries = options.retries ?? 3;
    this.backoffMs = options.backoffMs ?? 250;
    this.sleep = options.sleep ?? defaultSleep;
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let lastError: unknown;
    for (let attempt = 0; attempt <= this.retries; attempt++) {
      if (attempt > 0) {
        await this.sleep(this.backoffMs * 2 ** (attempt - 1));
      }
      try {
        return await this.fetchFn(this.baseUrl + path, init);
      } catch (err) {
        lastError = err; // network failure: retry with backoff
      }
    }
    throw lastError;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.request(path, init);
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const body = (await res.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  createSession(participantId: string, schedule: unknown): Promise<SessionInfo> {
    return this.json<SessionInfo>("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ participant_id: participantId, schedule }),
    });
  }

  next(sessionId: string): Promise<NextPayload> {
    return this.json<NextPayload>(`/sessions/${sessionId}/next`);
  }

  /**
   * Post a choice. Safe to call when a network retry may have double-sent
   * the request: a 409 (question no longer outstanding / index advanced)
   * after the first attempt is treated as "already recorded".
   */
  async answer(
    sessionId: string,
    tripletIndex: number,
    choice: Choice,
    clientRtMs?: number,
  ): Promise<AnswerResult> {
    try {
      return await this.json<AnswerResult>(`/sessions/${sessionId}/answers`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({
          triplet_index: tripletIndex,
          choice,
          client_rt_ms: clientRtMs ?? null,
        }),
      });
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        return { recorded: "answered", triplet_index: tripletIndex };
      }
      throw err;
    }
  }
}
