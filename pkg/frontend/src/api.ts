/**
 * Typed client for the triage REST service.
 *
 * Every probability the UI shows comes out of these responses; the client
 * never computes posteriors itself.
 */

export type Answer = "yes" | "no" | "unknown";

export interface PendingQuestion {
  symptom: string;
  index: number;
}

export interface PosteriorEntry {
  condition: string;
  probability: number;
}

export interface HistoryEntry {
  symptom: string;
  index: number;
  answer: Answer;
  initial: boolean;
}

export interface SessionConfig {
  prior: number[];
  max_questions: number;
  confidence_threshold: number;
  policy: string;
}

export interface SessionView {
  id: string;
  status: "awaiting_answer" | "finished";
  pending_question: PendingQuestion | null;
  stop_reason: string | null;
  posterior: PosteriorEntry[];
  history: HistoryEntry[];
  questions_asked: number;
  config: SessionConfig;
}

export interface MatrixInfo {
  conditions: string[];
  symptoms: string[];
  n_conditions: number;
  n_symptoms: number;
}

export interface CreateSessionBody {
  prior?: "uniform" | Record<string, number>;
  initial_symptoms?: string[];
  max_questions?: number;
  confidence_threshold?: number;
  policy?: string;
}

/** Service answered with a non-2xx status. `detail` is its error message. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
    this.name = "ApiError";
  }
}

/** The request never reached the service (offline, refused, aborted). */
export class NetworkError extends Error {
  constructor(cause: unknown) {
    super(cause instanceof Error ? cause.message : String(cause));
    this.name = "NetworkError";
  }
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
    return JSON.stringify(body.detail ?? body);
  } catch {
    return response.statusText || "request failed";
  }
}

export class TriageClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        method,
        headers: body === undefined ? {} : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (cause) {
      throw new NetworkError(cause);
    }
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as T;
  }

  getMatrix(): Promise<MatrixInfo> {
    return this.request<MatrixInfo>("GET", "/v1/matrix");
  }

  createSession(body: CreateSessionBody): Promise<SessionView> {
    return this.request<SessionView>("POST", "/v1/sessions", body);
  }

  getSession(id: string): Promise<SessionView> {
    return this.request<SessionView>("GET", `/v1/sessions/${id}`);
  }

  postAnswer(id: string, symptom: string, answer: Answer): Promise<SessionView> {
    return this.request<SessionView>("POST", `/v1/sessions/${id}/answers`, {
      symptom,
      answer,
    });
  }

  async deleteSession(id: string): Promise<void> {
    await this.request<{ ok: boolean }>("DELETE", `/v1/sessions/${id}`);
  }
}
