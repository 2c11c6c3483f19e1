/**
 * In-memory double of the triage REST service, faithful to its wire
 * contract: same paths, same body shapes, same status codes, same error
 * detail style. Posterior updates use the real Bayes rule so multi-answer
 * dialogs produce meaningful numbers; question selection is simply the
 * lowest-index unasked symptom, which the client contract does not care
 * about.
 *
 * Test hooks: a request log, network-failure injection, forced 409s, and a
 * hold/release gate for exercising the in-flight guard.
 */

import type { FetchLike } from "../src/api";

type HistoryRecord = {
  symptom: string;
  index: number;
  answer: "yes" | "no" | "unknown";
  initial: boolean;
};

interface InternalSession {
  id: string;
  prior: number[];
  posterior: number[];
  asked: Set<number>;
  history: HistoryRecord[];
  questionsAsked: number;
  pending: number | null;
  stopReason: string | null;
}

export interface LoggedRequest {
  method: string;
  path: string;
  body?: unknown;
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export class FakeTriageService {
  readonly requests: LoggedRequest[] = [];
  private readonly sessions = new Map<string, InternalSession>();
  private counter = 0;
  private failuresLeft = 0;
  private conflictsLeft = 0;
  private gate: Promise<void> | null = null;
  private releaseGate: (() => void) | null = null;

  constructor(
    readonly conditions: string[],
    readonly symptoms: string[],
    readonly likelihood: number[][],
    readonly maxQuestions = 10,
    readonly threshold = 0.95,
  ) {}

  /** Make the next `n` fetches reject as if the network dropped. */
  failNext(n: number): void {
    this.failuresLeft = n;
  }

  /** Make the next answer POST return 409 without applying it. */
  forceConflictOnce(): void {
    this.conflictsLeft = 1;
  }

  /** Delay all responses until the returned function is called. */
  hold(): () => void {
    this.gate = new Promise((resolve) => {
      this.releaseGate = resolve;
    });
    return () => {
      this.releaseGate?.();
      this.gate = null;
      this.releaseGate = null;
    };
  }

  latestSession(): InternalSession {
    const last = [...this.sessions.values()].at(-1);
    if (last === undefined) throw new Error("no sessions created");
    return last;
  }

  readonly fetch: FetchLike = async (input, init) => {
    if (this.failuresLeft > 0) {
      this.failuresLeft -= 1;
      throw new TypeError("network down");
    }
    if (this.gate !== null) await this.gate;
    const method = init?.method ?? "GET";
    const path = new URL(input, "http://fake").pathname;
    const body = typeof init?.body === "string" ? JSON.parse(init.body) : undefined;
    this.requests.push({ method, path, body });
    return this.route(method, path, body);
  };

  private route(method: string, path: string, body: unknown): Response {
    if (method === "GET" && path === "/v1/matrix") {
      return jsonResponse(200, {
        conditions: [...this.conditions],
        symptoms: [...this.symptoms],
        n_conditions: this.conditions.length,
        n_symptoms: this.symptoms.length,
      });
    }
    if (method === "POST" && path === "/v1/sessions") {
      return this.createSession(body as Record<string, unknown>);
    }
    const match = /^\/v1\/sessions\/([^/]+)(\/answers)?$/.exec(path);
    if (match !== null) {
      const id = match[1]!;
      if (match[2] !== undefined && method === "POST") {
        return this.postAnswer(id, body as Record<string, unknown>);
      }
      if (match[2] === undefined && method === "GET") {
        const session = this.sessions.get(id);
        if (session === undefined) {
          return jsonResponse(404, { detail: `unknown session: ${id}` });
        }
        return jsonResponse(200, this.view(session));
      }
      if (match[2] === undefined && method === "DELETE") {
        this.sessions.delete(id);
        return jsonResponse(200, { ok: true });
      }
    }
    return jsonResponse(404, { detail: `no route: ${method} ${path}` });
  }

  private createSession(body: Record<string, unknown>): Response {
    const priorSpec = body["prior"] ?? "uniform";
    const n = this.conditions.length;
    let prior: number[];
    if (priorSpec === "uniform") {
      prior = Array.from({ length: n }, () => 1 / n);
    } else if (typeof priorSpec === "object" && priorSpec !== null) {
      prior = new Array<number>(n).fill(0);
      for (const [name, weight] of Object.entries(priorSpec)) {
        const index = this.conditions.indexOf(name);
        if (index < 0) {
          return jsonResponse(400, { detail: `unknown condition name: '${name}'` });
        }
        if (typeof weight !== "number" || !Number.isFinite(weight) || weight < 0) {
          return jsonResponse(400, { detail: `probability for '${name}' must be a number` });
        }
        prior[index] = weight;
      }
      const total = prior.reduce((a, b) => a + b, 0);
      if (total <= 0) {
        return jsonResponse(400, { detail: "prior assigns zero probability to every condition" });
      }
      prior = prior.map((w) => w / total);
    } else {
      return jsonResponse(400, { detail: "prior must be 'uniform' or a condition-to-weight map" });
    }

    const session: InternalSession = {
      id: `fake-${(this.counter += 1)}`,
      prior: [...prior],
      posterior: [...prior],
      asked: new Set(),
      history: [],
      questionsAsked: 0,
      pending: null,
      stopReason: null,
    };

    const initial = (body["initial_symptoms"] ?? []) as unknown;
    if (!Array.isArray(initial) || initial.some((s) => typeof s !== "string")) {
      return jsonResponse(400, { detail: "initial_symptoms must be a list of symptom names" });
    }
    for (const name of initial as string[]) {
      const index = this.symptoms.indexOf(name);
      if (index < 0) {
        return jsonResponse(400, { detail: `unknown symptom name: '${name}'` });
      }
      this.applyAnswer(session, index, "yes", true);
    }

    this.advance(session);
    this.sessions.set(session.id, session);
    return jsonResponse(201, this.view(session));
  }

  private postAnswer(id: string, body: Record<string, unknown>): Response {
    const session = this.sessions.get(id);
    if (session === undefined) {
      return jsonResponse(404, { detail: `unknown session: ${id}` });
    }
    const symptom = body["symptom"];
    const answer = body["answer"];
    if (typeof symptom !== "string" || !this.symptoms.includes(symptom)) {
      return jsonResponse(400, { detail: `unknown symptom name: '${String(symptom)}'` });
    }
    if (answer !== "yes" && answer !== "no" && answer !== "unknown") {
      return jsonResponse(400, { detail: "answer must be one of: yes, no, unknown" });
    }
    if (this.conflictsLeft > 0) {
      this.conflictsLeft -= 1;
      return jsonResponse(409, { detail: "another answer was recorded first" });
    }
    if (session.stopReason !== null) {
      return jsonResponse(409, { detail: "session is finished" });
    }
    const index = this.symptoms.indexOf(symptom);
    if (index !== session.pending) {
      return jsonResponse(409, { detail: `symptom '${symptom}' is not the pending question` });
    }
    this.applyAnswer(session, index, answer, false);
    session.questionsAsked += 1;
    this.advance(session);
    return jsonResponse(200, this.view(session));
  }

  private applyAnswer(
    session: InternalSession,
    index: number,
    answer: "yes" | "no" | "unknown",
    initial: boolean,
  ): void {
    if (answer !== "unknown") {
      const updated = session.posterior.map((p, c) => {
        const likely = this.likelihood[c]![index]!;
        return p * (answer === "yes" ? likely : 1 - likely);
      });
      const total = updated.reduce((a, b) => a + b, 0);
      session.posterior = updated.map((p) => p / total);
    }
    session.asked.add(index);
    session.history.push({
      symptom: this.symptoms[index]!,
      index,
      answer,
      initial,
    });
  }

  // stop precedence: threshold, then budget, then exhaustion
  private advance(session: InternalSession): void {
    session.pending = null;
    if (Math.max(...session.posterior) >= this.threshold) {
      session.stopReason = "threshold_reached";
      return;
    }
    if (session.questionsAsked >= this.maxQuestions) {
      session.stopReason = "budget_exhausted";
      return;
    }
    for (let i = 0; i < this.symptoms.length; i += 1) {
      if (!session.asked.has(i)) {
        session.pending = i;
        return;
      }
    }
    session.stopReason = "symptoms_exhausted";
  }

  private view(session: InternalSession): unknown {
    const posterior = session.posterior
      .map((probability, i) => ({ condition: this.conditions[i]!, probability, i }))
      .sort((a, b) => b.probability - a.probability || a.i - b.i)
      .map(({ condition, probability }) => ({ condition, probability }));
    return structuredClone({
      id: session.id,
      status: session.stopReason === null ? "awaiting_answer" : "finished",
      pending_question:
        session.pending === null
          ? null
          : { symptom: this.symptoms[session.pending]!, index: session.pending },
      stop_reason: session.stopReason,
      posterior,
      history: session.history,
      questions_asked: session.questionsAsked,
      config: {
        prior: session.prior,
        max_questions: this.maxQuestions,
        confidence_threshold: this.threshold,
        policy: "expected_ig",
      },
    });
  }
}

export function clinicService(): FakeTriageService {
  return new FakeTriageService(
    ["flu", "strep", "gout"],
    ["fever", "ache", "sore_throat", "toe_pain"],
    [
      [0.9, 0.7, 0.1, 0.2],
      [0.05, 0.6, 0.8, 0.3],
      [0.1, 0.2, 0.3, 0.9],
    ],
  );
}
