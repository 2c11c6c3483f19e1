/**
 * Session wizard: start screen, question loop, verdict.
 *
 * The controller keeps one screen-state object and rerenders the root on
 * every transition. All diagnosis math lives on the service; this file only
 * moves its responses onto the page. State is reconstructable from the
 * session id in the URL, so a refresh lands back on the same session via GET.
 */

import {
  type Answer,
  ApiError,
  type CreateSessionBody,
  type MatrixInfo,
  NetworkError,
  type SessionView,
  TriageClient,
} from "./api.js";
import { formatPercents } from "./format.js";

const STOP_LABELS: Record<string, string> = {
  threshold_reached: "confidence threshold reached",
  budget_exhausted: "question budget exhausted",
  symptoms_exhausted: "no more symptoms to ask",
};

type Screen =
  | { kind: "loading" }
  | { kind: "unreachable"; retry: () => void }
  | { kind: "start"; error?: string; canRetry?: boolean }
  | { kind: "session"; view: SessionView; busy: boolean; notice?: string; error?: string; canRetry?: boolean };

type Nav = Pick<Window, "history"> & { location: Pick<Location, "search" | "pathname"> };

interface ElProps {
  [key: string]: string | boolean | ((event: Event) => void);
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  props: ElProps = {},
  ...children: Array<Node | string>
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(props)) {
    if (typeof value === "function") {
      node.addEventListener(key.replace(/^on/, "").toLowerCase(), value);
    } else if (typeof value === "boolean") {
      if (value) node.setAttribute(key, "");
    } else if (key === "class") {
      node.className = value;
    } else {
      node.setAttribute(key, value);
    }
  }
  node.append(...children);
  return node;
}

export class App {
  private screen: Screen = { kind: "loading" };
  private matrix: MatrixInfo | null = null;
  private lastCreate: CreateSessionBody | null = null;
  private lastAnswer: Answer | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: TriageClient,
    private readonly nav: Nav = window,
  ) {}

  /** Entry point: resume the session named in the URL, else show the form. */
  async boot(): Promise<void> {
    this.setScreen({ kind: "loading" });
    const sessionId = new URLSearchParams(this.nav.location.search).get("session");
    try {
      this.matrix = await this.client.getMatrix();
      if (sessionId !== null) {
        const view = await this.client.getSession(sessionId);
        this.setScreen({ kind: "session", view, busy: false });
        return;
      }
    } catch (error) {
      if (error instanceof NetworkError) {
        this.setScreen({ kind: "unreachable", retry: () => void this.boot() });
        return;
      }
      if (error instanceof ApiError && sessionId !== null) {
        this.clearSessionUrl();
        this.setScreen({ kind: "start", error: `session ${sessionId} is gone: ${error.detail}` });
        return;
      }
      throw error;
    }
    this.setScreen({ kind: "start" });
  }

  private setScreen(screen: Screen): void {
    this.screen = screen;
    this.render();
  }

  private clearSessionUrl(): void {
    this.nav.history.replaceState(null, "", this.nav.location.pathname);
  }

  private async createSession(body: CreateSessionBody): Promise<void> {
    this.lastCreate = body;
    try {
      const view = await this.client.createSession(body);
      this.nav.history.replaceState(null, "", `?session=${view.id}`);
      this.setScreen({ kind: "session", view, busy: false });
    } catch (error) {
      if (error instanceof ApiError) {
        this.setScreen({ kind: "start", error: error.detail });
      } else if (error instanceof NetworkError) {
        this.setScreen({ kind: "start", error: "service unreachable", canRetry: true });
      } else {
        throw error;
      }
    }
  }

  private async submitAnswer(answer: Answer): Promise<void> {
    if (this.screen.kind !== "session" || this.screen.busy) return;
    const { view } = this.screen;
    if (view.pending_question === null) return;
    this.lastAnswer = answer;
    this.setScreen({ kind: "session", view, busy: true });
    try {
      const next = await this.client.postAnswer(view.id, view.pending_question.symptom, answer);
      this.setScreen({ kind: "session", view: next, busy: false });
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        await this.reloadAfterConflict(view.id);
      } else if (error instanceof ApiError && error.status === 404) {
        this.clearSessionUrl();
        this.setScreen({ kind: "start", error: "session expired, start a new one" });
      } else if (error instanceof ApiError) {
        this.setScreen({ kind: "session", view, busy: false, error: error.detail });
      } else if (error instanceof NetworkError) {
        this.setScreen({ kind: "session", view, busy: false, error: "service unreachable", canRetry: true });
      } else {
        throw error;
      }
    }
  }

  private async reloadAfterConflict(sessionId: string): Promise<void> {
    const stale = this.screen.kind === "session" ? this.screen.view : null;
    if (stale !== null) {
      this.setScreen({
        kind: "session",
        view: stale,
        busy: true,
        notice: "session advanced elsewhere — reloading",
      });
    }
    const view = await this.client.getSession(sessionId);
    this.setScreen({
      kind: "session",
      view,
      busy: false,
      notice: "session advanced elsewhere — reloading",
    });
  }

  private startOver(): void {
    this.clearSessionUrl();
    this.lastCreate = null;
    this.lastAnswer = null;
    this.setScreen({ kind: "start" });
  }

  private render(): void {
    const screen = this.screen;
    switch (screen.kind) {
      case "loading":
        this.root.replaceChildren(el("p", { class: "status" }, "loading..."));
        return;
      case "unreachable":
        this.root.replaceChildren(
          el("p", { class: "error", role: "alert" }, "service unreachable"),
          el("button", { class: "retry", onClick: () => screen.retry() }, "Retry"),
        );
        return;
      case "start":
        this.root.replaceChildren(this.renderStartForm(screen));
        return;
      case "session":
        this.root.replaceChildren(this.renderSession(screen));
        return;
    }
  }

  private renderStartForm(screen: Extract<Screen, { kind: "start" }>): HTMLElement {
    const matrix = this.matrix;
    if (matrix === null) throw new Error("start form rendered before matrix load");

    const priorJson = el("textarea", {
      id: "prior-json",
      rows: "4",
      placeholder: '{"flu": 3, "cold": 1}',
      disabled: true,
    });
    const uniformRadio = el("input", {
      type: "radio", name: "prior-choice", id: "prior-uniform", value: "uniform", checked: true,
      onChange: () => { priorJson.disabled = true; },
    });
    const customRadio = el("input", {
      type: "radio", name: "prior-choice", id: "prior-custom", value: "custom",
      onChange: () => { priorJson.disabled = false; },
    });
    const symptomSelect = el(
      "select",
      { id: "initial-symptoms", multiple: true, size: String(Math.min(6, matrix.symptoms.length)) },
      ...matrix.symptoms.map((name) => el("option", { value: name }, name)),
    );

    const submit = (event: Event) => {
      event.preventDefault();
      let prior: CreateSessionBody["prior"] = "uniform";
      if (customRadio.checked) {
        try {
          prior = JSON.parse(priorJson.value) as Record<string, number>;
        } catch (cause) {
          this.setScreen({ kind: "start", error: `prior is not valid JSON: ${(cause as Error).message}` });
          return;
        }
      }
      const initial = [...symptomSelect.selectedOptions].map((o) => o.value);
      void this.createSession({ prior, initial_symptoms: initial });
    };

    const children: Array<Node> = [
      el("h1", {}, "Start a diagnosis session"),
      el("fieldset", {},
        el("legend", {}, "Prior over conditions"),
        el("label", { for: "prior-uniform" }, uniformRadio, " uniform"),
        el("label", { for: "prior-custom" }, customRadio, " from JSON map"),
        priorJson,
      ),
      el("fieldset", {},
        el("legend", {}, "Symptoms already known present"),
        symptomSelect,
      ),
      el("button", { id: "start", type: "submit" }, "Start"),
    ];
    if (screen.error !== undefined) {
      children.push(el("p", { class: "form-error", role: "alert" }, screen.error));
    }
    if (screen.canRetry === true && this.lastCreate !== null) {
      const body = this.lastCreate;
      children.push(
        el("button", { class: "retry", type: "button", onClick: () => void this.createSession(body) }, "Retry"),
      );
    }
    return el("form", { id: "start-form", onSubmit: submit }, ...children);
  }

  private renderSession(screen: Extract<Screen, { kind: "session" }>): HTMLElement {
    const { view, busy } = screen;
    const asked = view.history.filter((entry) => !entry.initial).length;
    const max = view.config.max_questions;

    const parts: Array<Node> = [];
    if (view.status === "awaiting_answer" && view.pending_question !== null) {
      parts.push(
        el("p", { class: "progress" }, `question ${asked + 1} of ${max}`),
        el("h1", { class: "question" }, `Do you have ${view.pending_question.symptom}?`),
        el("div", { class: "answers" },
          ...(["yes", "no", "unknown"] as const).map((answer) =>
            el("button", {
              class: "answer",
              "data-answer": answer,
              disabled: busy,
              onClick: () => void this.submitAnswer(answer),
            }, answer === "unknown" ? "Not sure" : answer === "yes" ? "Yes" : "No"),
          ),
        ),
      );
    } else {
      const top = view.posterior[0];
      const reason = view.stop_reason ?? "";
      parts.push(
        el("p", { class: "progress" }, `finished after ${asked} of ${max} questions`),
        el("h1", { class: "verdict" },
          top === undefined ? "No diagnosis" : `Most likely: ${top.condition}`,
        ),
        el("p", { class: "stop-reason", "data-reason": reason }, STOP_LABELS[reason] ?? reason),
      );
    }

    if (screen.notice !== undefined) {
      parts.push(el("p", { class: "notice", role: "status" }, screen.notice));
    }
    if (screen.error !== undefined) {
      parts.push(el("p", { class: "error", role: "alert" }, screen.error));
    }
    if (screen.canRetry === true && this.lastAnswer !== null) {
      const answer = this.lastAnswer;
      parts.push(
        el("button", { class: "retry", type: "button", onClick: () => void this.submitAnswer(answer) }, "Retry"),
      );
    }

    parts.push(this.renderPosterior(view));

    if (view.history.length > 0) {
      parts.push(
        el("h2", {}, "Answers so far"),
        el("ol", { class: "history" },
          ...view.history.map((entry) =>
            el("li", {}, `${entry.symptom}: ${entry.answer}${entry.initial ? " (given)" : ""}`),
          ),
        ),
      );
    }

    parts.push(el("button", { class: "start-over", type: "button", onClick: () => this.startOver() }, "Start over"));
    return el("section", { class: "session", "data-session-id": view.id }, ...parts);
  }

  private renderPosterior(view: SessionView): HTMLElement {
    const percents = formatPercents(view.posterior.map((entry) => entry.probability));
    return el("div", { class: "chart" },
      el("h2", {}, "Differential"),
      ...view.posterior.map((entry, i) =>
        el("div", { class: "bar-row" },
          el("span", { class: "bar-label" }, entry.condition),
          el("div", { class: "bar-track" },
            el("div", { class: "bar", style: `width: ${(entry.probability * 100).toFixed(1)}%` }),
          ),
          el("span", { class: "bar-value" }, percents[i] ?? ""),
        ),
      ),
    );
  }
}
