import { describe, expect, it } from "vitest";

import { ApiError, NetworkError, TriageClient, type FetchLike } from "../src/api";
import { clinicService } from "./fake_service";

describe("TriageClient", () => {
  it("round-trips matrix and session calls against the fake service", async () => {
    const service = clinicService();
    const client = new TriageClient("http://svc", service.fetch);

    const matrix = await client.getMatrix();
    expect(matrix.conditions).toEqual(["flu", "strep", "gout"]);
    expect(matrix.n_symptoms).toBe(4);

    const created = await client.createSession({ prior: "uniform" });
    expect(created.status).toBe("awaiting_answer");
    expect(created.pending_question?.symptom).toBe("fever");
    expect(created.posterior.map((p) => p.probability).reduce((a, b) => a + b, 0)).toBeCloseTo(1, 9);

    const answered = await client.postAnswer(created.id, "fever", "yes");
    expect(answered.history).toHaveLength(1);
    expect(answered.posterior[0]?.condition).toBe("flu");

    const fetched = await client.getSession(created.id);
    expect(fetched).toEqual(answered);

    await client.deleteSession(created.id);
    await expect(client.getSession(created.id)).rejects.toMatchObject({ status: 404 });

    expect(service.requests.map((r) => `${r.method} ${r.path}`)).toEqual([
      "GET /v1/matrix",
      "POST /v1/sessions",
      `POST /v1/sessions/${created.id}/answers`,
      `GET /v1/sessions/${created.id}`,
      `DELETE /v1/sessions/${created.id}`,
      `GET /v1/sessions/${created.id}`,
    ]);
  });

  it("maps non-2xx responses to ApiError with the service detail", async () => {
    const service = clinicService();
    const client = new TriageClient("http://svc", service.fetch);
    const failure = client.createSession({ prior: { dragonpox: 1 } });
    await expect(failure).rejects.toBeInstanceOf(ApiError);
    await expect(failure).rejects.toMatchObject({
      status: 400,
      detail: "unknown condition name: 'dragonpox'",
    });
  });

  it("falls back to status text when the error body is not JSON", async () => {
    const fetchFn: FetchLike = async () =>
      new Response("<html>gateway</html>", { status: 502, statusText: "Bad Gateway" });
    const client = new TriageClient("http://svc", fetchFn);
    await expect(client.getMatrix()).rejects.toMatchObject({
      status: 502,
      detail: "Bad Gateway",
    });
  });

  it("wraps transport failures in NetworkError", async () => {
    const service = clinicService();
    service.failNext(1);
    const client = new TriageClient("http://svc", service.fetch);
    await expect(client.getMatrix()).rejects.toBeInstanceOf(NetworkError);
    expect(service.requests).toHaveLength(0);
  });
});
