// Typed client over the engine's HTTP surface. The dashboard holds no truth
// of its own: every view derives from these responses plus the event stream.

import type { Intervention, Plan, RunSummary, SubFunctionSpec } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export interface AnswerOutcome {
  ok: boolean;
  conflict: boolean; // 409: someone else answered first
  detail: string;
}

export class ApiClient {
  constructor(private baseUrl: string, private token?: string) {}

  private headers(json = false): Record<string, string> {
    const headers: Record<string, string> = {};
    if (json) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    return headers;
  }

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      headers: this.headers(),
    });
    if (!response.ok) {
      throw new ApiError(response.status, `${path}: ${response.status}`);
    }
    return (await response.json()) as T;
  }

  async listRuns(): Promise<RunSummary[]> {
    const body = await this.get<{ runs: RunSummary[] }>("/runs");
    return body.runs;
  }

  run(runId: string): Promise<RunSummary> {
    return this.get<RunSummary>(`/runs/${runId}`);
  }

  async plan(runId: string): Promise<Plan> {
    const body = await this.get<{ plan: Plan }>(`/runs/${runId}/plan`);
    return body.plan;
  }

  async spec(runId: string, name: string): Promise<SubFunctionSpec> {
    const body = await this.get<{ spec: SubFunctionSpec }>(
      `/runs/${runId}/specs/${name}`,
    );
    return body.spec;
  }

  async source(runId: string, level: string): Promise<string> {
    const body = await this.get<{ text: string }>(`/runs/${runId}/source/${level}`);
    return body.text;
  }

  async interventions(runId: string): Promise<Intervention[]> {
    const body = await this.get<{ interventions: Intervention[] }>(
      `/runs/${runId}/interventions`,
    );
    return body.interventions;
  }

  /** POST an answer; a 409 means another operator won the race. */
  async answer(runId: string, requestId: string, answer: string): Promise<AnswerOutcome> {
    const response = await fetch(
      `${this.baseUrl}/runs/${runId}/interventions/${requestId}/answer`,
      { method: "POST", headers: this.headers(true), body: JSON.stringify({ answer }) },
    );
    if (response.ok) return { ok: true, conflict: false, detail: "" };
    const detail = await response.text();
    return { ok: false, conflict: response.status === 409, detail };
  }

  async startRun(bundlePath: string, configPath: string, runId?: string): Promise<string> {
    const response = await fetch(`${this.baseUrl}/runs`, {
      method: "POST",
      headers: this.headers(true),
      body: JSON.stringify({
        bundle_path: bundlePath,
        config_path: configPath,
        run_id: runId ?? null,
      }),
    });
    if (!response.ok) throw new ApiError(response.status, await response.text());
    const body = (await response.json()) as { run_id: string };
    return body.run_id;
  }

  async step(runId: string): Promise<number> {
    const response = await fetch(`${this.baseUrl}/runs/${runId}/step`, {
      method: "POST",
      headers: this.headers(true),
    });
    if (!response.ok) throw new ApiError(response.status, await response.text());
    const body = (await response.json()) as { events: unknown[] };
    return body.events.length;
  }
}
