// Thin REST wrapper over the planning service.

import type { EventEnvelope, SessionRecord } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function check(resp: Response): Promise<Response> {
  if (!resp.ok) {
    let detail = `HTTP ${resp.status}`;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return resp;
}

export class Api {
  constructor(public baseUrl: string = "") {}

  async listSessions(): Promise<SessionRecord[]> {
    const resp = await check(await fetch(`${this.baseUrl}/sessions`));
    return resp.json();
  }

  async sessionDetail(id: string): Promise<SessionRecord & { config: unknown }> {
    const resp = await check(await fetch(`${this.baseUrl}/sessions/${id}`));
    return resp.json();
  }

  async createSession(config: unknown): Promise<string> {
    const resp = await check(
      await fetch(`${this.baseUrl}/sessions`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(config),
      }),
    );
    const body = await resp.json();
    return body.session_id as string;
  }

  async submitAnswers(id: string, answers: string[]): Promise<void> {
    await check(
      await fetch(`${this.baseUrl}/sessions/${id}/answers`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ answers }),
      }),
    );
  }

  async transcript(id: string): Promise<EventEnvelope[]> {
    const resp = await check(
      await fetch(`${this.baseUrl}/sessions/${id}/transcript`),
    );
    const text = await resp.text();
    return text
      .split("\n")
      .filter((line) => line.trim().length > 0)
      .map((line) => JSON.parse(line) as EventEnvelope);
  }

  eventsUrl(id: string, fromSeq: number): string {
    return `${this.baseUrl}/sessions/${id}/events?from_seq=${fromSeq}`;
  }
}
