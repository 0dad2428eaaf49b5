/** Typed client for the bot service. Exactly three endpoints, nothing else. */

import type { MessageOut, SessionOut, TreeSnapshot } from "./types.js";

export class ApiError extends Error {
  /** HTTP status; 0 when the request never produced a response. */
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (err) {
    throw new ApiError(0, err instanceof Error ? err.message : "network error");
  }
  if (!response.ok) {
    let detail = response.statusText || "request failed";
    try {
      const body = (await response.json()) as { detail?: string };
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class BotClient {
  constructor(private readonly baseUrl: string = "") {}

  createSession(): Promise<SessionOut> {
    return request<SessionOut>(`${this.baseUrl}/sessions`, { method: "POST" });
  }

  sendMessage(sessionId: string, text: string): Promise<MessageOut> {
    return request<MessageOut>(`${this.baseUrl}/sessions/${encodeURIComponent(sessionId)}/messages`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ text }),
    });
  }

  fetchTree(sessionId: string): Promise<TreeSnapshot> {
    return request<TreeSnapshot>(`${this.baseUrl}/sessions/${encodeURIComponent(sessionId)}/tree`);
  }
}
