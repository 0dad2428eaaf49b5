import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, BotClient } from "../src/api.js";

function jsonResponse(status: number, body: unknown) {
  return {
    ok: status >= 200 && status < 300,
    status,
    statusText: status === 200 ? "OK" : "Error",
    json: () => Promise.resolve(body),
  } as Response;
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("BotClient", () => {
  it("creates a session with a bare POST", async () => {
    const fetchMock = vi.fn().mockResolvedValue(
      jsonResponse(200, { session_id: "s1", greeting: "Hello." }),
    );
    vi.stubGlobal("fetch", fetchMock);
    const out = await new BotClient().createSession();
    expect(out).toEqual({ session_id: "s1", greeting: "Hello." });
    expect(fetchMock).toHaveBeenCalledWith("/sessions", { method: "POST" });
  });

  it("prefixes the configured base URL", async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(200, {}));
    vi.stubGlobal("fetch", fetchMock);
    await new BotClient("http://api:8000").fetchTree("abc");
    expect(fetchMock).toHaveBeenCalledWith("http://api:8000/sessions/abc/tree", undefined);
  });

  it("posts the message text as JSON", async () => {
    const reply = {
      reply: "ok",
      session_id: "s1",
      turn: 1,
      finished_tasks: [],
      active_task: null,
    };
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(200, reply));
    vi.stubGlobal("fetch", fetchMock);
    const out = await new BotClient().sendMessage("s1", "hi there");
    expect(out).toEqual(reply);
    expect(fetchMock).toHaveBeenCalledWith("/sessions/s1/messages", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ text: "hi there" }),
    });
  });

  it("escapes hostile session ids in the path", async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(200, {}));
    vi.stubGlobal("fetch", fetchMock);
    await new BotClient().fetchTree("a/b c");
    expect(fetchMock.mock.calls[0][0]).toBe("/sessions/a%2Fb%20c/tree");
  });

  it("surfaces the server's detail string on a 404", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn().mockResolvedValue(jsonResponse(404, { detail: "unknown session" })),
    );
    const err = await new BotClient().fetchTree("gone").catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(404);
    expect((err as ApiError).message).toBe("unknown session");
  });

  it("surfaces a 409 when the session queue is full", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn().mockResolvedValue(
        jsonResponse(409, { detail: "too many queued turns for this session" }),
      ),
    );
    const err = await new BotClient().sendMessage("s1", "hi").catch((e: unknown) => e);
    expect((err as ApiError).status).toBe(409);
    expect((err as ApiError).message).toBe("too many queued turns for this session");
  });

  it("falls back to the status text when the error body is not JSON", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn().mockResolvedValue({
        ok: false,
        status: 502,
        statusText: "Bad Gateway",
        json: () => Promise.reject(new SyntaxError("not json")),
      } as unknown as Response),
    );
    const err = await new BotClient().createSession().catch((e: unknown) => e);
    expect((err as ApiError).status).toBe(502);
    expect((err as ApiError).message).toBe("Bad Gateway");
  });

  it("maps a network failure to status 0", async () => {
    vi.stubGlobal("fetch", vi.fn().mockRejectedValue(new TypeError("failed to fetch")));
    const err = await new BotClient().createSession().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(0);
    expect((err as ApiError).message).toBe("failed to fetch");
  });
});
