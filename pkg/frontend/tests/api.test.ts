import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { FakeServer } from "./fakeServer.js";

describe("ApiClient", () => {
  it("round-trips session creation paths and bodies", async () => {
    const server = new FakeServer();
    server.createSession("s1", ["r0", "r1"], ["a", "b"]);
    const api = new ApiClient("", server.fetch);
    const state = await api.getSession("s1");
    expect(state.candidates).toEqual(["r0", "r1"]);
    expect(server.requests).toContain("/api/sessions/s1");
  });

  it("raises ApiError with the server detail on non-2xx", async () => {
    const server = new FakeServer();
    const api = new ApiClient("", server.fetch);
    await expect(api.getSession("ghost")).rejects.toThrowError(ApiError);
    await expect(api.getSession("ghost")).rejects.toThrowError(/no such session/);
  });

  it("encodes annotator names in the next-candidate query", async () => {
    const server = new FakeServer();
    server.createSession("s1", ["r0"], ["ann with space"]);
    const api = new ApiClient("", server.fetch);
    const next = await api.nextCandidate("s1", "ann with space");
    expect(next.review?.id).toBe("r0");
    expect(server.requests.at(-1)).toContain("annotator=ann+with+space");
  });

  it("posts skip bodies distinctly from labels", async () => {
    const server = new FakeServer();
    server.createSession("s1", ["r0", "r1"], ["a"]);
    const api = new ApiClient("", server.fetch);
    await api.postLabel("s1", "r0", "a", "skip");
    await api.postLabel("s1", "r1", "a", 1);
    const state = await api.getSession("s1");
    expect(state.progress["a"]).toEqual({ labeled: 1, skipped: 1, unlabeled: 0 });
  });
});
