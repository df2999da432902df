import { describe, expect, it } from "vitest";

import { createSseParser } from "./stream.js";

describe("SSE parser", () => {
  it("parses id/event/data messages across chunk boundaries", () => {
    const seen: { event: string; data: string; id?: string }[] = [];
    const feed = createSseParser((m) => seen.push(m));
    feed("id: 1\nevent: run-ev");
    feed("ent\ndata: {\"seq\": 1}\n\nid: 2\n");
    feed("event: run-event\ndata: {\"seq\": 2}\n\n");
    expect(seen).toEqual([
      { event: "run-event", data: '{"seq": 1}', id: "1" },
      { event: "run-event", data: '{"seq": 2}', id: "2" },
    ]);
  });

  it("handles multi-line data and stream-end", () => {
    const seen: { event: string; data: string }[] = [];
    const feed = createSseParser((m) => seen.push({ event: m.event, data: m.data }));
    feed("data: line1\ndata: line2\n\nevent: stream-end\ndata: {}\n\n");
    expect(seen[0]).toEqual({ event: "message", data: "line1\nline2" });
    expect(seen[1]).toEqual({ event: "stream-end", data: "{}" });
  });

  it("ignores comment and unknown lines", () => {
    const seen: unknown[] = [];
    const feed = createSseParser((m) => seen.push(m));
    feed(": keepalive\nretry: 1000\n\n");
    expect(seen).toEqual([]);
  });
});
