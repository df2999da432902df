// SSE subscription over fetch streaming (works in browsers and in node 20,
// which has no global EventSource). The server replays from ?from=<seq> and
// then tails; we remember the last seq so a reconnect never re-delivers an
// event we already handed to the consumer.

import type { RunEvent } from "./types.js";

export interface StreamHandlers {
  onEvent: (event: RunEvent) => void;
  onEnd?: () => void; // terminal event reached, stream closed by server
  onStale?: (stale: boolean) => void; // connection lost / regained
}

export interface Subscription {
  close: () => void;
  lastSeq: () => number;
}

interface SseMessage {
  event: string;
  data: string;
  id?: string;
}

/** Incremental text/event-stream parser; feed it chunks, get messages. */
export function createSseParser(onMessage: (msg: SseMessage) => void) {
  let buffer = "";
  let event = "message";
  let data: string[] = [];
  let id: string | undefined;

  const dispatch = () => {
    if (data.length > 0 || event !== "message") {
      onMessage({ event, data: data.join("\n"), id });
    }
    event = "message";
    data = [];
  };

  return (chunk: string) => {
    buffer += chunk;
    let idx: number;
    while ((idx = buffer.indexOf("\n")) >= 0) {
      const line = buffer.slice(0, idx).replace(/\r$/, "");
      buffer = buffer.slice(idx + 1);
      if (line === "") {
        dispatch();
      } else if (line.startsWith("event:")) {
        event = line.slice("event:".length).trim();
      } else if (line.startsWith("data:")) {
        data.push(line.slice("data:".length).trimStart());
      } else if (line.startsWith("id:")) {
        id = line.slice("id:".length).trim();
      }
    }
  };
}

export function subscribeToRun(
  baseUrl: string,
  runId: string,
  handlers: StreamHandlers,
  fromSeq = 1,
  token?: string,
): Subscription {
  let closed = false;
  let last = fromSeq - 1;
  let controller = new AbortController();

  const connect = async (): Promise<void> => {
    while (!closed) {
      controller = new AbortController();
      try {
        const headers: Record<string, string> = { Accept: "text/event-stream" };
        if (token) headers["Authorization"] = `Bearer ${token}`;
        const response = await fetch(
          `${baseUrl}/runs/${runId}/events?from=${last + 1}`,
          { headers, signal: controller.signal },
        );
        if (!response.ok || !response.body) {
          throw new Error(`stream failed: ${response.status}`);
        }
        handlers.onStale?.(false);
        let ended = false;
        const parse = createSseParser((msg) => {
          if (msg.event === "stream-end") {
            ended = true;
            return;
          }
          if (msg.event !== "run-event") return;
          const record = JSON.parse(msg.data) as RunEvent;
          if (record.seq <= last) return; // seq-keyed exactly-once
          last = record.seq;
          handlers.onEvent(record);
        });
        const reader = response.body.getReader();
        const decoder = new TextDecoder();
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          parse(decoder.decode(value, { stream: true }));
          if (ended) break;
        }
        if (ended) {
          handlers.onEnd?.();
          return;
        }
        // Server went away without a terminal event: mark stale, retry.
        throw new Error("stream closed early");
      } catch (err) {
        if (closed) return;
        handlers.onStale?.(true);
        await new Promise((resolve) => setTimeout(resolve, 400));
      }
    }
  };

  void connect();
  return {
    close: () => {
      closed = true;
      controller.abort();
    },
    lastSeq: () => last,
  };
}
