// Timeline store: exactly-once event intake keyed by seq, grouped for display
// by pipeline phase and sub-function. LEVEL_EXHAUSTED and REFLECTION_DECIDED
// rows are highlighted; raw provider calls stay collapsed by default.

import type { EventKind, RunEvent } from "./types.js";

export interface TimelineRow {
  seq: number;
  kind: EventKind;
  label: string;
  group: string; // "understanding" | "<subfunction>" | "hls" | "run"
  highlight: boolean;
  collapsed: boolean; // bulky rows (provider calls) start collapsed
  payload: Record<string, unknown>;
}

const HIGHLIGHT: EventKind[] = ["LEVEL_EXHAUSTED", "REFLECTION_DECIDED",
  "INTERVENTION_REQUESTED", "RUN_FAILED"];

const UNDERSTANDING: EventKind[] = ["SECTION_SUMMARIZED", "PLAN_ACCEPTED"];
const HLS: EventKind[] = ["HLS_LINTED", "HLS_OPTIMIZED", "SYNTH_INVOKED"];
const RUN: EventKind[] = ["RUN_STARTED", "RUN_COMPLETED", "RUN_FAILED"];

function groupOf(event: RunEvent): string {
  const name = event.payload["name"];
  if (typeof name === "string" && name) return name;
  if (UNDERSTANDING.includes(event.kind)) return "understanding";
  if (event.kind === "SPEC_ACCEPTED") {
    const spec = event.payload["spec"] as { name?: string } | undefined;
    return spec?.name ?? "understanding";
  }
  if (HLS.includes(event.kind)) return "hls";
  if (RUN.includes(event.kind)) return "run";
  return "run";
}

function labelOf(event: RunEvent): string {
  const p = event.payload;
  switch (event.kind) {
    case "SECTION_SUMMARIZED":
      return `summarized ${p["section_id"]}`;
    case "PLAN_ACCEPTED":
      return "decomposition plan accepted";
    case "SPEC_ACCEPTED": {
      const spec = p["spec"] as { name?: string; revision?: number };
      return `dictionary accepted: ${spec?.name} (rev ${spec?.revision})`;
    }
    case "CODING_ATTEMPT":
      return `${p["level"]} attempt ${p["attempt"]} ${p["passed"] ? "passed" : "failed"}`;
    case "LEVEL_ACCEPTED":
      return `${p["level"]} accepted (v${p["version"]})`;
    case "LEVEL_EXHAUSTED":
      return `${p["level"]} budget exhausted after ${p["attempts"]} attempts`;
    case "REFLECTION_DECIDED":
      return `reflection: ${p["route"]}${p["target"] ? " -> " + p["target"] : ""}`;
    case "INTERVENTION_REQUESTED":
      return "human intervention requested";
    case "INTERVENTION_ANSWERED":
      return "intervention answered";
    case "PROMPT_OPTIMIZED":
      return "coder prompt optimized";
    case "NOISE_INJECTED":
      return `noise injected at ${p["stage"]}`;
    case "PATCH_APPLIED":
      return `${p["level"]} patch v${p["version"]}`;
    case "PROVIDER_CALL":
      return `${p["agent"]} call (${p["completion_chars"]} chars)`;
    case "HLS_LINTED": {
      const report = p["report"] as { clean?: boolean };
      return `synthesis lint: ${report?.clean ? "clean" : "violations"}`;
    }
    case "HLS_OPTIMIZED":
      return `optimizer round ${p["round"]}${p["rolled_back"] ? " (rolled back)" : ""}`;
    case "SYNTH_INVOKED":
      return `synthesizer: ${p["status"]}`;
    case "RUN_STARTED":
      return `run started: ${p["run_id"]}`;
    case "RUN_COMPLETED":
      return `run completed, correct=${String(p["correct"])}`;
    case "RUN_FAILED":
      return `run failed: ${p["error"]}`;
    default:
      return event.kind;
  }
}

export class TimelineStore {
  private rows = new Map<number, TimelineRow>();
  private listeners: (() => void)[] = [];
  stale = false;

  /** Returns true when the event is new; duplicates by seq are dropped. */
  add(event: RunEvent): boolean {
    if (this.rows.has(event.seq)) return false;
    this.rows.set(event.seq, {
      seq: event.seq,
      kind: event.kind,
      label: labelOf(event),
      group: groupOf(event),
      highlight: HIGHLIGHT.includes(event.kind),
      collapsed: event.kind === "PROVIDER_CALL",
      payload: event.payload,
    });
    this.notify();
    return true;
  }

  setStale(stale: boolean): void {
    this.stale = stale;
    this.notify();
  }

  size(): number {
    return this.rows.size;
  }

  lastSeq(): number {
    let max = 0;
    for (const seq of this.rows.keys()) if (seq > max) max = seq;
    return max;
  }

  all(): TimelineRow[] {
    return [...this.rows.values()].sort((a, b) => a.seq - b.seq);
  }

  /** Rows grouped in first-seen order: understanding, each sub-function, hls, run. */
  grouped(): { group: string; rows: TimelineRow[] }[] {
    const order: string[] = [];
    const byGroup = new Map<string, TimelineRow[]>();
    for (const row of this.all()) {
      if (!byGroup.has(row.group)) {
        byGroup.set(row.group, []);
        order.push(row.group);
      }
      byGroup.get(row.group)!.push(row);
    }
    return order.map((group) => ({ group, rows: byGroup.get(group)! }));
  }

  seqs(): number[] {
    return this.all().map((row) => row.seq);
  }

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }
}
