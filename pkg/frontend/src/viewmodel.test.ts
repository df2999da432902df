import { describe, expect, it } from "vitest";

import { buildViewModel, patchesFor, pendingCount } from "./viewmodel.js";
import type { RunEvent } from "./types.js";

function ev(seq: number, kind: RunEvent["kind"],
            payload: Record<string, unknown>): RunEvent {
  return { seq, ts: 0, kind, payload, payload_hash: "x" };
}

const PLAN = {
  target: "digest",
  sub_functions: [
    { name: "mix", goal: "mix a byte", depends_on: [] },
    { name: "digest", goal: "fold the word", depends_on: ["mix"] },
  ],
};

describe("view model", () => {
  it("builds the plan tree with per-level statuses", () => {
    const vm = buildViewModel([
      ev(1, "PLAN_ACCEPTED", { plan: PLAN }),
      ev(2, "CODING_ATTEMPT", { name: "mix", level: "PSEUDO", passed: true }),
      ev(3, "LEVEL_ACCEPTED", { name: "mix", level: "PSEUDO", version: 1 }),
      ev(4, "CODING_ATTEMPT", { name: "mix", level: "SCRIPT", passed: false }),
      ev(5, "LEVEL_EXHAUSTED", { name: "mix", level: "SCRIPT", attempts: 2 }),
    ]);
    const mix = vm.nodes[0]!;
    expect(mix.levels.PSEUDO).toBe("accepted");
    expect(mix.levels.SCRIPT).toBe("exhausted");
    expect(mix.levels.SYNTH).toBe("pending");
    expect(mix.attempts).toBe(2);
    expect(vm.nodes[1]!.levels.PSEUDO).toBe("pending");
  });

  it("computes per-patch diffs against the previous version", () => {
    const vm = buildViewModel([
      ev(1, "PATCH_APPLIED", { name: "mix", level: "SCRIPT", version: 1,
                               body: "def mix(v):\n    return v\n" }),
      ev(2, "PATCH_APPLIED", { name: "mix", level: "SCRIPT", version: 2,
                               body: "def mix(v):\n    return v ^ 0x5A\n" }),
    ]);
    const patches = patchesFor(vm, "mix", "SCRIPT");
    expect(patches).toHaveLength(2);
    const second = patches[1]!;
    expect(second.diff.some((d) => d.op === "-" && d.text.includes("return v"))).toBe(true);
    expect(second.diff.some((d) => d.op === "+" && d.text.includes("0x5A"))).toBe(true);
  });

  it("tracks intervention lifecycle and badge count", () => {
    const request = { request_id: "iv-1", observations: "o", attempts: "a",
                      questions: ["q"], created_at: "t", status: "PENDING",
                      answer: null };
    const vm = buildViewModel([
      ev(1, "INTERVENTION_REQUESTED", { request }),
    ]);
    expect(pendingCount(vm)).toBe(1);
    expect(vm.pendingInterventionId).toBe("iv-1");
    buildViewModel([]); // unrelated builds never share state
    const answered = buildViewModel([
      ev(1, "INTERVENTION_REQUESTED", { request }),
      ev(2, "INTERVENTION_ANSWERED", { request_id: "iv-1", answer: "do it" }),
    ]);
    expect(pendingCount(answered)).toBe(0);
    expect(answered.interventions.get("iv-1")!.status).toBe("ANSWERED");
  });

  it("records prompt revisions in order", () => {
    const vm = buildViewModel([
      ev(1, "PROMPT_OPTIMIZED", { name: "digest", level: "SCRIPT",
                                  trigger_summary: "t1", addendum: "a1" }),
      ev(2, "PROMPT_OPTIMIZED", { name: "digest", level: "SCRIPT",
                                  trigger_summary: "t2", addendum: "a2" }),
    ]);
    expect(vm.promptRevisions.map((r) => r.addendum)).toEqual(["a1", "a2"]);
  });

  it("flags terminal state and correctness", () => {
    const vm = buildViewModel([
      ev(1, "RUN_COMPLETED", { correct: true, cases: [], metrics: {} }),
    ]);
    expect(vm.terminal).toBe(true);
    expect(vm.correct).toBe(true);
  });
});
