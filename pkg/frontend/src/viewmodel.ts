// View-model derivation. Everything here is a pure function of the events
// received so far (plus fetched artifacts); a full page reload rebuilds the
// identical state from the API alone.

import { diffLines, type DiffLine } from "./diff.js";
import type { CodeLevel, Intervention, Plan, RunEvent } from "./types.js";

export type NodeStatus = "pending" | "coding" | "accepted" | "exhausted";

export interface PlanNode {
  name: string;
  goal: string;
  depends_on: string[];
  levels: Record<CodeLevel, NodeStatus>;
  attempts: number;
}

export interface PatchEntry {
  seq: number;
  name: string;
  level: CodeLevel;
  version: number;
  body: string;
  diff: DiffLine[]; // against the previous version of the same (name, level)
}

export interface PromptRevision {
  seq: number;
  name: string;
  level: string;
  trigger_summary: string;
  addendum: string;
}

export interface RunViewModel {
  plan: Plan | null;
  nodes: PlanNode[];
  patches: PatchEntry[];
  promptRevisions: PromptRevision[];
  interventions: Map<string, Intervention>;
  pendingInterventionId: string | null;
  correct: boolean | null;
  terminal: boolean;
}

const LEVELS: CodeLevel[] = ["PSEUDO", "SCRIPT", "SYNTH"];

export function emptyViewModel(): RunViewModel {
  return {
    plan: null,
    nodes: [],
    patches: [],
    promptRevisions: [],
    interventions: new Map(),
    pendingInterventionId: null,
    correct: null,
    terminal: false,
  };
}

export function applyEvent(vm: RunViewModel, event: RunEvent): RunViewModel {
  const p = event.payload as Record<string, any>;
  switch (event.kind) {
    case "PLAN_ACCEPTED": {
      vm.plan = p["plan"] as Plan;
      vm.nodes = vm.plan.sub_functions.map((item) => ({
        name: item.name,
        goal: item.goal,
        depends_on: item.depends_on,
        levels: { PSEUDO: "pending", SCRIPT: "pending", SYNTH: "pending" },
        attempts: 0,
      }));
      break;
    }
    case "CODING_ATTEMPT": {
      const node = vm.nodes.find((n) => n.name === p["name"]);
      if (node) {
        node.attempts += 1;
        const level = p["level"] as CodeLevel;
        if (node.levels[level] !== "accepted") node.levels[level] = "coding";
      }
      break;
    }
    case "LEVEL_ACCEPTED": {
      const node = vm.nodes.find((n) => n.name === p["name"]);
      if (node) node.levels[p["level"] as CodeLevel] = "accepted";
      break;
    }
    case "LEVEL_EXHAUSTED": {
      const node = vm.nodes.find((n) => n.name === p["name"]);
      if (node) node.levels[p["level"] as CodeLevel] = "exhausted";
      break;
    }
    case "PATCH_APPLIED": {
      const name = p["name"] as string;
      const level = p["level"] as CodeLevel;
      const body = p["body"] as string;
      const previous = [...vm.patches]
        .reverse()
        .find((entry) => entry.name === name && entry.level === level);
      vm.patches.push({
        seq: event.seq,
        name,
        level,
        version: p["version"] as number,
        body,
        diff: diffLines(previous ? previous.body : "", body),
      });
      break;
    }
    case "PROMPT_OPTIMIZED": {
      vm.promptRevisions.push({
        seq: event.seq,
        name: p["name"] as string,
        level: p["level"] as string,
        trigger_summary: p["trigger_summary"] as string,
        addendum: p["addendum"] as string,
      });
      break;
    }
    case "INTERVENTION_REQUESTED": {
      const request = p["request"] as Intervention;
      vm.interventions.set(request.request_id, request);
      vm.pendingInterventionId = request.request_id;
      break;
    }
    case "INTERVENTION_ANSWERED": {
      const requestId = p["request_id"] as string;
      const existing = vm.interventions.get(requestId);
      if (existing) {
        existing.status = "ANSWERED";
        existing.answer = p["answer"] as string;
      }
      if (vm.pendingInterventionId === requestId) vm.pendingInterventionId = null;
      break;
    }
    case "RUN_COMPLETED": {
      vm.correct = (p["correct"] as boolean | null) ?? null;
      vm.terminal = true;
      break;
    }
    case "RUN_FAILED": {
      vm.terminal = true;
      break;
    }
    default:
      break;
  }
  return vm;
}

export function buildViewModel(events: RunEvent[]): RunViewModel {
  const vm = emptyViewModel();
  for (const event of events) applyEvent(vm, event);
  return vm;
}

/** Diff entries for one sub-function at one level, in order. */
export function patchesFor(vm: RunViewModel, name: string,
                           level: CodeLevel): PatchEntry[] {
  return vm.patches.filter((entry) => entry.name === name && entry.level === level);
}

export function pendingCount(vm: RunViewModel): number {
  let count = 0;
  for (const iv of vm.interventions.values()) {
    if (iv.status === "PENDING") count++;
  }
  return count;
}

export function levelOrder(): CodeLevel[] {
  return [...LEVELS];
}
