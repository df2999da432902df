// Wire types mirrored from the engine's HTTP API (api_version 1).

export type EventKind =
  | "RUN_STARTED"
  | "SECTION_SUMMARIZED"
  | "PLAN_ACCEPTED"
  | "SPEC_ACCEPTED"
  | "CODING_ATTEMPT"
  | "LEVEL_ACCEPTED"
  | "LEVEL_EXHAUSTED"
  | "PROVIDER_CALL"
  | "PATCH_APPLIED"
  | "REFLECTION_DECIDED"
  | "INTERVENTION_REQUESTED"
  | "INTERVENTION_ANSWERED"
  | "PROMPT_OPTIMIZED"
  | "NOISE_INJECTED"
  | "HLS_LINTED"
  | "HLS_OPTIMIZED"
  | "SYNTH_INVOKED"
  | "RUN_COMPLETED"
  | "RUN_FAILED";

export interface RunEvent {
  seq: number;
  ts: number;
  kind: EventKind;
  payload: Record<string, unknown>;
  payload_hash: string;
}

export interface RunSummary {
  api_version: number;
  run_id: string;
  phase: string;
  current_subfunction: string | null;
  pending_intervention: boolean;
  pending_intervention_id: string | null;
  events: number;
  metrics: Metrics;
}

export interface Metrics {
  correct: boolean | null;
  n_interventions: number;
  coding_attempts: Record<string, number>;
  avg_coding: number;
}

export interface PlanItem {
  name: string;
  goal: string;
  depends_on: string[];
}

export interface Plan {
  target: string;
  sub_functions: PlanItem[];
}

export interface IoField {
  name: string;
  type: string;
  width: string;
}

export interface SubFunctionSpec {
  name: string;
  inputs: IoField[];
  outputs: IoField[];
  functionality: string;
  references: { section_id: string; quote: string }[];
  depends_on: string[];
  side_effect_only: boolean;
  revision: number;
}

export interface Intervention {
  request_id: string;
  observations: string;
  attempts: string;
  questions: string[];
  created_at: string;
  status: "PENDING" | "ANSWERED";
  answer: string | null;
}

export type CodeLevel = "PSEUDO" | "SCRIPT" | "SYNTH";
