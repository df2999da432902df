// DOM wiring. All state lives in the stores (TimelineStore, RunViewModel,
// InterventionInbox); this file only renders them and forwards clicks.

import { ApiClient } from "./api.js";
import { InterventionInbox } from "./inbox.js";
import { subscribeToRun, type Subscription } from "./stream.js";
import { TimelineStore } from "./timeline.js";
import type { CodeLevel, Intervention, RunEvent } from "./types.js";
import {
  applyEvent,
  emptyViewModel,
  levelOrder,
  patchesFor,
  pendingCount,
  type RunViewModel,
} from "./viewmodel.js";

const api = new ApiClient("");

let subscription: Subscription | null = null;
let timeline = new TimelineStore();
let vm: RunViewModel = emptyViewModel();
let inbox: InterventionInbox | null = null;
let selectedRun: string | null = null;
let selectedNode: string | null = null;

function el(tag: string, cls?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

async function renderRunList(): Promise<void> {
  const container = document.getElementById("runs")!;
  container.textContent = "";
  const runs = await api.listRuns();
  for (const run of runs) {
    const row = el("div", "run-row" + (run.run_id === selectedRun ? " selected" : ""));
    row.appendChild(el("span", "run-id", run.run_id));
    row.appendChild(el("span", `phase phase-${run.phase.toLowerCase()}`, run.phase));
    if (run.pending_intervention) row.appendChild(el("span", "badge", "!"));
    row.addEventListener("click", () => selectRun(run.run_id));
    container.appendChild(row);
  }
}

function onEvent(event: RunEvent): void {
  timeline.add(event);
  applyEvent(vm, event);
  if (event.kind === "INTERVENTION_REQUESTED" && inbox) {
    inbox.upsert((event.payload as any)["request"] as Intervention);
  }
  if (event.kind === "INTERVENTION_ANSWERED" && inbox) {
    inbox.markAnswered((event.payload as any)["request_id"] as string,
                       (event.payload as any)["answer"] as string);
  }
  renderAll();
}

function selectRun(runId: string): void {
  if (subscription) subscription.close();
  selectedRun = runId;
  selectedNode = null;
  timeline = new TimelineStore();
  vm = emptyViewModel();
  inbox = new InterventionInbox(api, runId);
  inbox.onChange(renderInbox);
  void inbox.refresh();
  subscription = subscribeToRun("", runId, {
    onEvent,
    onStale: (stale) => {
      timeline.setStale(stale);
      document.getElementById("stale")!.style.display = stale ? "inline" : "none";
    },
    onEnd: () => void renderRunList(),
  });
  renderAll();
  void renderRunList();
}

function renderTimeline(): void {
  const container = document.getElementById("timeline")!;
  container.textContent = "";
  for (const { group, rows } of timeline.grouped()) {
    container.appendChild(el("h3", "group-heading", group));
    for (const row of rows) {
      const div = el("div", "event" + (row.highlight ? " highlight" : ""));
      div.appendChild(el("span", "seq", `#${row.seq}`));
      div.appendChild(el("span", "kind", row.kind));
      div.appendChild(el("span", "label", row.label));
      if (row.collapsed) {
        div.classList.add("collapsed");
        const expand = el("button", "expand", "raw");
        expand.addEventListener("click", () => {
          const pre = el("pre", "payload", JSON.stringify(row.payload, null, 2));
          div.appendChild(pre);
          expand.remove();
        });
        div.appendChild(expand);
      }
      container.appendChild(div);
    }
  }
  container.scrollTop = container.scrollHeight;
}

function renderPlan(): void {
  const container = document.getElementById("plan")!;
  container.textContent = "";
  if (!vm.plan) {
    container.appendChild(el("p", "empty", "no plan yet"));
    return;
  }
  for (const node of vm.nodes) {
    const row = el("div", "plan-node" + (node.name === selectedNode ? " selected" : ""));
    row.appendChild(el("span", "node-name", node.name));
    for (const level of levelOrder()) {
      row.appendChild(el("span", `level level-${node.levels[level]}`, level[0]!));
    }
    row.appendChild(el("span", "attempts", `${node.attempts}`));
    row.addEventListener("click", () => {
      selectedNode = node.name;
      void renderSpec();
      renderPatches();
      renderPlan();
    });
    container.appendChild(row);
  }
}

async function renderSpec(): Promise<void> {
  const container = document.getElementById("spec")!;
  container.textContent = "";
  if (!selectedRun || !selectedNode) {
    container.appendChild(el("p", "empty", "select a sub-function"));
    return;
  }
  try {
    const spec = await api.spec(selectedRun, selectedNode);
    container.appendChild(el("h3", undefined, `${spec.name} (rev ${spec.revision})`));
    container.appendChild(el("p", "functionality", spec.functionality));
    const io = el("div", "io");
    io.appendChild(el("div", undefined,
      "in: " + spec.inputs.map((f) => `${f.name}:${f.width}`).join(", ")));
    io.appendChild(el("div", undefined,
      "out: " + spec.outputs.map((f) => `${f.name}:${f.width}`).join(", ")));
    container.appendChild(io);
    for (const reference of spec.references) {
      const quote = el("blockquote", "reference");
      quote.appendChild(el("span", "section", `[${reference.section_id}] `));
      quote.appendChild(el("span", undefined, reference.quote));
      container.appendChild(quote);
    }
  } catch {
    container.appendChild(el("p", "empty", "no dictionary yet"));
  }
}

function renderPatches(): void {
  const container = document.getElementById("patches")!;
  container.textContent = "";
  if (!selectedNode) return;
  for (const level of levelOrder() as CodeLevel[]) {
    const entries = patchesFor(vm, selectedNode, level);
    if (!entries.length) continue;
    container.appendChild(el("h4", undefined, `${level} (${entries.length} patches)`));
    for (const entry of entries) {
      const details = el("details", "patch");
      details.appendChild(el("summary", undefined,
        `v${entry.version} @#${entry.seq} (+${entry.diff.filter(d => d.op === "+").length}` +
        `/-${entry.diff.filter(d => d.op === "-").length})`));
      const pre = el("pre", "diff");
      for (const line of entry.diff) {
        pre.appendChild(el("div", line.op === "+" ? "add" : line.op === "-" ? "del" : "ctx",
                           line.op + " " + line.text));
      }
      details.appendChild(pre);
      container.appendChild(details);
    }
  }
  const prompts = vm.promptRevisions.filter((r) => r.name === selectedNode);
  if (prompts.length) {
    container.appendChild(el("h4", undefined, "prompt optimizations"));
    for (const revision of prompts) {
      const div = el("div", "prompt-revision");
      div.appendChild(el("div", "trigger", revision.trigger_summary));
      div.appendChild(el("pre", "addendum", revision.addendum));
      container.appendChild(div);
    }
  }
}

function renderInbox(): void {
  const container = document.getElementById("inbox")!;
  container.textContent = "";
  if (!inbox) return;
  document.getElementById("inbox-badge")!.textContent = String(inbox.badgeCount());
  for (const item of inbox.all()) {
    const card = el("div", `intervention ${item.request.status.toLowerCase()}`);
    card.appendChild(el("h4", undefined,
      `${item.request.request_id} [${item.request.status}]`));
    card.appendChild(el("p", "observations", item.request.observations));
    for (const question of item.request.questions) {
      card.appendChild(el("p", "question", "? " + question));
    }
    if (item.request.status === "PENDING") {
      const text = document.createElement("textarea");
      text.placeholder = "guidance for the pipeline";
      const routePick = document.createElement("select");
      for (const option of ["", "REGENERATE_CURRENT", "REVISE_INSTRUCTIONS",
                            "REVISE_PRIOR"]) {
        const opt = document.createElement("option");
        opt.value = option;
        opt.textContent = option || "(no route directive)";
        routePick.appendChild(opt);
      }
      const target = document.createElement("input");
      target.placeholder = "target (for revise routes)";
      const submit = el("button", undefined, "answer") as HTMLButtonElement;
      submit.disabled = item.submitting;
      submit.addEventListener("click", () => {
        void inbox!.submit(item.request.request_id, text.value,
                           routePick.value || undefined,
                           target.value || undefined);
      });
      card.append(text, routePick, target, submit);
    } else if (item.request.answer) {
      card.appendChild(el("pre", "answer", item.request.answer));
    }
    if (item.notice) card.appendChild(el("p", "notice", item.notice));
    container.appendChild(card);
  }
}

function renderMetrics(): void {
  const container = document.getElementById("metrics")!;
  container.textContent = "";
  if (!selectedRun) return;
  void api.run(selectedRun).then((summary) => {
    const m = summary.metrics;
    container.appendChild(el("div", undefined, `phase: ${summary.phase}`));
    container.appendChild(el("div", undefined,
      `correct: ${m.correct === null ? "unknown" : m.correct}`));
    container.appendChild(el("div", undefined, `interventions: ${m.n_interventions}`));
    container.appendChild(el("div", undefined,
      `avg coding attempts: ${m.avg_coding.toFixed(2)}`));
  });
}

function renderAll(): void {
  renderTimeline();
  renderPlan();
  renderPatches();
  renderInbox();
  renderMetrics();
}

document.addEventListener("DOMContentLoaded", () => {
  void renderRunList();
  setInterval(() => void renderRunList(), 3000);
});
