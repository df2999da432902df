// Intervention inbox: the one mutation surface of the dashboard. Submissions
// are optimistic only in the form (disabled while in flight); the stored
// state flips on the server response or on the INTERVENTION_ANSWERED event,
// whichever lands first. A 409 is surfaced as "answered by another operator".

import type { ApiClient } from "./api.js";
import type { Intervention } from "./types.js";

export interface InboxItemState {
  request: Intervention;
  submitting: boolean;
  notice: string; // inline error/conflict notice
}

export class InterventionInbox {
  private items = new Map<string, InboxItemState>();
  private listeners: (() => void)[] = [];

  constructor(private api: ApiClient, private runId: string) {}

  async refresh(): Promise<void> {
    const interventions = await this.api.interventions(this.runId);
    for (const request of interventions) {
      const existing = this.items.get(request.request_id);
      if (existing) {
        existing.request = request;
      } else {
        this.items.set(request.request_id, {
          request,
          submitting: false,
          notice: "",
        });
      }
    }
    this.notify();
  }

  upsert(request: Intervention): void {
    const existing = this.items.get(request.request_id);
    if (existing) {
      existing.request = request;
    } else {
      this.items.set(request.request_id, { request, submitting: false, notice: "" });
    }
    this.notify();
  }

  markAnswered(requestId: string, answer: string): void {
    const item = this.items.get(requestId);
    if (item) {
      item.request.status = "ANSWERED";
      item.request.answer = answer;
      this.notify();
    }
  }

  pending(): InboxItemState[] {
    return [...this.items.values()].filter((i) => i.request.status === "PENDING");
  }

  all(): InboxItemState[] {
    return [...this.items.values()];
  }

  badgeCount(): number {
    return this.pending().length;
  }

  /**
   * Submit an answer. Routes may be attached via the directive picker; the
   * wire format is the engine's answer grammar (`ROUTE: <route> [target]` on
   * the first line, guidance below).
   */
  async submit(requestId: string, guidance: string, route?: string,
               target?: string): Promise<InboxItemState> {
    const item = this.items.get(requestId);
    if (!item) throw new Error(`unknown intervention ${requestId}`);
    let answer = guidance;
    if (route) {
      answer = `ROUTE: ${route}${target ? " " + target : ""}\n${guidance}`;
    }
    item.submitting = true;
    item.notice = "";
    this.notify();
    try {
      const outcome = await this.api.answer(this.runId, requestId, answer);
      if (outcome.ok) {
        item.request.status = "ANSWERED";
        item.request.answer = answer;
      } else if (outcome.conflict) {
        item.notice = "already answered by another operator";
        await this.refresh();
      } else {
        item.notice = outcome.detail || "answer rejected";
      }
    } finally {
      item.submitting = false;
      this.notify();
    }
    return item;
  }

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }
}
