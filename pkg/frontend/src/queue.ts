// Local pending-answer queue: survives offline periods, flushes in order,
// and guarantees at most one submission attempt chain per (iteration, pair).
// Together with the server's conflict-on-duplicate rule this yields
// exactly-once recording.

import { ApiError, NetworkError } from "./api.js";

export interface PendingAnswer {
  key: string;
  pair: [number, number];
  value: number;
  iteration: number;
}

export function answerKey(iteration: number, pair: [number, number]): string {
  const [u, v] = pair[0] < pair[1] ? pair : [pair[1], pair[0]];
  return `${iteration}:${u}:${v}`;
}

export type SubmitFn = (answer: PendingAnswer) => Promise<void>;

export interface FlushResult {
  sent: number;
  conflicts: number;
  offline: boolean;
}

export class AnswerQueue {
  private pending: PendingAnswer[] = [];
  private seen = new Set<string>();
  private flushing = false;

  get length(): number {
    return this.pending.length;
  }

  /** Queue one answer; returns false for a duplicate (same batch, same pair),
   * so double-clicks collapse into one submission. */
  enqueue(iteration: number, pair: [number, number], value: number): boolean {
    const key = answerKey(iteration, pair);
    if (this.seen.has(key)) return false;
    this.seen.add(key);
    this.pending.push({ key, pair, value, iteration });
    return true;
  }

  /** Send queued answers in order. Stops at the first network failure
   * (answers stay queued for the next flush); a conflict means the server
   * already has the answer or moved past it, so the entry is dropped. */
  async flush(submit: SubmitFn): Promise<FlushResult> {
    if (this.flushing) return { sent: 0, conflicts: 0, offline: false };
    this.flushing = true;
    let sent = 0;
    let conflicts = 0;
    try {
      while (this.pending.length > 0) {
        const head = this.pending[0];
        try {
          await submit(head);
          sent += 1;
        } catch (err) {
          if (err instanceof NetworkError) {
            return { sent, conflicts, offline: true };
          }
          if (err instanceof ApiError && err.status === 409) {
            conflicts += 1;
          } else {
            throw err;
          }
        }
        this.pending.shift();
      }
      return { sent, conflicts, offline: false };
    } finally {
      this.flushing = false;
    }
  }
}
