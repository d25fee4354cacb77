import { describe, expect, it } from "vitest";

import { ApiError, NetworkError } from "../src/api.js";
import { AnswerQueue, answerKey } from "../src/queue.js";

describe("answerKey", () => {
  it("normalizes pair order", () => {
    expect(answerKey(2, [3, 1])).toBe("2:1:3");
    expect(answerKey(2, [1, 3])).toBe("2:1:3");
  });
});

describe("AnswerQueue", () => {
  it("rejects duplicates within one batch but not across batches", () => {
    const queue = new AnswerQueue();
    expect(queue.enqueue(0, [0, 1], 1)).toBe(true);
    expect(queue.enqueue(0, [1, 0], -1)).toBe(false);
    expect(queue.enqueue(1, [0, 1], -1)).toBe(true);
    expect(queue.length).toBe(2);
  });

  it("flushes in order and empties", async () => {
    const queue = new AnswerQueue();
    queue.enqueue(0, [0, 1], 1);
    queue.enqueue(0, [0, 2], -1);
    const sent: string[] = [];
    const result = await queue.flush(async (a) => {
      sent.push(a.key);
    });
    expect(result).toEqual({ sent: 2, conflicts: 0, offline: false });
    expect(sent).toEqual(["0:0:1", "0:0:2"]);
    expect(queue.length).toBe(0);
  });

  it("keeps answers across network failures and resends once", async () => {
    const queue = new AnswerQueue();
    queue.enqueue(0, [0, 1], 1);
    let attempts = 0;
    const failing = async () => {
      attempts += 1;
      throw new NetworkError("down");
    };
    expect((await queue.flush(failing)).offline).toBe(true);
    expect(queue.length).toBe(1);
    const delivered: string[] = [];
    await queue.flush(async (a) => {
      delivered.push(a.key);
    });
    expect(attempts).toBe(1);
    expect(delivered).toEqual(["0:0:1"]);
  });

  it("treats conflicts as already-recorded and drops them", async () => {
    const queue = new AnswerQueue();
    queue.enqueue(0, [0, 1], 1);
    queue.enqueue(0, [0, 2], 1);
    const delivered: string[] = [];
    const result = await queue.flush(async (a) => {
      if (a.key === "0:0:1") throw new ApiError(409, "already answered");
      delivered.push(a.key);
    });
    expect(result).toEqual({ sent: 1, conflicts: 1, offline: false });
    expect(delivered).toEqual(["0:0:2"]);
    expect(queue.length).toBe(0);
  });
});
