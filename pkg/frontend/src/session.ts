// Session controller: owns the server snapshot, the fetched task queue, and
// the local pending-answer queue. The rendered view is a pure function of
// those three, so the UI can be driven and tested headlessly.

import { Api, StateDto, TaskDto } from "./api.js";
import { AnswerQueue, answerKey } from "./queue.js";

export type Judgment = "similar" | "dissimilar" | "unsure";

export const JUDGMENT_VALUES: Record<Judgment, number> = {
  similar: +1,
  dissimilar: -1,
  unsure: 0,
};

export type Status = "loading" | "labeling" | "computing" | "offline";

export interface ClusterSummary {
  k: number;
  sizes: number[];
}

export interface ViewModel {
  status: Status;
  currentTask: TaskDto | null;
  batchAnswered: number;     // locally answered within the current batch
  batchTotal: number;
  iteration: number;
  clusters: ClusterSummary | null;
  queuedAnswers: number;     // accepted locally, not yet acknowledged
  ari: number | null;
}

function clusterSummary(state: StateDto | null): ClusterSummary | null {
  if (!state) return null;
  const sizes = new Array(state.k).fill(0);
  for (const label of state.labels) sizes[label] += 1;
  sizes.sort((a, b) => b - a);
  return { k: state.k, sizes };
}

export class SessionController {
  state: StateDto | null = null;
  tasks: TaskDto[] = [];
  taskIteration = -1;
  offline = false;
  answeredLocally = new Set<string>();
  queue = new AnswerQueue();
  private timer: ReturnType<typeof setTimeout> | null = null;
  onChange: (() => void) | null = null;

  constructor(private api: Api, private sid: string,
              private pollMs: number = 1000, private taskCount: number = 5) {}

  private changed(): void {
    if (this.onChange) this.onChange();
  }

  /** Pull state and pending tasks; flush any queued answers first. */
  async refresh(): Promise<void> {
    try {
      await this.flushQueue();
      this.state = await this.api.getState(this.sid);
      const tasksDto = await this.api.getTasks(this.sid, this.taskCount);
      if (tasksDto.iteration !== this.taskIteration) {
        this.taskIteration = tasksDto.iteration;
        this.answeredLocally.clear();
      }
      this.tasks = tasksDto.tasks;
      this.offline = false;
    } catch (err) {
      this.offline = true;
    }
    this.changed();
  }

  private async flushQueue(): Promise<void> {
    const result = await this.queue.flush(async (answer) => {
      await this.api.submitAnswer(this.sid, answer.pair, answer.value);
    });
    if (result.offline) throw new Error("offline");
  }

  /** Record a judgment for a rendered task (defaults to the current one):
   * optimistic local advance, then a flush attempt. Returns false for a
   * duplicate (double submit of the same task) or when nothing is pending. */
  async submitJudgment(choice: Judgment | number,
                       task: TaskDto | null = null): Promise<boolean> {
    const target = task ?? this.currentTask();
    if (!target) return false;
    const value = typeof choice === "number" ? choice : JUDGMENT_VALUES[choice];
    if (!this.queue.enqueue(this.taskIteration, target.pair, value)) {
      return false;
    }
    this.answeredLocally.add(answerKey(this.taskIteration, target.pair));
    this.changed();
    await this.refresh();
    return true;
  }

  currentTask(): TaskDto | null {
    for (const task of this.tasks) {
      if (!this.answeredLocally.has(answerKey(this.taskIteration, task.pair))) {
        return task;
      }
    }
    return null;
  }

  viewModel(): ViewModel {
    const state = this.state;
    const current = this.currentTask();
    let status: Status;
    if (this.offline) status = "offline";
    else if (!state) status = "loading";
    else if (current) status = "labeling";
    else status = "computing";
    return {
      status,
      currentTask: current,
      batchAnswered: state
        ? Math.min(state.batch.answered + this.queue.length, state.batch.total)
        : 0,
      batchTotal: state ? state.batch.total : 0,
      iteration: state ? state.iteration : 0,
      clusters: clusterSummary(state),
      queuedAnswers: this.queue.length,
      ari: state ? state.ari : null,
    };
  }

  startPolling(): void {
    if (this.timer !== null) return;
    const tick = async () => {
      await this.refresh();
      this.timer = setTimeout(tick, this.pollMs);
    };
    this.timer = setTimeout(tick, this.pollMs);
  }

  stopPolling(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }
}
