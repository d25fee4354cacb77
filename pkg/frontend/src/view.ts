// DOM rendering. The view is rebuilt from the controller's view model on
// every change; no incremental state lives in the DOM except the slider
// position and mode toggle.

import { ItemPayload, TaskDto } from "./api.js";
import { Judgment, SessionController, ViewModel } from "./session.js";

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderPayload(payload: ItemPayload): HTMLElement {
  if (payload.image) {
    const img = el("img", "item-image") as HTMLImageElement;
    img.src = payload.image;
    return img;
  }
  return el("div", "item-text", payload.text ?? "(empty)");
}

export class View {
  private sliderMode = false;
  private renderedTask: TaskDto | null = null;

  constructor(private root: HTMLElement,
              private controller: SessionController) {
    controller.onChange = () => this.render();
    document.addEventListener("keydown", (event) => this.onKey(event));
  }

  private onKey(event: KeyboardEvent): void {
    const mapping: Record<string, Judgment> = {
      ArrowLeft: "dissimilar",
      ArrowRight: "similar",
      " ": "unsure",
    };
    const judgment = mapping[event.key];
    if (judgment && !this.sliderMode && this.renderedTask) {
      event.preventDefault();
      void this.controller.submitJudgment(judgment, this.renderedTask);
    }
  }

  render(): void {
    const vm = this.controller.viewModel();
    this.renderedTask = vm.currentTask;
    this.root.replaceChildren();
    this.root.appendChild(this.banner(vm));
    this.root.appendChild(this.progress(vm));
    if (vm.status === "labeling" && vm.currentTask) {
      this.root.appendChild(this.taskCard(vm));
    } else if (vm.status === "computing") {
      this.root.appendChild(el("div", "waiting",
                               "computing next batch..."));
    } else if (vm.status === "loading") {
      this.root.appendChild(el("div", "waiting", "loading session..."));
    }
    this.root.appendChild(this.clusterPanel(vm));
  }

  private banner(vm: ViewModel): HTMLElement {
    if (vm.status === "offline") {
      const box = el("div", "banner offline");
      box.appendChild(el("span", undefined,
                         `service unreachable; ${vm.queuedAnswers} answer(s) ` +
                         "queued locally"));
      const retry = el("button", "retry", "retry now") as HTMLButtonElement;
      retry.onclick = () => void this.controller.refresh();
      box.appendChild(retry);
      return box;
    }
    if (vm.queuedAnswers > 0) {
      return el("div", "banner syncing", `${vm.queuedAnswers} answer(s) syncing`);
    }
    return el("div", "banner ok", `iteration ${vm.iteration}`);
  }

  private progress(vm: ViewModel): HTMLElement {
    const wrap = el("div", "progress");
    const bar = el("div", "progress-bar");
    const pct = vm.batchTotal > 0 ? (100 * vm.batchAnswered) / vm.batchTotal : 0;
    bar.style.width = `${pct}%`;
    wrap.appendChild(bar);
    wrap.appendChild(el("span", "progress-label",
                        `${vm.batchAnswered} / ${vm.batchTotal} in batch`));
    return wrap;
  }

  private taskCard(vm: ViewModel): HTMLElement {
    const task = vm.currentTask!;
    const card = el("div", "task-card");
    const pairRow = el("div", "pair");
    pairRow.appendChild(renderPayload(task.left));
    pairRow.appendChild(el("div", "vs", "vs"));
    pairRow.appendChild(renderPayload(task.right));
    card.appendChild(pairRow);

    const modeRow = el("label", "mode-toggle");
    const toggle = el("input") as HTMLInputElement;
    toggle.type = "checkbox";
    toggle.checked = this.sliderMode;
    toggle.onchange = () => {
      this.sliderMode = toggle.checked;
      this.render();
    };
    modeRow.appendChild(toggle);
    modeRow.appendChild(el("span", undefined, "slider mode"));
    card.appendChild(modeRow);

    if (this.sliderMode) {
      const sliderRow = el("div", "slider-row");
      const slider = el("input") as HTMLInputElement;
      slider.type = "range";
      slider.min = "-1";
      slider.max = "1";
      slider.step = "0.01";
      slider.value = "0";
      const label = el("span", "slider-value", "0.00");
      slider.oninput = () => {
        label.textContent = Number(slider.value).toFixed(2);
      };
      const send = el("button", "submit", "submit") as HTMLButtonElement;
      send.onclick = () =>
        void this.controller.submitJudgment(Number(slider.value), task);
      sliderRow.append(slider, label, send);
      card.appendChild(sliderRow);
    } else {
      const buttons = el("div", "judgments");
      const specs: [Judgment, string][] = [
        ["dissimilar", "dissimilar (←)"],
        ["unsure", "unsure (space)"],
        ["similar", "similar (→)"],
      ];
      for (const [judgment, labelText] of specs) {
        const button = el("button", `judge ${judgment}`, labelText) as HTMLButtonElement;
        // bind the rendered task so a double click cannot hit the next task
        button.onclick = () => void this.controller.submitJudgment(judgment, task);
        buttons.appendChild(button);
      }
      card.appendChild(buttons);
    }
    return card;
  }

  private clusterPanel(vm: ViewModel): HTMLElement {
    const panel = el("div", "clusters");
    if (!vm.clusters) return panel;
    panel.appendChild(el("h3", undefined,
                         `current clustering: ${vm.clusters.k} cluster(s)`));
    const sizes = el("div", "cluster-sizes");
    for (const size of vm.clusters.sizes) {
      const chip = el("span", "cluster-chip", String(size));
      sizes.appendChild(chip);
    }
    panel.appendChild(sizes);
    if (vm.ari !== null) {
      panel.appendChild(el("div", "ari", `ARI vs uploaded truth: ${vm.ari.toFixed(3)}`));
    }
    return panel;
  }
}
