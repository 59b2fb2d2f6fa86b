// DOM wiring: one task at a time, clickable word spans, a binary label
// choice, a live highlight-fraction indicator, and a submit button that
// stays disabled until the draft passes the guard. The rendered mask and
// the submitted mask come from the same draft object, so they can never
// disagree. Interaction order (highlights vs label) is logged for review.

import { ApiClient, Task } from "./api.js";
import {
  AnnotationDraft,
  MIN_HIGHLIGHT_FRACTION,
  canSubmit,
  highlightFraction,
  newDraft,
  setLabel,
  toggleHighlight,
} from "./draft.js";
import { KeyValueStore, clearDraft, loadDraft, saveDraft } from "./storage.js";

export interface AppElements {
  words: HTMLElement;
  fraction: HTMLElement;
  status: HTMLElement;
  progress: HTMLElement;
  submit: HTMLButtonElement;
  retry: HTMLButtonElement;
  labelNegative: HTMLInputElement;
  labelPositive: HTMLInputElement;
}

export class AnnotationApp {
  private draft: AnnotationDraft | null = null;
  private task: Task | null = null;
  private readonly interactionLog: string[] = [];

  constructor(
    private readonly api: ApiClient,
    private readonly annotatorId: string,
    private readonly elements: AppElements,
    private readonly store: KeyValueStore,
    private readonly minFraction = MIN_HIGHLIGHT_FRACTION,
  ) {
    elements.submit.addEventListener("click", () => void this.submit());
    elements.retry.addEventListener("click", () => void this.submit());
    elements.labelNegative.addEventListener("change", () => this.chooseLabel(0));
    elements.labelPositive.addEventListener("change", () => this.chooseLabel(1));
  }

  async start(): Promise<void> {
    await this.loadNextTask();
    await this.refreshProgress();
  }

  private async loadNextTask(): Promise<void> {
    const outcome = await this.api.nextTask(this.annotatorId);
    if (outcome.kind === "exhausted") {
      this.task = null;
      this.draft = null;
      this.elements.words.textContent = "";
      this.setStatus("No tasks left for you. Thanks for annotating!");
      this.render();
      return;
    }
    if (outcome.kind === "network-error") {
      this.setStatus(`Could not reach the server: ${outcome.reason}`);
      this.elements.retry.hidden = false;
      return;
    }
    this.task = outcome.task;
    this.draft =
      loadDraft(this.store, outcome.task.doc_id, this.annotatorId, outcome.task.words.length) ??
      newDraft(outcome.task.doc_id, this.annotatorId, outcome.task.words.length);
    this.setStatus("");
    this.render();
  }

  private chooseLabel(label: 0 | 1): void {
    if (!this.draft) return;
    this.interactionLog.push(`label:${label}`);
    this.draft = setLabel(this.draft, label);
    saveDraft(this.store, this.draft);
    this.render();
  }

  private clickWord(index: number): void {
    if (!this.draft) return;
    this.interactionLog.push(`toggle:${index}`);
    this.draft = toggleHighlight(this.draft, index);
    saveDraft(this.store, this.draft);
    this.render();
  }

  private async submit(): Promise<void> {
    if (!this.draft || !canSubmit(this.draft, this.minFraction)) return;
    this.elements.retry.hidden = true;
    const outcome = await this.api.submit(this.draft);
    if (outcome.kind === "accepted") {
      console.info("interaction order", this.draft.docId, this.interactionLog.join(","));
      this.interactionLog.length = 0;
      clearDraft(this.store, this.draft.docId, this.annotatorId);
      this.draft = null;
      await this.loadNextTask();
      await this.refreshProgress();
      return;
    }
    if (outcome.kind === "network-error") {
      // the draft stays in memory and in storage; offer a retry
      this.setStatus(`Submission failed: ${outcome.reason}. Your work is saved.`);
      this.elements.retry.hidden = false;
      return;
    }
    this.setStatus(`Server rejected the submission: ${outcome.reason}`);
    if (outcome.status === 409) {
      // someone (or another tab) already submitted for this doc; move on
      clearDraft(this.store, this.draft.docId, this.annotatorId);
      await this.loadNextTask();
    }
  }

  private async refreshProgress(): Promise<void> {
    const progress = await this.api.progress();
    if (progress) {
      this.elements.progress.textContent =
        `${progress.fully_annotated} of ${progress.total_docs} documents fully annotated ` +
        `(${progress.annotations} annotations total)`;
    }
  }

  private setStatus(message: string): void {
    this.elements.status.textContent = message;
  }

  private render(): void {
    const { words, fraction, submit, labelNegative, labelPositive } = this.elements;
    words.textContent = "";
    if (!this.task || !this.draft) {
      fraction.textContent = "";
      submit.disabled = true;
      return;
    }
    this.task.words.forEach((word, i) => {
      const span = document.createElement("span");
      span.textContent = word;
      span.className = this.draft?.highlights[i] ? "word highlighted" : "word";
      span.addEventListener("click", () => this.clickWord(i));
      words.appendChild(span);
      words.appendChild(document.createTextNode(" "));
    });
    const frac = highlightFraction(this.draft);
    fraction.textContent = `${(frac * 100).toFixed(1)}% of words highlighted (minimum ${(
      this.minFraction * 100
    ).toFixed(0)}%)`;
    labelNegative.checked = this.draft.label === 0;
    labelPositive.checked = this.draft.label === 1;
    submit.disabled = !canSubmit(this.draft, this.minFraction);
  }
}

export function mount(): void {
  const params = new URLSearchParams(window.location.search);
  const annotatorId =
    params.get("annotator") ?? window.prompt("Annotator id?")?.trim() ?? "";
  if (!annotatorId) {
    document.body.textContent = "An annotator id is required (use ?annotator=YOURID).";
    return;
  }
  const byId = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;
  const app = new AnnotationApp(
    new ApiClient(""),
    annotatorId,
    {
      words: byId("words"),
      fraction: byId("fraction"),
      status: byId("status"),
      progress: byId("progress"),
      submit: byId<HTMLButtonElement>("submit"),
      retry: byId<HTMLButtonElement>("retry"),
      labelNegative: byId<HTMLInputElement>("label-negative"),
      labelPositive: byId<HTMLInputElement>("label-positive"),
    },
    window.localStorage,
  );
  void app.start();
}

if (typeof document !== "undefined" && document.getElementById("words")) {
  mount();
}
