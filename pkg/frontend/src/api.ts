// Thin client for the annotation service. The UI talks to the backend only
// through these three endpoints; word tokenization always comes from the
// server so highlight indices agree with what the corpus loader expects.

import { AnnotationDraft, highlightedIndices } from "./draft.js";

export interface Task {
  doc_id: string;
  text: string;
  words: string[];
  completed_annotators: string[];
}

export interface Progress {
  total_docs: number;
  fully_annotated: number;
  annotations: number;
  target_annotators: number;
}

export type SubmitOutcome =
  | { kind: "accepted" }
  | { kind: "rejected"; status: number; reason: string }
  | { kind: "network-error"; reason: string };

export type NextTaskOutcome =
  | { kind: "task"; task: Task }
  | { kind: "exhausted" }
  | { kind: "network-error"; reason: string };

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  async nextTask(annotatorId: string): Promise<NextTaskOutcome> {
    let response: Response;
    try {
      response = await this.fetchImpl(
        `${this.baseUrl}/tasks/next?annotator=${encodeURIComponent(annotatorId)}`,
      );
    } catch (err) {
      return { kind: "network-error", reason: String(err) };
    }
    if (response.status === 404) return { kind: "exhausted" };
    if (!response.ok) return { kind: "network-error", reason: `unexpected status ${response.status}` };
    return { kind: "task", task: (await response.json()) as Task };
  }

  async submit(draft: AnnotationDraft): Promise<SubmitOutcome> {
    if (draft.label === null) {
      return { kind: "rejected", status: 0, reason: "no label chosen" };
    }
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}/annotations`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({
          doc_id: draft.docId,
          annotator_id: draft.annotatorId,
          highlighted_word_indices: highlightedIndices(draft),
          label: draft.label,
        }),
      });
    } catch (err) {
      return { kind: "network-error", reason: String(err) };
    }
    if (response.status === 201) return { kind: "accepted" };
    let reason = `status ${response.status}`;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) reason = body.detail;
    } catch {
      // keep the status-based reason
    }
    return { kind: "rejected", status: response.status, reason };
  }

  async progress(): Promise<Progress | null> {
    try {
      const response = await this.fetchImpl(`${this.baseUrl}/progress`);
      if (!response.ok) return null;
      return (await response.json()) as Progress;
    } catch {
      return null;
    }
  }
}
