// Draft persistence keyed by (document, annotator) so a reload or crash
// never loses in-progress work. Backed by window.localStorage in the
// browser; tests inject a plain in-memory stand-in.

import { AnnotationDraft } from "./draft.js";

export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

function draftKey(docId: string, annotatorId: string): string {
  return `annotation-draft:${docId}:${annotatorId}`;
}

export function saveDraft(store: KeyValueStore, draft: AnnotationDraft): void {
  store.setItem(draftKey(draft.docId, draft.annotatorId), JSON.stringify(draft));
}

export function loadDraft(
  store: KeyValueStore,
  docId: string,
  annotatorId: string,
  wordCount: number,
): AnnotationDraft | null {
  const raw = store.getItem(draftKey(docId, annotatorId));
  if (raw === null) return null;
  let parsed: unknown;
  try {
    parsed = JSON.parse(raw);
  } catch {
    return null;
  }
  const draft = parsed as AnnotationDraft;
  if (
    draft === null ||
    typeof draft !== "object" ||
    draft.docId !== docId ||
    draft.annotatorId !== annotatorId ||
    !Array.isArray(draft.highlights) ||
    draft.highlights.length !== wordCount ||
    !(draft.label === null || draft.label === 0 || draft.label === 1)
  ) {
    return null;
  }
  return {
    docId,
    annotatorId,
    highlights: draft.highlights.map(Boolean),
    label: draft.label,
  };
}

export function clearDraft(store: KeyValueStore, docId: string, annotatorId: string): void {
  store.removeItem(draftKey(docId, annotatorId));
}

export class MemoryStore implements KeyValueStore {
  private readonly data = new Map<string, string>();

  getItem(key: string): string | null {
    return this.data.has(key) ? (this.data.get(key) as string) : null;
  }

  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }

  removeItem(key: string): void {
    this.data.delete(key);
  }
}
