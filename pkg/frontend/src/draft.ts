// In-progress annotation state for one document. The highlight mask always
// has one entry per word of the server-provided tokenization; the submit
// guard (label chosen, enough words highlighted) lives here so no UI path
// can bypass it.

export const MIN_HIGHLIGHT_FRACTION = 0.02;

export interface AnnotationDraft {
  docId: string;
  annotatorId: string;
  highlights: boolean[];
  label: 0 | 1 | null;
}

export function newDraft(docId: string, annotatorId: string, wordCount: number): AnnotationDraft {
  return {
    docId,
    annotatorId,
    highlights: new Array<boolean>(wordCount).fill(false),
    label: null,
  };
}

export function toggleHighlight(draft: AnnotationDraft, wordIndex: number): AnnotationDraft {
  if (!Number.isInteger(wordIndex) || wordIndex < 0 || wordIndex >= draft.highlights.length) {
    return draft;
  }
  const highlights = draft.highlights.slice();
  highlights[wordIndex] = !highlights[wordIndex];
  return { ...draft, highlights };
}

export function setLabel(draft: AnnotationDraft, label: 0 | 1): AnnotationDraft {
  return { ...draft, label };
}

export function highlightedIndices(draft: AnnotationDraft): number[] {
  const out: number[] = [];
  draft.highlights.forEach((on, i) => {
    if (on) out.push(i);
  });
  return out;
}

export function highlightFraction(draft: AnnotationDraft): number {
  if (draft.highlights.length === 0) return 0;
  return highlightedIndices(draft).length / draft.highlights.length;
}

export function canSubmit(draft: AnnotationDraft, minFraction = MIN_HIGHLIGHT_FRACTION): boolean {
  return draft.label !== null && highlightFraction(draft) >= minFraction;
}
