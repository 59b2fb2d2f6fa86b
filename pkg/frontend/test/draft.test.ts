import { describe, expect, it } from "vitest";

import {
  canSubmit,
  highlightFraction,
  highlightedIndices,
  newDraft,
  setLabel,
  toggleHighlight,
} from "../src/draft.js";

describe("draft state", () => {
  it("starts with no highlights and no label", () => {
    const draft = newDraft("d1", "a1", 5);
    expect(draft.highlights).toEqual([false, false, false, false, false]);
    expect(draft.label).toBeNull();
    expect(highlightedIndices(draft)).toEqual([]);
  });

  it("toggling twice restores the original state", () => {
    const draft = newDraft("d1", "a1", 8);
    for (let i = 0; i < 8; i++) {
      const once = toggleHighlight(draft, i);
      expect(once.highlights[i]).toBe(true);
      const twice = toggleHighlight(once, i);
      expect(twice.highlights).toEqual(draft.highlights);
    }
  });

  it("toggle does not mutate the input draft", () => {
    const draft = newDraft("d1", "a1", 3);
    toggleHighlight(draft, 1);
    expect(draft.highlights[1]).toBe(false);
  });

  it("ignores out-of-range and fractional indices", () => {
    const draft = newDraft("d1", "a1", 3);
    expect(toggleHighlight(draft, -1)).toBe(draft);
    expect(toggleHighlight(draft, 3)).toBe(draft);
    expect(toggleHighlight(draft, 1.5)).toBe(draft);
  });

  it("tracks the highlighted fraction on every toggle", () => {
    let draft = newDraft("d1", "a1", 4);
    expect(highlightFraction(draft)).toBe(0);
    draft = toggleHighlight(draft, 0);
    expect(highlightFraction(draft)).toBe(0.25);
    draft = toggleHighlight(draft, 3);
    expect(highlightFraction(draft)).toBe(0.5);
    draft = toggleHighlight(draft, 0);
    expect(highlightFraction(draft)).toBe(0.25);
  });

  it("blocks submission until a label is chosen and enough words are marked", () => {
    let draft = newDraft("d1", "a1", 100);
    expect(canSubmit(draft)).toBe(false);
    draft = setLabel(draft, 1);
    expect(canSubmit(draft)).toBe(false); // zero highlights
    draft = toggleHighlight(draft, 10);
    expect(canSubmit(draft)).toBe(false); // 1 of 100 words is below 2%
    draft = toggleHighlight(draft, 20);
    expect(canSubmit(draft)).toBe(true); // 2 of 100 words meets the floor
  });

  it("requires a label even with plenty of highlights", () => {
    let draft = newDraft("d1", "a1", 4);
    draft = toggleHighlight(draft, 0);
    draft = toggleHighlight(draft, 1);
    expect(canSubmit(draft)).toBe(false);
    expect(canSubmit(setLabel(draft, 0))).toBe(true);
  });

  it("99-word document with one highlight stays blocked", () => {
    let draft = newDraft("d1", "a1", 99);
    draft = setLabel(draft, 1);
    draft = toggleHighlight(draft, 0);
    expect(highlightFraction(draft)).toBeCloseTo(1 / 99);
    expect(canSubmit(draft)).toBe(false);
  });
});
