"""Annotated-document handling: loading, highlight aggregation, attention
normalization, word->subword propagation, sparsity filtering, label
resolution, and planted-cue synthetic corpus generation.

Dataset files are JSON lines, one record per document:
  {"id", "text", "self_report_label"?, "resolved_label"?, "annotations":
      [{"annotator_id", "highlighted_word_indices": [int], "label"}]}
Highlight indices refer to word positions from tokenizer.word_tokenize.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .tokenizer import word_tokenize

SPARSE_THRESHOLD = 0.02


class ValidationError(ValueError):
    """Raised when a record violates the dataset contract."""


@dataclass
class AnnotatorRecord:
    annotator_id: str
    highlights: np.ndarray  # binary mask over words
    label: int

    def __post_init__(self):
        self.highlights = np.asarray(self.highlights, dtype=np.int64)


@dataclass
class AnnotatedDocument:
    id: str
    text: str
    words: list[str]
    annotations: list[AnnotatorRecord] = field(default_factory=list)
    self_report_label: int | None = None
    resolved_label: int | None = None
    gold_highlights: np.ndarray | None = None  # synthetic corpora only

    def validate(self) -> None:
        n = len(self.words)
        for rec in self.annotations:
            if len(rec.highlights) != n:
                raise ValidationError(
                    f"doc {self.id}: annotator {rec.annotator_id} mask length "
                    f"{len(rec.highlights)} != word count {n}"
                )
            if not np.isin(rec.highlights, (0, 1)).all():
                raise ValidationError(f"doc {self.id}: highlight mask is not binary")


@dataclass
class HumanAttention:
    """Nonnegative attention weights summing to 1, or the all-zero sentinel."""

    weights: np.ndarray
    granularity: str = "word"  # "word" | "subword"

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)

    @property
    def is_sentinel(self) -> bool:
        return bool((self.weights == 0).all())


@dataclass
class ConfusionReport:
    """2x2 self-report x majority-vote counts; rows index self-report."""

    counts: np.ndarray

    @property
    def agreement_count(self) -> int:
        return int(np.trace(self.counts))


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a planted-cue corpus: the label is carried by known cue
    words, one set per class, giving gold attention for acceptance tests."""

    n_docs: int
    vocab_size: int = 50
    pos_cues: tuple[str, ...] = ("amazing", "delicious", "superb")
    neg_cues: tuple[str, ...] = ("awful", "bland", "dreadful")
    length_range: tuple[int, int] = (8, 16)
    label_given_cue: float = 1.0
    class_prior: float = 0.5
    cues_per_doc: int = 2
    n_annotators: int = 3
    seed: int = 0

    @property
    def cue_words(self) -> tuple[str, ...]:
        return self.pos_cues + self.neg_cues

    def filler_vocabulary(self) -> list[str]:
        return [f"word{k}" for k in range(self.vocab_size)]


# -- core operations -------------------------------------------------------


def aggregate_annotations(doc: AnnotatedDocument) -> np.ndarray:
    """Per-word count of annotators highlighting the word."""
    if not doc.annotations:
        raise ValidationError(f"doc {doc.id}: no annotations to aggregate")
    doc.validate()
    return np.sum([rec.highlights for rec in doc.annotations], axis=0)


def normalize_attention(raw: np.ndarray, granularity: str = "word") -> HumanAttention:
    """Divide by the total; an all-zero input yields the all-zero sentinel."""
    raw = np.asarray(raw, dtype=np.float64)
    if (raw < 0).any():
        raise ValidationError("attention values must be nonnegative")
    total = raw.sum()
    if total == 0:
        return HumanAttention(np.zeros_like(raw), granularity)
    return HumanAttention(raw / total, granularity)


def _check_alignment(alignment: list[tuple[int, int]], n_words: int) -> None:
    gaps = [w for w in range(n_words) if w >= len(alignment) or alignment[w][0] >= alignment[w][1]]
    if gaps:
        raise ValidationError(f"alignment does not cover word indices {gaps}")


def spread_to_subwords(values: np.ndarray, alignment: list[tuple[int, int]]) -> np.ndarray:
    """Copy each word's value to all of its subwords (no renormalization).

    `alignment[w]` is a (start, end) range in subword space.
    """
    values = np.asarray(values, dtype=np.float64)
    _check_alignment(alignment, len(values))
    n_sub = max(e for _, e in alignment)
    out = np.zeros(n_sub)
    for w, (s, e) in enumerate(alignment):
        out[s:e] = values[w]
    return out


def propagate_to_subwords(word_attention: HumanAttention, alignment: list[tuple[int, int]]) -> HumanAttention:
    """Move word-level attention to subword granularity, then renormalize."""
    spread = spread_to_subwords(word_attention.weights, alignment)
    return normalize_attention(spread, granularity="subword")


def filter_sparse(
    docs: list[AnnotatedDocument], threshold: float = SPARSE_THRESHOLD
) -> tuple[list[AnnotatedDocument], list[tuple[str, str]]]:
    """Keep docs whose highlighted-word fraction is at least `threshold`.

    Returns (retained, exclusion log) where the log holds (doc id, reason).
    """
    retained, excluded = [], []
    for doc in docs:
        agg = aggregate_annotations(doc)
        frac = float((agg > 0).sum()) / max(1, len(doc.words))
        if frac >= threshold:
            retained.append(doc)
        else:
            excluded.append((doc.id, f"sparse_annotation:{frac:.4f}"))
    return retained, excluded


def resolve_labels(
    docs: list[AnnotatedDocument], mode: str = "majority"
) -> tuple[list[AnnotatedDocument], ConfusionReport, list[tuple[str, str]]]:
    """Set each doc's resolved label and prune disagreeing annotations.

    mode="majority": resolved label is the annotator majority vote.
    mode="self_report": resolved label is the author's self-report.
    Only annotations concurring with the resolved label are kept (the first
    three in record order when more qualify). Ties and docs left with no
    annotations are dropped; the confusion report tallies self-report
    against majority vote wherever both exist.
    """
    if mode not in ("majority", "self_report"):
        raise ValueError(f"unknown resolution mode {mode!r}")
    counts = np.zeros((2, 2), dtype=np.int64)
    resolved_docs, dropped = [], []
    for doc in docs:
        labels = [rec.label for rec in doc.annotations]
        if mode == "majority" and len(labels) < 3:
            raise ValidationError(f"doc {doc.id}: majority mode needs >=3 annotator labels")
        if mode == "self_report" and doc.self_report_label is None:
            raise ValidationError(f"doc {doc.id}: self_report mode needs a self-reported label")
        ones = sum(labels)
        majority = None
        if ones * 2 != len(labels):
            majority = int(ones * 2 > len(labels))
        if doc.self_report_label is not None and majority is not None:
            counts[doc.self_report_label, majority] += 1

        if mode == "majority":
            if majority is None:
                dropped.append((doc.id, "majority_tie"))
                continue
            label = majority
        else:
            label = doc.self_report_label
        kept = [rec for rec in doc.annotations if rec.label == label][:3]
        if not kept:
            dropped.append((doc.id, "no_concurring_annotations"))
            continue
        resolved_docs.append(replace(doc, annotations=kept, resolved_label=label))
    return resolved_docs, ConfusionReport(counts), dropped


def generate_synthetic(spec: SyntheticSpec) -> list[AnnotatedDocument]:
    """Deterministic planted-cue corpus with gold highlight masks.

    Each document carries `cues_per_doc` cue words of one class; its label
    matches the cue class with probability `label_given_cue`. All annotators
    highlight exactly the cue positions and report the document label.
    """
    if not spec.pos_cues or not spec.neg_cues:
        raise ValueError("cue-word sets must be nonempty")
    filler = spec.filler_vocabulary()
    if set(spec.cue_words) & set(filler):
        raise ValueError("cue-word set must be disjoint from the filler vocabulary")
    rng = np.random.default_rng(spec.seed)
    docs = []
    for j in range(spec.n_docs):
        cue_class = int(rng.random() < spec.class_prior)
        label = cue_class if rng.random() < spec.label_given_cue else 1 - cue_class
        n = int(rng.integers(spec.length_range[0], spec.length_range[1] + 1))
        words = list(rng.choice(filler, size=n))
        cue_set = spec.pos_cues if cue_class == 1 else spec.neg_cues
        k = min(spec.cues_per_doc, n)
        positions = rng.choice(n, size=k, replace=False)
        for pos in positions:
            words[pos] = str(rng.choice(cue_set))
        mask = np.zeros(n, dtype=np.int64)
        mask[positions] = 1
        annotations = [
            AnnotatorRecord(annotator_id=f"ann{t}", highlights=mask.copy(), label=label)
            for t in range(spec.n_annotators)
        ]
        docs.append(
            AnnotatedDocument(
                id=f"syn{j:05d}",
                text=" ".join(words),
                words=words,
                annotations=annotations,
                self_report_label=label,
                resolved_label=label,
                gold_highlights=mask,
            )
        )
    return docs


# -- serialization ---------------------------------------------------------


def doc_to_record(doc: AnnotatedDocument) -> dict:
    record = {
        "id": doc.id,
        "text": doc.text,
        "annotations": [
            {
                "annotator_id": rec.annotator_id,
                "highlighted_word_indices": [int(i) for i in np.flatnonzero(rec.highlights)],
                "label": int(rec.label),
            }
            for rec in doc.annotations
        ],
    }
    if doc.self_report_label is not None:
        record["self_report_label"] = int(doc.self_report_label)
    if doc.resolved_label is not None:
        record["resolved_label"] = int(doc.resolved_label)
    return record


def record_to_doc(record: dict, lowercase: bool = True) -> AnnotatedDocument:
    words = word_tokenize(record["text"], lowercase=lowercase)
    annotations = []
    for ann in record.get("annotations", []):
        mask = np.zeros(len(words), dtype=np.int64)
        for i in ann["highlighted_word_indices"]:
            if not 0 <= i < len(words):
                raise ValidationError(f"doc {record['id']}: highlight index {i} out of range")
            mask[i] = 1
        annotations.append(AnnotatorRecord(ann["annotator_id"], mask, int(ann["label"])))
    doc = AnnotatedDocument(
        id=str(record["id"]),
        text=record["text"],
        words=words,
        annotations=annotations,
        self_report_label=record.get("self_report_label"),
        resolved_label=record.get("resolved_label"),
    )
    doc.validate()
    return doc


def save_dataset(docs: list[AnnotatedDocument], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for doc in docs:
            f.write(json.dumps(doc_to_record(doc)) + "\n")


def load_dataset(path: str | Path, lowercase: bool = True) -> list[AnnotatedDocument]:
    docs = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                docs.append(record_to_doc(json.loads(line), lowercase=lowercase))
    return docs


def write_exclusion_log(entries: list[tuple[str, str]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["id", "reason"])
        writer.writerows(entries)
