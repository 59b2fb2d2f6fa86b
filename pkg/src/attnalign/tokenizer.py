"""Word tokenization and a trainable greedy longest-match subword scheme.

The subword vocabulary is trained by iterative pair merging over a word
frequency table (characters are always kept, so tokenization is total) and
serialized to a plain-text file with a JSON header line.
"""

from __future__ import annotations

import json
import logging
import string
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

CLS_TOKEN = "[CLS]"
PAD_TOKEN = "[PAD]"
UNK_TOKEN = "[UNK]"
CONTINUATION_MARKER = "##"

_PUNCT = set(string.punctuation)


def word_tokenize(text: str, lowercase: bool = True) -> list[str]:
    """Split on whitespace; peel leading/trailing punctuation into their own tokens."""
    if lowercase:
        text = text.lower()
    words: list[str] = []
    for chunk in text.split():
        head: list[str] = []
        tail: list[str] = []
        while chunk and chunk[0] in _PUNCT:
            head.append(chunk[0])
            chunk = chunk[1:]
        while chunk and chunk[-1] in _PUNCT:
            tail.append(chunk[-1])
            chunk = chunk[:-1]
        words.extend(head)
        if chunk:
            words.append(chunk)
        words.extend(reversed(tail))
    return words


@dataclass
class SubwordVocab:
    """Subword inventory mapping entries to ids; continuation pieces carry '##'."""

    entries: dict[str, int]
    marker: str = CONTINUATION_MARKER
    cls_id: int = 0
    pad_id: int = 1
    unk_id: int = 2

    def __len__(self):
        return len(self.entries)

    def id_to_token(self) -> list[str]:
        inv = [""] * len(self.entries)
        for tok, i in self.entries.items():
            inv[i] = tok
        return inv

    def save(self, path: str | Path) -> None:
        header = json.dumps(
            {"marker": self.marker, "cls_id": self.cls_id, "pad_id": self.pad_id, "unk_id": self.unk_id}
        )
        lines = [header] + self.id_to_token()
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "SubwordVocab":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        meta = json.loads(lines[0])
        entries = {tok: i for i, tok in enumerate(lines[1:])}
        return cls(entries, meta["marker"], meta["cls_id"], meta["pad_id"], meta["unk_id"])


@dataclass
class TokenSequence:
    """Subword tokens with [CLS] prepended, plus the word -> token-range alignment.

    `word_alignment[w]` is a half-open (start, end) range of token indices
    covering word w; ranges are contiguous, ordered, and partition
    [1, len(tokens)).
    """

    tokens: list[str]
    ids: np.ndarray
    word_alignment: list[tuple[int, int]] = field(default_factory=list)

    def __len__(self):
        return len(self.tokens)

    def subword_alignment(self) -> list[tuple[int, int]]:
        """Alignment ranges in subword space (the [CLS] slot stripped)."""
        return [(s - 1, e - 1) for s, e in self.word_alignment]


def _word_symbols(word: str) -> tuple[str, ...]:
    return (word[0],) + tuple(CONTINUATION_MARKER + c for c in word[1:])


def _merge_pair(symbols: tuple[str, ...], pair: tuple[str, str]) -> tuple[str, ...]:
    merged = pair[0] + pair[1].removeprefix(CONTINUATION_MARKER)
    out: list[str] = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and (symbols[i], symbols[i + 1]) == pair:
            out.append(merged)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return tuple(out)


def train_vocab(corpus: list[str], target_size: int, seed: int = 0) -> SubwordVocab:
    """Build a subword vocabulary by frequency-driven pair merging.

    Deterministic for a given corpus: merge candidates are ranked by count
    with lexicographic tie-breaking. The seed is accepted for interface
    stability but the procedure has no random choices.
    """
    del seed
    word_counts: Counter[str] = Counter()
    for text in corpus:
        word_counts.update(word_tokenize(text))

    charset: set[str] = set()
    for word in word_counts:
        charset.add(word[0])
        charset.update(CONTINUATION_MARKER + c for c in word[1:])
    base = [CLS_TOKEN, PAD_TOKEN, UNK_TOKEN] + sorted(charset)
    if target_size < len(base):
        raise ValueError(f"target_size {target_size} is below the charset floor {len(base)}")

    pieces = set(base[3:])
    splits: dict[str, tuple[str, ...]] = {w: _word_symbols(w) for w in word_counts}
    merged_order: list[str] = []
    while len(base) + len(merged_order) < target_size:
        pair_counts: Counter[tuple[str, str]] = Counter()
        for word, symbols in splits.items():
            c = word_counts[word]
            for a, b in zip(symbols, symbols[1:]):
                pair_counts[(a, b)] += c
        candidates = [p for p in pair_counts if (p[0] + p[1].removeprefix(CONTINUATION_MARKER)) not in pieces]
        if not candidates:
            break
        best = max(candidates, key=lambda p: (pair_counts[p], p[0], p[1]))
        new_piece = best[0] + best[1].removeprefix(CONTINUATION_MARKER)
        pieces.add(new_piece)
        merged_order.append(new_piece)
        splits = {w: _merge_pair(s, best) for w, s in splits.items()}

    entries = {tok: i for i, tok in enumerate(base + merged_order)}
    return SubwordVocab(entries)


def _tokenize_word(word: str, vocab: SubwordVocab) -> list[str]:
    pieces: list[str] = []
    start = 0
    while start < len(word):
        end = len(word)
        piece = None
        while start < end:
            candidate = word[start:end]
            if start > 0:
                candidate = vocab.marker + candidate
            if candidate in vocab.entries:
                piece = candidate
                break
            end -= 1
        if piece is None:
            logger.warning("character %r outside vocabulary charset; mapping to unknown", word[start])
            pieces.append(UNK_TOKEN)
            start += 1
        else:
            pieces.append(piece)
            start = end
    return pieces


def subword_tokenize(words: list[str], vocab: SubwordVocab) -> TokenSequence:
    """Greedy longest-match tokenization with a word -> token-range alignment map."""
    tokens = [CLS_TOKEN]
    alignment: list[tuple[int, int]] = []
    for word in words:
        start = len(tokens)
        tokens.extend(_tokenize_word(word, vocab))
        alignment.append((start, len(tokens)))
    ids = np.array([vocab.entries.get(t, vocab.unk_id) for t in tokens], dtype=np.int64)
    return TokenSequence(tokens=tokens, ids=ids, word_alignment=alignment)
