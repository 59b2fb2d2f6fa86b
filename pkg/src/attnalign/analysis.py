"""Post-hoc attention analytics: granularity transfer, binarization,
positional profiles, similarity tables, loss-decomposition reports."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np

from .model import TrainingHistory

logger = logging.getLogger(__name__)

BINARIZE_RULES = ("mean_sigma", "iqr")


@dataclass
class BinaryAttentionMask:
    mask: np.ndarray
    rule: str

    @property
    def high_attention_fraction(self) -> float:
        return float(self.mask.sum()) / len(self.mask)


@dataclass
class PositionalProfile:
    bin_edges: np.ndarray  # over relative position [0, 1]
    values: np.ndarray  # mean binary attention per bin
    source: str = ""

    def to_table(self) -> list[tuple[float, float]]:
        centers = (self.bin_edges[:-1] + self.bin_edges[1:]) / 2
        return list(zip(centers.tolist(), self.values.tolist()))


def token_to_word(attention: np.ndarray, alignment: list[tuple[int, int]]) -> np.ndarray:
    """Sum token-level attention into word-level values; special-token mass
    is dropped and the result renormalized."""
    attention = np.asarray(attention, dtype=np.float64)
    covered = set()
    out = np.zeros(len(alignment))
    for w, (s, e) in enumerate(alignment):
        if s >= e:
            raise ValueError(f"alignment gap at word {w}")
        out[w] = attention[s:e].sum()
        covered.update(range(s, e))
    expected = set(range(1, len(attention)))
    if not expected <= covered:
        raise ValueError(f"alignment leaves token positions {sorted(expected - covered)} uncovered")
    total = out.sum()
    return out / total if total > 0 else out


def binarize(word_attention: np.ndarray, rule: str = "mean_sigma") -> BinaryAttentionMask:
    """High-attention indicator per word.

    mean_sigma: value > mean + 1 std (within document);
    iqr: value > Q3 + 1.5 * IQR.
    """
    values = np.asarray(word_attention, dtype=np.float64)
    if len(values) < 2:
        raise ValueError("binarize needs at least two words")
    if rule == "mean_sigma":
        cut = values.mean() + values.std()
    elif rule == "iqr":
        q1, q3 = np.percentile(values, [25, 75])
        cut = q3 + 1.5 * (q3 - q1)
    else:
        raise ValueError(f"unknown rule {rule!r}; expected one of {BINARIZE_RULES}")
    return BinaryAttentionMask(mask=(values > cut).astype(np.int64), rule=rule)


def positional_profile(masks: list[np.ndarray], bins: int = 20, source: str = "") -> PositionalProfile:
    """Mean binary attention as a function of relative word position i/(n-1)."""
    if not masks:
        raise ValueError("no masks supplied")
    edges = np.linspace(0.0, 1.0, bins + 1)
    sums = np.zeros(bins)
    counts = np.zeros(bins)
    for mask in masks:
        n = len(mask)
        if n < 2:
            logger.info("skipping single-word document in positional profile")
            continue
        positions = np.arange(n) / (n - 1)
        idx = np.minimum((positions * bins).astype(int), bins - 1)
        np.add.at(sums, idx, np.asarray(mask, dtype=np.float64))
        np.add.at(counts, idx, 1.0)
    values = np.divide(sums, counts, out=np.zeros(bins), where=counts > 0)
    return PositionalProfile(bin_edges=edges, values=values, source=source)


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        logger.warning("zero-norm attention vector in cosine table; similarity set to 0")
        return 0.0
    return float(a @ b / (na * nb))


def cosine_table(
    human: list[np.ndarray], machine_per_strategy: dict[str, list[np.ndarray]]
) -> dict[str, tuple[float, float]]:
    """Per-strategy mean (std) cosine similarity to the human vectors."""
    out = {}
    for kind, vectors in machine_per_strategy.items():
        sims = [_cosine(h, m) for h, m in zip(human, vectors)]
        out[kind] = (float(np.mean(sims)), float(np.std(sims, ddof=1)) if len(sims) > 1 else 0.0)
    return out


@dataclass
class LossReport:
    rows: list[tuple[int, float, float, float]]  # epoch, total, ce, attention
    additivity_ok: bool
    attention_nonincreasing: bool


def loss_report(history: TrainingHistory, alpha: float, tolerance: float = 1e-3) -> LossReport:
    """Per-epoch decomposition with monotonicity flags for the attention
    component (nonincreasing within `tolerance`)."""
    if not history.epochs:
        raise ValueError("empty training history")
    rows = [(r.epoch, r.total_loss, r.ce_loss, r.attn_loss) for r in history.epochs]
    additivity = all(abs(t - (c + alpha * a)) <= 1e-9 for _, t, c, a in rows)
    attn = [a for _, _, _, a in rows]
    nonincreasing = all(attn[i + 1] <= attn[i] + tolerance for i in range(len(attn) - 1))
    return LossReport(rows=rows, additivity_ok=additivity, attention_nonincreasing=nonincreasing)


def write_profile_csv(profile: PositionalProfile, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["bin_center", "value"])
        for center, value in profile.to_table():
            writer.writerow([repr(center), repr(value)])
