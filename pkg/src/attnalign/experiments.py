"""Evaluation protocol: imbalanced subsampling, bootstrap-replicated
training, AUC aggregation with paired significance, label-cost curves, and
text-length stratification."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from . import model as model_mod
from .metrics import auc, significance, SignificanceResult
from .smoothing import lowess
from .strategies import StrategyConfig, attention_alignment_loss
from .tokenizer import SubwordVocab, subword_tokenize, TokenSequence

__all__ = [
    "ExperimentSpec",
    "RunResult",
    "subsample",
    "auc",
    "significance",
    "bootstrap_eval",
    "label_cost_curve",
    "length_stratify",
    "prepare_items",
    "write_replicate_csv",
    "write_aggregate_csv",
]


@dataclass(frozen=True)
class ExperimentSpec:
    """One (size, imbalance-ratio) evaluation cell."""

    size: int
    ratio: float
    strategies: tuple[StrategyConfig, ...]
    replicates: int = 20
    test_size: int = 200
    base_seed: int = 0
    collect_attention_similarity: bool = False


@dataclass
class StrategyResult:
    aucs: list[float] = field(default_factory=list)
    attention_similarity: list[float] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.aucs))

    @property
    def std(self) -> float:
        return float(np.std(self.aucs, ddof=1)) if len(self.aucs) > 1 else 0.0

    def format_cell(self) -> str:
        return f"{self.mean:.2f} ({self.std:.2f})"


@dataclass
class RunResult:
    spec: ExperimentSpec
    per_strategy: dict[str, StrategyResult]
    significance: dict[str, SignificanceResult]  # variant kind -> vs baseline


@dataclass
class TrainingItem:
    doc_id: str
    sequence: TokenSequence
    label: int
    attention: np.ndarray  # token-space human attention (zeros at [CLS]/padding)


def attention_to_token_space(att: corpus_mod.HumanAttention, seq: TokenSequence) -> np.ndarray:
    """Place a subword-granularity attention vector into the token sequence
    (zero at the classifier slot)."""
    out = np.zeros(len(seq))
    out[1 : 1 + len(att.weights)] = att.weights
    return out


def prepare_items(docs: list[corpus_mod.AnnotatedDocument], vocab: SubwordVocab) -> list[TrainingItem]:
    """Tokenize docs and derive normalized token-space human attention."""
    items = []
    for doc in docs:
        if doc.resolved_label is None:
            raise ValueError(f"doc {doc.id}: resolved label required before training")
        seq = subword_tokenize(doc.words, vocab)
        raw = corpus_mod.aggregate_annotations(doc)
        word_att = corpus_mod.normalize_attention(raw)
        sub_att = corpus_mod.propagate_to_subwords(word_att, seq.subword_alignment())
        items.append(
            TrainingItem(
                doc_id=doc.id,
                sequence=seq,
                label=int(doc.resolved_label),
                attention=attention_to_token_space(sub_att, seq),
            )
        )
    return items


def subsample(
    docs: list[corpus_mod.AnnotatedDocument],
    size: int,
    ratio: float,
    seed: int,
    exclude_ids: frozenset[str] = frozenset(),
) -> list[corpus_mod.AnnotatedDocument]:
    """Draw an imbalanced train subset without replacement.

    The minority (target, label 1) count is max(1, floor(size * ratio));
    the majority class fills the remainder.
    """
    pool = [d for d in docs if d.id not in exclude_ids]
    minority = [d for d in pool if d.resolved_label == 1]
    majority = [d for d in pool if d.resolved_label == 0]
    n_min = max(1, int(np.floor(size * ratio)))
    n_maj = size - n_min
    if n_min > len(minority) or n_maj > len(majority):
        raise ValueError(
            f"insufficient instances: need {n_min}/{n_maj} minority/majority, "
            f"have {len(minority)}/{len(majority)}"
        )
    rng = np.random.default_rng(seed)
    chosen = list(rng.choice(len(minority), size=n_min, replace=False))
    picked = [minority[i] for i in chosen]
    chosen = list(rng.choice(len(majority), size=n_maj, replace=False))
    picked += [majority[i] for i in chosen]
    return picked


def draw_test_set(
    docs: list[corpus_mod.AnnotatedDocument], test_size: int, seed: int
) -> list[corpus_mod.AnnotatedDocument]:
    """Fixed balanced held-out set (test_size // 2 per class)."""
    rng = np.random.default_rng(seed)
    half = test_size // 2
    out = []
    for label in (0, 1):
        pool = [d for d in docs if d.resolved_label == label]
        if len(pool) < half:
            raise ValueError(f"not enough class-{label} docs for a balanced test set")
        idx = rng.choice(len(pool), size=half, replace=False)
        out += [pool[i] for i in idx]
    return out


def _mean_attention_similarity(
    items: list[TrainingItem],
    params,
    model_config: model_mod.ModelConfig,
    strategy: StrategyConfig,
) -> float:
    sims = []
    for item in items:
        _, trace, _ = model_mod.forward(item.sequence, params, model_config, strategy)
        a_m = model_mod.head_average(trace, model_config.n_layers - 1)
        sims.append(1.0 - attention_alignment_loss(item.attention, a_m))
    return float(np.mean(sims))


def bootstrap_eval(
    docs: list[corpus_mod.AnnotatedDocument],
    vocab: SubwordVocab,
    spec: ExperimentSpec,
    model_config: model_mod.ModelConfig,
    train_config: model_mod.TrainConfig,
) -> RunResult:
    """Replicated subsample-train-evaluate on a fixed balanced test set.

    Replicate r uses seed base_seed + r for its subsample, parameter
    initialization, and shuffle stream; strategies within a replicate share
    the subsample and the initialization, so comparisons are paired.
    """
    test_docs = draw_test_set(docs, spec.test_size, spec.base_seed)
    test_ids = frozenset(d.id for d in test_docs)
    test_items = prepare_items(test_docs, vocab)
    test_seqs = [it.sequence for it in test_items]
    test_labels = np.array([it.label for it in test_items])

    per_strategy = {s.kind: StrategyResult() for s in spec.strategies}
    for r in range(spec.replicates):
        seed = spec.base_seed + r
        try:
            train_docs = subsample(docs, spec.size, spec.ratio, seed, exclude_ids=test_ids)
            assert not ({d.id for d in train_docs} & test_ids)
            items = prepare_items(train_docs, vocab)
            seqs = [it.sequence for it in items]
            labels = np.array([it.label for it in items])
            attentions = [it.attention for it in items]
            mcfg = model_mod.ModelConfig(**{**_cfg_dict(model_config), "seed": seed})
            tcfg = model_mod.TrainConfig(**{**_tcfg_dict(train_config), "seed": seed})
            for strat in spec.strategies:
                params, _ = model_mod.fit(
                    seqs,
                    labels,
                    strat,
                    mcfg,
                    tcfg,
                    human_attentions=attentions,
                    doc_ids=[it.doc_id for it in items],
                )
                scores = model_mod.predict_proba(test_seqs, params, mcfg, strat)
                per_strategy[strat.kind].aucs.append(auc(scores, test_labels))
                if spec.collect_attention_similarity:
                    per_strategy[strat.kind].attention_similarity.append(
                        _mean_attention_similarity(test_items, params, mcfg, strat)
                    )
        except Exception as exc:
            raise RuntimeError(f"replicate {r} failed: {exc}") from exc

    sig = {}
    if "baseline" in per_strategy:
        base = np.array(per_strategy["baseline"].aucs)
        for kind, res in per_strategy.items():
            if kind != "baseline":
                sig[kind] = significance(base, np.array(res.aucs))
    return RunResult(spec=spec, per_strategy=per_strategy, significance=sig)


def _cfg_dict(cfg) -> dict:
    from dataclasses import asdict

    return asdict(cfg)


_tcfg_dict = _cfg_dict


# -- label-cost curves -----------------------------------------------------


@dataclass
class CostCurve:
    sizes: list[int]
    raw: dict[str, list[float]]  # strategy kind -> mean AUC per size
    smoothed: dict[str, list[float]]
    gap_vs_baseline: dict[str, float]  # mean labels saved at matched AUC


def interpolated_gap(sizes, baseline_curve, variant_curve) -> float:
    """Mean horizontal distance (labels saved) between curves at matched AUC.

    For each variant point (s, a), find via linear interpolation the size at
    which the baseline reaches AUC a; the gap is that size minus s. Levels
    the baseline never reaches are skipped.
    """
    sizes = np.asarray(sizes, dtype=np.float64)
    base = np.asarray(baseline_curve, dtype=np.float64)
    var = np.asarray(variant_curve, dtype=np.float64)
    base_mono = np.maximum.accumulate(base)
    gaps = []
    for s, a in zip(sizes, var):
        if a > base_mono[-1] or a < base_mono[0]:
            continue
        base_size = float(np.interp(a, base_mono, sizes))
        gaps.append(base_size - s)
    return float(np.mean(gaps)) if gaps else float("nan")


def label_cost_curve(
    docs,
    vocab,
    sizes: list[int],
    ratio: float,
    strategies: tuple[StrategyConfig, ...],
    model_config: model_mod.ModelConfig,
    train_config: model_mod.TrainConfig,
    replicates: int = 20,
    test_size: int = 200,
    base_seed: int = 0,
    frac: float = 0.2,
) -> CostCurve:
    """Mean AUC as a function of training-set size, lowess-smoothed."""
    if sorted(sizes) != list(sizes):
        raise ValueError("sizes must be ascending")
    raw: dict[str, list[float]] = {s.kind: [] for s in strategies}
    for size in sizes:
        spec = ExperimentSpec(
            size=size,
            ratio=ratio,
            strategies=strategies,
            replicates=replicates,
            test_size=test_size,
            base_seed=base_seed,
        )
        result = bootstrap_eval(docs, vocab, spec, model_config, train_config)
        for kind, res in result.per_strategy.items():
            raw[kind].append(res.mean)
    smoothed = {kind: list(lowess(np.array(sizes, dtype=float), np.array(v), frac=frac)) for kind, v in raw.items()}
    gaps = {}
    if "baseline" in smoothed:
        for kind in smoothed:
            if kind != "baseline":
                gaps[kind] = interpolated_gap(sizes, smoothed["baseline"], smoothed[kind])
    return CostCurve(sizes=list(sizes), raw=raw, smoothed=smoothed, gap_vs_baseline=gaps)


# -- length stratification -------------------------------------------------

LENGTH_PROFILES = {
    "yelp": [("yelp-50", 1, 50), ("yelp-100", 51, 100), ("yelp-200", 101, 200)],
    "personality": [("short", 1, 100), ("long", 101, None)],
}


def length_stratify(docs, profile: str) -> dict[str, list]:
    """Bucket documents by word count per task profile."""
    if profile not in LENGTH_PROFILES:
        raise ValueError(f"unknown profile {profile!r}; expected one of {sorted(LENGTH_PROFILES)}")
    buckets = {name: [] for name, _, _ in LENGTH_PROFILES[profile]}
    for doc in docs:
        n = len(doc.words)
        for name, lo, hi in LENGTH_PROFILES[profile]:
            if n >= lo and (hi is None or n <= hi):
                buckets[name].append(doc)
                break
    return buckets


# -- CSV output ------------------------------------------------------------


def write_replicate_csv(results: list[RunResult], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["size", "ratio", "strategy", "replicate", "auc"])
        for result in results:
            for kind, res in sorted(result.per_strategy.items()):
                for r, value in enumerate(res.aucs):
                    writer.writerow([result.spec.size, repr(result.spec.ratio), kind, r, repr(value)])


def write_aggregate_csv(results: list[RunResult], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["size", "ratio", "strategy", "mean", "std", "p_value", "significant"])
        for result in results:
            for kind, res in sorted(result.per_strategy.items()):
                sig = result.significance.get(kind)
                writer.writerow(
                    [
                        result.spec.size,
                        repr(result.spec.ratio),
                        kind,
                        repr(res.mean),
                        repr(res.std),
                        repr(sig.p_value) if sig else "",
                        int(sig.significant) if sig else "",
                    ]
                )


def write_curve_csv(curve: CostCurve, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["strategy", "size", "raw_auc", "smoothed_auc"])
        for kind in sorted(curve.raw):
            for size, r, s in zip(curve.sizes, curve.raw[kind], curve.smoothed[kind]):
                writer.writerow([kind, size, repr(float(r)), repr(float(s))])
