"""Human-machine attention alignment strategies.

Three ways of injecting human attention into training:
  al -- regularize the loss with an alignment term at the last layer
  ap -- the same alignment term applied at the first layer (a prior)
  an -- reweight the pooled classifier input with human attention

The alignment term is the cosine *distance* 1 - cos(A_h, A_m). Minimizing
a raw +cos term would push machine attention away from the human vectors;
`literal_sign=True` restores that sign for ablation runs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import autograd
from .autograd import Tensor

logger = logging.getLogger(__name__)

STRATEGY_KINDS = ("baseline", "al", "an", "ap")


@dataclass(frozen=True)
class StrategyConfig:
    kind: str = "baseline"
    alpha: float = 2.0
    literal_sign: bool = False

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}; expected one of {STRATEGY_KINDS}")
        object.__setattr__(self, "kind", kind)
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")

    @property
    def alignment_layer(self) -> str | None:
        return {"al": "last", "ap": "first", "an": "last", "baseline": None}[self.kind]


@dataclass
class LossBreakdown:
    """total = classification + alpha * attention, recorded per batch/epoch."""

    total: float
    classification: float
    attention: float
    alpha: float


def attention_alignment_loss(a_h: np.ndarray, a_m: np.ndarray, literal_sign: bool = False) -> float:
    """Cosine distance 1 - cos(a_h, a_m) in [0, 2] (or +cos under literal_sign)."""
    a_h = np.asarray(a_h, dtype=np.float64)
    a_m = np.asarray(a_m, dtype=np.float64)
    if a_h.shape != a_m.shape:
        raise ValueError(f"attention length mismatch: {a_h.shape} vs {a_m.shape}")
    norm_h = np.linalg.norm(a_h)
    norm_m = np.linalg.norm(a_m)
    if norm_h == 0:
        raise ValueError("human attention vector is all-zero")
    if norm_m == 0:
        logger.warning("zero-norm machine attention vector; alignment loss defined as 1")
        return 1.0
    cos = float(a_h @ a_m / (norm_h * norm_m))
    return cos if literal_sign else 1.0 - cos


def alignment_term(a_h: np.ndarray, a_m: Tensor, valid: np.ndarray, literal_sign: bool = False) -> Tensor:
    """Differentiable batch-mean alignment term.

    a_h: [B, T] human attention padded with zeros; a_m: [B, T] machine
    attention tensor; valid: [B, T] bool mask zeroing padding out of the
    cosine.
    """
    a_m_masked = a_m * valid.astype(np.float64)
    cos = autograd.cosine_similarity(Tensor(a_h), a_m_masked)
    mean_cos = cos.mean()
    return mean_cos if literal_sign else 1.0 - mean_cos


def an_pool(hidden_states: np.ndarray, a_m_last: np.ndarray, a_h: np.ndarray, alpha: float) -> np.ndarray:
    """Pooled classifier input: sum_i (a_m_i + alpha * a_h_i) * states[i].

    `hidden_states` are the token states feeding the last layer ([T, d]);
    at inference a_h is the all-zero sentinel. The combined weights are not
    renormalized.
    """
    a_m_last = np.asarray(a_m_last, dtype=np.float64)
    a_h = np.asarray(a_h, dtype=np.float64)
    hidden_states = np.asarray(hidden_states, dtype=np.float64)
    if not (len(a_m_last) == len(a_h) == len(hidden_states)):
        raise ValueError(
            f"length mismatch: attention {len(a_m_last)}/{len(a_h)} vs states {len(hidden_states)}"
        )
    weights = a_m_last + alpha * a_h
    return weights @ hidden_states


def an_pool_tensor(states: Tensor, a_m_last: Tensor, a_h: np.ndarray, alpha: float) -> Tensor:
    """Batched in-graph version of an_pool: [B, T, d] -> [B, d]."""
    weights = a_m_last + alpha * Tensor(a_h)  # [B, T]
    b, t = weights.shape
    return (weights.reshape(b, 1, t) @ states).reshape(b, states.shape[-1])


# -- batch-level loss accounting over forward outputs ----------------------


def _mean_cross_entropy(logits: np.ndarray, labels: np.ndarray) -> float:
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    return float(-log_probs[np.arange(len(labels)), labels].mean())


def _aligned_total(
    logits: np.ndarray,
    labels: np.ndarray,
    machine_attentions: list[np.ndarray],
    human_attentions: list[np.ndarray],
    alpha: float,
    literal_sign: bool,
) -> LossBreakdown:
    missing = [j for j, a_h in enumerate(human_attentions) if a_h is None or not np.any(a_h)]
    if missing:
        raise ValueError(f"missing human attention for items {missing}")
    ce = _mean_cross_entropy(logits, labels)
    align = float(
        np.mean(
            [
                attention_alignment_loss(a_h, a_m, literal_sign=literal_sign)
                for a_h, a_m in zip(human_attentions, machine_attentions)
            ]
        )
    )
    return LossBreakdown(total=ce + alpha * align, classification=ce, attention=align, alpha=alpha)


def al_total_loss(logits, labels, last_layer_attentions, human_attentions, alpha, literal_sign=False):
    """Cross-entropy plus alpha times the last-layer alignment term."""
    return _aligned_total(logits, labels, last_layer_attentions, human_attentions, alpha, literal_sign)


def ap_total_loss(logits, labels, first_layer_attentions, human_attentions, alpha, literal_sign=False):
    """Cross-entropy plus alpha times the first-layer alignment term."""
    return _aligned_total(logits, labels, first_layer_attentions, human_attentions, alpha, literal_sign)


def strategy_loss(
    config: StrategyConfig,
    logits: np.ndarray,
    labels: np.ndarray,
    machine_attentions: list[np.ndarray] | None = None,
    human_attentions: list[np.ndarray] | None = None,
) -> LossBreakdown:
    """Dispatch to the configured strategy's loss accounting.

    For "an" the logits are assumed to come from the pooled classifier head,
    so only cross-entropy is reported (attention component 0).
    """
    if config.kind in ("baseline", "an"):
        ce = _mean_cross_entropy(logits, labels)
        return LossBreakdown(total=ce, classification=ce, attention=0.0, alpha=config.alpha)
    return _aligned_total(
        logits, labels, machine_attentions, human_attentions, config.alpha, config.literal_sign
    )
