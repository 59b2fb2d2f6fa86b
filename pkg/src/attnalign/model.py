"""Compact transformer encoder classifier with exposed attention traces.

The encoder is standard scaled-dot-product multi-head self-attention with
residual connections and per-layer normalization, trained from scratch with
Adam. Attention scores carry a configurable temperature; values below one
sharpen the score scale so attention distributions remain trainable under
very small learning-rate budgets. Every forward pass captures the classifier-position attention row at
each layer/head plus per-layer hidden states, which the alignment
strategies consume. Gradients come from the local autograd engine and are
verified against central finite differences by `grad_check`.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import autograd
from .autograd import Tensor
from .metrics import auc
from .strategies import StrategyConfig, LossBreakdown, alignment_term, an_pool_tensor
from .tokenizer import TokenSequence

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    n_layers: int = 2
    n_heads: int = 4
    d_model: int = 64
    d_ff: int = 128
    max_len: int = 128
    n_classes: int = 2
    dropout: float = 0.0
    attn_temperature: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.d_model % self.n_heads != 0:
            raise ValueError("d_model must be divisible by n_heads")
        if self.n_layers < 1 or self.n_heads < 1:
            raise ValueError("need at least one layer and one head")
        if self.attn_temperature <= 0:
            raise ValueError("attn_temperature must be positive")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 5e-5
    epochs: int = 10
    batch_size: int = 32
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass
class Prediction:
    logits: np.ndarray

    @property
    def prob_positive(self) -> float:
        shifted = self.logits - self.logits.max()
        e = np.exp(shifted)
        return float(e[1] / e.sum())


@dataclass
class AttentionTrace:
    """Classifier-position attention rows, rows[l][h] over all positions."""

    rows: np.ndarray  # [L, H, T]

    @property
    def seq_len(self) -> int:
        return self.rows.shape[-1]


@dataclass
class HiddenStates:
    states: list[np.ndarray]  # states[l]: [T, d] after layer l


@dataclass
class EpochRecord:
    epoch: int
    total_loss: float
    ce_loss: float
    attn_loss: float
    train_auc: float


@dataclass
class TrainingHistory:
    epochs: list[EpochRecord] = field(default_factory=list)

    def save_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["epoch", "total_loss", "ce_loss", "attn_loss", "train_auc"])
            for rec in self.epochs:
                writer.writerow(
                    [rec.epoch, repr(rec.total_loss), repr(rec.ce_loss), repr(rec.attn_loss), repr(rec.train_auc)]
                )


# -- parameters ------------------------------------------------------------


def init_params(cfg: ModelConfig) -> dict[str, Tensor]:
    """Seeded parameter initialization; the output head starts at zero so an
    untrained model is exactly indifferent between classes."""
    rng = np.random.default_rng(cfg.seed)
    scale = 0.02
    p: dict[str, np.ndarray] = {
        "tok_emb": rng.normal(0, scale, (cfg.vocab_size, cfg.d_model)),
        "pos_emb": rng.normal(0, scale, (cfg.max_len, cfg.d_model)),
        "emb_ln_g": np.ones(cfg.d_model),
        "emb_ln_b": np.zeros(cfg.d_model),
        "cls_w": np.zeros((cfg.d_model, cfg.n_classes)),
        "cls_b": np.zeros(cfg.n_classes),
    }
    # Query and key weights shrink with the attention temperature so the
    # initial attention distributions stay equally diffuse regardless of how
    # sharp the trained attention is allowed to become.
    qk_scale = scale * np.sqrt(cfg.attn_temperature)
    for l in range(cfg.n_layers):
        for name in ("wq", "wk", "wv", "wo"):
            s = qk_scale if name in ("wq", "wk") else scale
            p[f"l{l}_{name}"] = rng.normal(0, s, (cfg.d_model, cfg.d_model))
            p[f"l{l}_{name}_b"] = np.zeros(cfg.d_model)
        p[f"l{l}_ffn_w1"] = rng.normal(0, scale, (cfg.d_model, cfg.d_ff))
        p[f"l{l}_ffn_b1"] = np.zeros(cfg.d_ff)
        p[f"l{l}_ffn_w2"] = rng.normal(0, scale, (cfg.d_ff, cfg.d_model))
        p[f"l{l}_ffn_b2"] = np.zeros(cfg.d_model)
        p[f"l{l}_ln1_g"] = np.ones(cfg.d_model)
        p[f"l{l}_ln1_b"] = np.zeros(cfg.d_model)
        p[f"l{l}_ln2_g"] = np.ones(cfg.d_model)
        p[f"l{l}_ln2_b"] = np.zeros(cfg.d_model)
    return {k: Tensor(v, requires_grad=True) for k, v in p.items()}


def clone_params(params: dict[str, Tensor]) -> dict[str, Tensor]:
    return {k: Tensor(v.data.copy(), requires_grad=True) for k, v in params.items()}


# -- forward pass ----------------------------------------------------------


def _forward_graph(
    params: dict[str, Tensor],
    cfg: ModelConfig,
    ids: np.ndarray,
    valid: np.ndarray,
    dropout_rng: np.random.Generator | None = None,
):
    """Run the encoder on an id batch.

    ids, valid: [B, T]; valid marks non-padding positions. Returns
    (cls_states [B, d], cls_rows per layer [B, H, T], states per layer
    [B, T, d]).
    """
    b, t = ids.shape
    if t > cfg.max_len:
        raise ValueError(f"sequence length {t} exceeds max_len {cfg.max_len}")
    h, dh = cfg.n_heads, cfg.d_model // cfg.n_heads

    x = params["tok_emb"][ids] + params["pos_emb"][np.arange(t)]
    x = autograd.layer_norm(x, params["emb_ln_g"], params["emb_ln_b"])
    emb_out = x

    key_mask = valid[:, None, None, :]  # broadcast over heads and query positions
    cls_rows: list[Tensor] = []
    states: list[Tensor] = []
    for l in range(cfg.n_layers):
        def proj(name):
            return (
                (x @ params[f"l{l}_{name}"] + params[f"l{l}_{name}_b"])
                .reshape(b, t, h, dh)
                .transpose(0, 2, 1, 3)
            )

        q, k, v = proj("wq"), proj("wk"), proj("wv")
        scores = (q @ k.transpose(0, 1, 3, 2)) * (1.0 / (np.sqrt(dh) * cfg.attn_temperature))
        probs = autograd.softmax(scores, mask=np.broadcast_to(key_mask, scores.shape))
        cls_rows.append(probs[:, :, 0, :])
        if dropout_rng is not None and cfg.dropout > 0:
            keep = (dropout_rng.random(probs.shape) >= cfg.dropout) / (1 - cfg.dropout)
            probs = probs * keep
        attn_out = (probs @ v).transpose(0, 2, 1, 3).reshape(b, t, cfg.d_model)
        attn_out = attn_out @ params[f"l{l}_wo"] + params[f"l{l}_wo_b"]
        x = autograd.layer_norm(x + attn_out, params[f"l{l}_ln1_g"], params[f"l{l}_ln1_b"])

        hidden = autograd.gelu(x @ params[f"l{l}_ffn_w1"] + params[f"l{l}_ffn_b1"])
        if dropout_rng is not None and cfg.dropout > 0:
            keep = (dropout_rng.random(hidden.shape) >= cfg.dropout) / (1 - cfg.dropout)
            hidden = hidden * keep
        ffn_out = hidden @ params[f"l{l}_ffn_w2"] + params[f"l{l}_ffn_b2"]
        x = autograd.layer_norm(x + ffn_out, params[f"l{l}_ln2_g"], params[f"l{l}_ln2_b"])
        states.append(x)

    cls_state = x[:, 0, :]
    return cls_state, cls_rows, states, emb_out


def head_average_tensor(cls_row: Tensor) -> Tensor:
    """[B, H, T] -> [B, T] mean over heads."""
    return cls_row.mean(axis=1)


def head_average(trace: AttentionTrace, layer: int) -> np.ndarray:
    """Head-averaged classifier attention at `layer`; sums to 1."""
    if not 0 <= layer < trace.rows.shape[0]:
        raise IndexError(f"layer {layer} out of range for {trace.rows.shape[0]} layers")
    return trace.rows[layer].mean(axis=0)


def _batch_logits(
    params: dict[str, Tensor],
    cfg: ModelConfig,
    strategy: StrategyConfig,
    ids: np.ndarray,
    valid: np.ndarray,
    a_h: np.ndarray | None,
    dropout_rng: np.random.Generator | None = None,
):
    """Logits plus captured rows/states for one batch under a strategy.

    For the pooled-normalizer strategy the head reads an attention-weighted
    pooling of the states feeding the last layer; a_h=None means inference
    (the zero sentinel).
    """
    cls_state, cls_rows, states, emb_out = _forward_graph(params, cfg, ids, valid, dropout_rng)
    if strategy.kind == "an":
        # pool over the states feeding the last layer (the embeddings when L=1)
        pool_states = states[-2] if cfg.n_layers >= 2 else emb_out
        a_m_last = head_average_tensor(cls_rows[-1])
        a_h_eff = np.zeros(ids.shape) if a_h is None else a_h
        pooled = an_pool_tensor(pool_states, a_m_last, a_h_eff, strategy.alpha)
        logits = pooled @ params["cls_w"] + params["cls_b"]
    else:
        logits = cls_state @ params["cls_w"] + params["cls_b"]
    return logits, cls_rows, states


def forward(
    tokens: TokenSequence,
    params: dict[str, Tensor],
    cfg: ModelConfig,
    strategy: StrategyConfig | None = None,
) -> tuple[Prediction, AttentionTrace, HiddenStates]:
    """Single-sequence inference capturing the attention trace and states."""
    strategy = strategy or StrategyConfig("baseline")
    ids = np.asarray(tokens.ids)[None, :]
    valid = np.ones_like(ids, dtype=bool)
    logits, cls_rows, states = _batch_logits(params, cfg, strategy, ids, valid, a_h=None)
    trace = AttentionTrace(rows=np.stack([r.data[0] for r in cls_rows]))
    hidden = HiddenStates(states=[s.data[0] for s in states])
    return Prediction(logits=logits.data[0]), trace, hidden


def predict_proba(
    sequences: list[TokenSequence],
    params: dict[str, Tensor],
    cfg: ModelConfig,
    strategy: StrategyConfig | None = None,
    batch_size: int = 64,
) -> np.ndarray:
    """Positive-class probabilities for a list of sequences."""
    strategy = strategy or StrategyConfig("baseline")
    probs = np.empty(len(sequences))
    for start in range(0, len(sequences), batch_size):
        chunk = sequences[start : start + batch_size]
        ids, valid = _pad_batch(chunk, cfg)
        logits, _, _ = _batch_logits(params, cfg, strategy, ids, valid, a_h=None)
        shifted = logits.data - logits.data.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
        probs[start : start + len(chunk)] = e[:, 1] / e.sum(axis=-1)
    return probs


def _pad_batch(sequences: list[TokenSequence], cfg: ModelConfig) -> tuple[np.ndarray, np.ndarray]:
    t = max(len(s) for s in sequences)
    if t > cfg.max_len:
        raise ValueError(f"sequence length {t} exceeds max_len {cfg.max_len}")
    ids = np.full((len(sequences), t), _pad_id(cfg), dtype=np.int64)
    valid = np.zeros((len(sequences), t), dtype=bool)
    for i, s in enumerate(sequences):
        ids[i, : len(s)] = s.ids
        valid[i, : len(s)] = True
    return ids, valid


def _pad_id(cfg: ModelConfig) -> int:
    return 1  # SubwordVocab convention


def _pad_attention(attentions: list[np.ndarray], t: int) -> np.ndarray:
    out = np.zeros((len(attentions), t))
    for i, a in enumerate(attentions):
        out[i, : len(a)] = a
    return out


def _batch_loss(
    params: dict[str, Tensor],
    cfg: ModelConfig,
    strategy: StrategyConfig,
    ids: np.ndarray,
    valid: np.ndarray,
    labels: np.ndarray,
    a_h: np.ndarray | None,
    dropout_rng: np.random.Generator | None = None,
) -> tuple[Tensor, float, float]:
    """Training loss tensor plus (ce, attention) component values.

    With alpha == 0 the alignment branch is left out of the graph entirely,
    so the optimization trajectory is identical to the baseline's bit for
    bit; the attention component is still reported.
    """
    train_a_h = a_h if strategy.kind == "an" else None
    logits, cls_rows, _ = _batch_logits(params, cfg, strategy, ids, valid, train_a_h, dropout_rng)
    ce = autograd.cross_entropy(logits, labels)
    loss = ce
    attn_value = 0.0
    if strategy.kind in ("al", "ap"):
        layer = -1 if strategy.kind == "al" else 0
        a_m = head_average_tensor(cls_rows[layer])
        term = alignment_term(a_h, a_m, valid, literal_sign=strategy.literal_sign)
        attn_value = float(term.data)
        if strategy.alpha != 0.0:
            loss = ce + strategy.alpha * term
    return loss, float(ce.data), attn_value


def fit(
    sequences: list[TokenSequence],
    labels: np.ndarray,
    strategy: StrategyConfig,
    model_config: ModelConfig,
    train_config: TrainConfig,
    human_attentions: list[np.ndarray] | None = None,
    doc_ids: list[str] | None = None,
) -> tuple[dict[str, Tensor], TrainingHistory]:
    """Mini-batch Adam training of the strategy's total loss.

    `human_attentions` holds per-item vectors in token space (zeros at the
    classifier slot and padding); required for every item under the
    attention-using strategies. Deterministic for fixed data and configs.
    """
    if not sequences:
        raise ValueError("empty training set")
    labels = np.asarray(labels, dtype=np.int64)
    if strategy.kind != "baseline":
        ids_ = doc_ids or [f"item{i}" for i in range(len(sequences))]
        missing = [
            ids_[i]
            for i in range(len(sequences))
            if human_attentions is None
            or human_attentions[i] is None
            or not np.any(human_attentions[i])
        ]
        if missing:
            raise ValueError(f"strategy {strategy.kind} requires human attention; missing for {missing}")

    params = init_params(model_config)
    opt = Adam(params, train_config)
    shuffle_rng = np.random.default_rng(train_config.seed)
    dropout_rng = np.random.default_rng(train_config.seed + 1) if model_config.dropout > 0 else None
    n = len(sequences)
    history = TrainingHistory()
    for epoch in range(train_config.epochs):
        order = shuffle_rng.permutation(n)
        ce_sum = attn_sum = 0.0
        for start in range(0, n, train_config.batch_size):
            idx = order[start : start + train_config.batch_size]
            batch_seqs = [sequences[i] for i in idx]
            ids, valid = _pad_batch(batch_seqs, model_config)
            a_h = None
            if strategy.kind != "baseline":
                a_h = _pad_attention([human_attentions[i] for i in idx], ids.shape[1])
            loss, ce, attn = _batch_loss(
                params, model_config, strategy, ids, valid, labels[idx], a_h, dropout_rng
            )
            loss.backward()
            opt.step()
            ce_sum += ce * len(idx)
            attn_sum += attn * len(idx)
        ce_epoch = ce_sum / n
        attn_epoch = attn_sum / n
        alpha = strategy.alpha if strategy.kind in ("al", "ap") else 0.0
        scores = predict_proba(sequences, params, model_config, strategy)
        train_auc = auc(scores, labels) if len(set(labels.tolist())) > 1 else float("nan")
        history.epochs.append(
            EpochRecord(
                epoch=epoch,
                total_loss=ce_epoch + alpha * attn_epoch,
                ce_loss=ce_epoch,
                attn_loss=attn_epoch,
                train_auc=train_auc,
            )
        )
    return params, history


class Adam:
    def __init__(self, params: dict[str, Tensor], cfg: TrainConfig):
        self.params = params
        self.cfg = cfg
        self.t = 0
        self.m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in params.items()}

    def step(self):
        self.t += 1
        c = self.cfg
        for k, p in self.params.items():
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            self.m[k] = c.beta1 * self.m[k] + (1 - c.beta1) * g
            self.v[k] = c.beta2 * self.v[k] + (1 - c.beta2) * g * g
            m_hat = self.m[k] / (1 - c.beta1**self.t)
            v_hat = self.v[k] / (1 - c.beta2**self.t)
            p.data -= c.learning_rate * m_hat / (np.sqrt(v_hat) + c.adam_eps)
            p.grad = None


def grad_check(
    params: dict[str, Tensor],
    batch: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray | None],
    strategy: StrategyConfig,
    model_config: ModelConfig,
    eps: float = 1e-3,
    n_samples: int = 40,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central finite-difference
    gradients on a random parameter coordinate subsample."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    ids, valid, labels, a_h = batch

    def loss_value() -> float:
        loss, _, _ = _batch_loss(params, model_config, strategy, ids, valid, labels, a_h)
        return float(loss.data)

    loss, _, _ = _batch_loss(params, model_config, strategy, ids, valid, labels, a_h)
    for p in params.values():
        p.grad = None
    loss.backward()

    rng = np.random.default_rng(seed)
    names = sorted(params)
    max_rel = 0.0
    for _ in range(n_samples):
        name = names[rng.integers(len(names))]
        p = params[name]
        flat_idx = int(rng.integers(p.data.size))
        idx = np.unravel_index(flat_idx, p.data.shape)
        analytic = p.grad[idx] if p.grad is not None else 0.0
        orig = p.data[idx]
        p.data[idx] = orig + eps
        up = loss_value()
        p.data[idx] = orig - eps
        down = loss_value()
        p.data[idx] = orig
        numeric = (up - down) / (2 * eps)
        denom = max(abs(analytic) + abs(numeric), 1e-8)
        max_rel = max(max_rel, abs(analytic - numeric) / denom)
    for p in params.values():
        p.grad = None
    return max_rel


# -- checkpoints -----------------------------------------------------------


def save_checkpoint(path: str | Path, params: dict[str, Tensor], cfg: ModelConfig) -> None:
    arrays = {k: p.data for k, p in params.items()}
    meta = json.dumps({"format_version": CHECKPOINT_VERSION, "model_config": asdict(cfg)})
    np.savez(path, __meta__=np.frombuffer(meta.encode(), dtype=np.uint8), **arrays)


def load_checkpoint(path: str | Path) -> tuple[dict[str, Tensor], ModelConfig]:
    data = np.load(path)
    meta = json.loads(bytes(data["__meta__"]).decode())
    if meta["format_version"] != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {meta['format_version']}")
    cfg = ModelConfig(**meta["model_config"])
    params = {k: Tensor(data[k], requires_grad=True) for k in data.files if k != "__meta__"}
    return params, cfg
