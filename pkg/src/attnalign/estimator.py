"""Scikit-learn-style wrapper around the transformer classifier so the
training pipeline composes with the wider ecosystem (get_params / clone /
pipelines)."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from . import model as model_mod
from .strategies import StrategyConfig
from .tokenizer import TokenSequence


def _validate_sequences(X) -> list[TokenSequence]:
    if not isinstance(X, (list, tuple)) or not X:
        raise ValueError("X must be a nonempty list of TokenSequence")
    for i, seq in enumerate(X):
        if not isinstance(seq, TokenSequence):
            raise TypeError(f"X[{i}] is {type(seq).__name__}, expected TokenSequence")
    return list(X)


def _validate_labels(y, n: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (n,):
        raise ValueError(f"y has shape {y.shape}, expected ({n},)")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be binary (0/1)")
    return y


class AttentionSupervisedClassifier(BaseEstimator, ClassifierMixin):
    """Transformer text classifier with optional human-attention supervision.

    strategy: "baseline", "al" (alignment loss at the last layer), "ap"
    (alignment loss at the first layer), or "an" (attention-reweighted
    pooled classifier input). X is a list of TokenSequence; human attention
    vectors in token space are passed to fit via `human_attention`.
    """

    def __init__(
        self,
        vocab_size=256,
        n_layers=2,
        n_heads=4,
        d_model=64,
        d_ff=128,
        max_len=128,
        dropout=0.0,
        attn_temperature=1.0,
        strategy="baseline",
        alpha=2.0,
        literal_sign=False,
        learning_rate=5e-5,
        epochs=10,
        batch_size=32,
        seed=0,
    ):
        self.vocab_size = vocab_size
        self.n_layers = n_layers
        self.n_heads = n_heads
        self.d_model = d_model
        self.d_ff = d_ff
        self.max_len = max_len
        self.dropout = dropout
        self.attn_temperature = attn_temperature
        self.strategy = strategy
        self.alpha = alpha
        self.literal_sign = literal_sign
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed

    def _configs(self):
        mcfg = model_mod.ModelConfig(
            vocab_size=self.vocab_size,
            n_layers=self.n_layers,
            n_heads=self.n_heads,
            d_model=self.d_model,
            d_ff=self.d_ff,
            max_len=self.max_len,
            dropout=self.dropout,
            attn_temperature=self.attn_temperature,
            seed=self.seed,
        )
        tcfg = model_mod.TrainConfig(
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            batch_size=self.batch_size,
            seed=self.seed,
        )
        strat = StrategyConfig(kind=self.strategy, alpha=self.alpha, literal_sign=self.literal_sign)
        return mcfg, tcfg, strat

    def fit(self, X, y, human_attention=None, doc_ids=None):
        sequences = _validate_sequences(X)
        y = _validate_labels(y, len(sequences))
        mcfg, tcfg, strat = self._configs()
        self.params_, self.history_ = model_mod.fit(
            sequences, y, strat, mcfg, tcfg, human_attentions=human_attention, doc_ids=doc_ids
        )
        self.model_config_ = mcfg
        self.strategy_config_ = strat
        self.classes_ = np.array([0, 1])
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError("call fit before predicting")

    def predict_proba(self, X):
        self._check_fitted()
        sequences = _validate_sequences(X)
        pos = model_mod.predict_proba(sequences, self.params_, self.model_config_, self.strategy_config_)
        return np.column_stack([1 - pos, pos])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)

    def forward(self, seq: TokenSequence):
        """Single-sequence inference returning (prediction, attention trace,
        hidden states)."""
        self._check_fitted()
        return model_mod.forward(seq, self.params_, self.model_config_, self.strategy_config_)
