"""Human-attention-supervised text classification lab."""

from .corpus import (
    AnnotatedDocument,
    AnnotatorRecord,
    HumanAttention,
    ConfusionReport,
    SyntheticSpec,
    aggregate_annotations,
    normalize_attention,
    propagate_to_subwords,
    filter_sparse,
    resolve_labels,
    generate_synthetic,
)
from .tokenizer import SubwordVocab, TokenSequence, word_tokenize, train_vocab, subword_tokenize
from .model import ModelConfig, TrainConfig, fit, forward, head_average, grad_check
from .strategies import StrategyConfig, LossBreakdown, attention_alignment_loss, an_pool, strategy_loss
from .metrics import auc, significance
from .estimator import AttentionSupervisedClassifier

__version__ = "0.1.0"
