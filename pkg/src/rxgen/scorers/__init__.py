"""Autoregressive conditional scorers: n-gram, transformer, and table."""

from .base import Scorer, assert_distribution
from .io import load_scorer, save_scorer
from .ngram import NgramScorer, default_weights, train_ngram
from .table import TableScorer
from .transformer import (
    PRESETS,
    TrainReport,
    TransformerConfig,
    TransformerScorer,
    forward_logits,
    preset,
    softmax,
    train_transformer,
)

__all__ = [
    "Scorer",
    "assert_distribution",
    "load_scorer",
    "save_scorer",
    "NgramScorer",
    "default_weights",
    "train_ngram",
    "TableScorer",
    "PRESETS",
    "TrainReport",
    "TransformerConfig",
    "TransformerScorer",
    "forward_logits",
    "preset",
    "softmax",
    "train_transformer",
]
