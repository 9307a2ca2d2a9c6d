"""Interpolated n-gram scorer.

A fast reference scorer: linear interpolation of maximum-likelihood
estimates across orders 1..order, conditioned on the label by prepending
``label_ids + [BOS]`` to every training sequence. A uniform floor of 1e-9
is added to every token and the result re-normalized, so every token gets
strictly positive probability and the decoder's log-domain arithmetic never
sees -inf except by explicit masking.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from typing import Sequence

import numpy as np

from ..corpus import Record
from ..errors import ConfigError, TrainingError
from ..tokenizer import Vocabulary, encode

FLOOR = 1e-9


def default_weights(order: int) -> tuple[float, ...]:
    """Geometric weights favouring higher orders, normalized to sum 1."""
    raw = [2.0**k for k in range(order)]
    total = sum(raw)
    return tuple(w / total for w in raw)


class NgramScorer:
    kind = "ngram"

    def __init__(
        self,
        order: int,
        weights: Sequence[float],
        vocab_size: int,
        bos_id: int,
        eos_id: int,
        unigram: np.ndarray,
        contexts: list[dict[tuple[int, ...], tuple[np.ndarray, np.ndarray]]],
    ):
        self.order = order
        self.weights = tuple(float(w) for w in weights)
        self.vocab_size = vocab_size
        self.bos_id = bos_id
        self.eos_id = eos_id
        self.unigram = unigram
        # contexts[k-2] maps a (k-1)-token context to (token ids, MLE probs).
        self.contexts = contexts

    def next_distribution(self, label_ids: Sequence[int], prefix_ids: Sequence[int]) -> np.ndarray:
        history = tuple(label_ids) + (self.bos_id,) + tuple(prefix_ids)
        probs = self.weights[0] * self.unigram
        for k in range(2, self.order + 1):
            if len(history) < k - 1:
                continue
            entry = self.contexts[k - 2].get(history[-(k - 1) :])
            if entry is None:
                continue
            tokens, mle = entry
            probs[tokens] += self.weights[k - 1] * mle
        probs = probs + FLOOR
        return probs / probs.sum()


def train_ngram(
    corpus: Sequence[Record],
    vocab: Vocabulary,
    order: int,
    interpolation_weights: Sequence[float] | None = None,
) -> NgramScorer:
    if order < 1:
        raise ConfigError("order must be >= 1")
    weights = tuple(interpolation_weights) if interpolation_weights is not None else default_weights(order)
    if len(weights) != order:
        raise ConfigError(f"need {order} interpolation weights, got {len(weights)}")
    if abs(sum(weights) - 1.0) > 1e-9 or any(w < 0 for w in weights):
        raise ConfigError("interpolation weights must be non-negative and sum to 1")
    if not corpus:
        raise TrainingError("cannot train an n-gram scorer on an empty corpus")

    sequences = [
        tuple(encode(vocab, rec.label)) + (vocab.bos_id,) + tuple(encode(vocab, rec.instruction)) + (vocab.eos_id,)
        for rec in corpus
    ]

    uni = np.zeros(len(vocab), dtype=np.float64)
    for seq in sequences:
        for tok in seq:
            uni[tok] += 1.0
    uni /= uni.sum()

    contexts: list[dict[tuple[int, ...], tuple[np.ndarray, np.ndarray]]] = []
    for k in range(2, order + 1):
        counts: dict[tuple[int, ...], Counter] = defaultdict(Counter)
        for seq in sequences:
            for i in range(len(seq) - k + 1):
                counts[seq[i : i + k - 1]][seq[i + k - 1]] += 1
        table = {}
        for ctx, counter in counts.items():
            total = sum(counter.values())
            tokens = np.fromiter(counter.keys(), dtype=np.int64, count=len(counter))
            mle = np.fromiter(counter.values(), dtype=np.float64, count=len(counter)) / total
            table[ctx] = (tokens, mle)
        contexts.append(table)

    return NgramScorer(order, weights, len(vocab), vocab.bos_id, vocab.eos_id, uni, contexts)
