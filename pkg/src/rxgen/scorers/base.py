"""Scorer contract.

A scorer is the learned conditional next-token model: given the label token
ids and the generated prefix, it returns a probability distribution over the
vocabulary as a float64 numpy vector (non-negative, summing to 1 within 1e-6).
Scorers are immutable once trained and safe to share across decodes.
"""

from __future__ import annotations

from typing import Protocol, Sequence, runtime_checkable

import numpy as np


@runtime_checkable
class Scorer(Protocol):
    kind: str
    vocab_size: int
    eos_id: int

    def next_distribution(
        self, label_ids: Sequence[int], prefix_ids: Sequence[int]
    ) -> np.ndarray: ...


def assert_distribution(probs: np.ndarray, atol: float = 1e-6) -> None:
    """Raise if the vector violates the probability-simplex invariant."""
    if probs.ndim != 1:
        raise ValueError(f"distribution must be 1-D, got shape {probs.shape}")
    if (probs < 0).any():
        raise ValueError("distribution has negative entries")
    total = float(probs.sum())
    if abs(total - 1.0) > atol:
        raise ValueError(f"distribution sums to {total}, expected 1 within {atol}")
