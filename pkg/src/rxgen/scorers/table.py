"""Hard-coded conditional-table scorer for tests, demos, and docs."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np


class TableScorer:
    """Scores next tokens from an explicit prefix -> distribution table.

    Prefixes and tokens are given as strings; the label is ignored. Any
    prefix absent from the table falls back to ``default`` (end-of-sequence
    with probability 1 unless overridden). Each row must sum to 1.
    """

    kind = "table"

    def __init__(
        self,
        tokens: Sequence[str],
        table: Mapping[tuple[str, ...], Mapping[str, float]],
        eos: str = "<eos>",
        default: Mapping[str, float] | None = None,
    ):
        self.tokens = tuple(tokens)
        if eos not in self.tokens:
            raise ValueError(f"eos token {eos!r} missing from token inventory")
        self.ids = {tok: i for i, tok in enumerate(self.tokens)}
        self.vocab_size = len(self.tokens)
        self.eos_id = self.ids[eos]
        self._default = dict(default) if default is not None else {eos: 1.0}
        self._rows: dict[tuple[int, ...], np.ndarray] = {}
        for prefix, dist in table.items():
            self._rows[tuple(self.ids[t] for t in prefix)] = self._vector(dist)
        self._default_row = self._vector(self._default)

    def _vector(self, dist: Mapping[str, float]) -> np.ndarray:
        row = np.zeros(self.vocab_size, dtype=np.float64)
        for tok, prob in dist.items():
            row[self.ids[tok]] = prob
        if abs(row.sum() - 1.0) > 1e-9:
            raise ValueError(f"table row sums to {row.sum()}, expected 1")
        return row

    def next_distribution(self, label_ids: Sequence[int], prefix_ids: Sequence[int]) -> np.ndarray:
        return self._rows.get(tuple(prefix_ids), self._default_row)

    def token_ids(self, *tokens: str) -> tuple[int, ...]:
        return tuple(self.ids[t] for t in tokens)

    def token_strings(self, ids: Sequence[int]) -> tuple[str, ...]:
        return tuple(self.tokens[i] for i in ids)
