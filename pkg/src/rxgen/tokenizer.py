"""Word-piece tokenizer trained locally.

Continuation pieces carry a "##" prefix; encoding is greedy longest-match
within each whitespace word, so unseen words decompose into known sub-words
and unseen characters fall back to UNK. Every character seen during training
is kept in both word-initial and continuation form, which makes encoding
total over the training alphabet.
"""

from __future__ import annotations

from collections import Counter
from pathlib import Path
from typing import Iterable, Sequence

from .errors import CapacityError, InputError

PAD, BOS, EOS, UNK = "[PAD]", "[BOS]", "[EOS]", "[UNK]"
SPECIALS = (PAD, BOS, EOS, UNK)


class Vocabulary:
    """Immutable piece inventory; ids are dense and specials sit at ids 0-3."""

    def __init__(self, pieces: Sequence[str]):
        pieces = tuple(pieces)
        if pieces[:4] != SPECIALS:
            raise ValueError(f"pieces must start with {SPECIALS}")
        if len(set(pieces)) != len(pieces):
            raise ValueError("duplicate pieces in vocabulary")
        self.pieces = pieces
        self.ids = {p: i for i, p in enumerate(pieces)}

    pad_id, bos_id, eos_id, unk_id = 0, 1, 2, 3

    def __len__(self) -> int:
        return len(self.pieces)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.pieces == other.pieces

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for piece in self.pieces:
                fh.write(piece + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            pieces = [line.rstrip("\n") for line in fh]
        while pieces and pieces[-1] == "":
            pieces.pop()
        return cls(pieces)


def normalize(text: str) -> str:
    """Collapse consecutive whitespace to single spaces and trim the ends."""
    return " ".join(text.split())


def _word_pieces(word: str) -> tuple[str, ...]:
    return (word[0],) + tuple("##" + ch for ch in word[1:])


def train_wordpiece(corpus: Iterable[str], vocab_size: int, min_frequency: int = 2) -> Vocabulary:
    """Train by iterative pair merging.

    Starting from single characters (both bare and "##" continuation forms),
    the most frequent adjacent pair is merged into a new piece until
    vocab_size is reached or no pair occurs at least min_frequency times.
    Ties break toward the lexicographically smallest pair, so training is
    deterministic.
    """
    word_freq = Counter()
    for text in corpus:
        for word in normalize(text).split():
            word_freq[word] += 1
    if not word_freq:
        raise InputError("training corpus is empty")

    alphabet = sorted({ch for word in word_freq for ch in word})
    base_pieces = sorted([ch for ch in alphabet] + ["##" + ch for ch in alphabet])
    base = len(SPECIALS) + len(base_pieces)
    if vocab_size < base:
        raise CapacityError(
            f"vocab_size {vocab_size} below alphabet size {len(base_pieces)} + {len(SPECIALS)} specials"
        )

    pieces = list(SPECIALS) + base_pieces
    known = set(pieces)
    words = {word: _word_pieces(word) for word in word_freq}

    while len(pieces) < vocab_size:
        pair_counts = Counter()
        for word, segs in words.items():
            freq = word_freq[word]
            for a, b in zip(segs, segs[1:]):
                pair_counts[(a, b)] += freq
        if not pair_counts:
            break
        best = min(pair_counts, key=lambda p: (-pair_counts[p], p))
        if pair_counts[best] < min_frequency:
            break
        left, right = best
        merged = left + right.removeprefix("##")
        if merged not in known:
            pieces.append(merged)
            known.add(merged)
        for word, segs in words.items():
            if len(segs) < 2:
                continue
            out = []
            i = 0
            while i < len(segs):
                if i + 1 < len(segs) and segs[i] == left and segs[i + 1] == right:
                    out.append(merged)
                    i += 2
                else:
                    out.append(segs[i])
                    i += 1
            words[word] = tuple(out)
    return Vocabulary(pieces)


def encode(vocab: Vocabulary, text: str) -> list[int]:
    """Greedy longest-match-first encoding; never fails.

    Characters absent from the vocabulary map to UNK and matching resumes
    at the next character.
    """
    ids: list[int] = []
    for word in normalize(text).split():
        start = 0
        while start < len(word):
            match = None
            for end in range(len(word), start, -1):
                candidate = word[start:end]
                if start > 0:
                    candidate = "##" + candidate
                token_id = vocab.ids.get(candidate)
                if token_id is not None:
                    match = (token_id, end)
                    break
            if match is None:
                ids.append(vocab.unk_id)
                start += 1
            else:
                ids.append(match[0])
                start = match[1]
    return ids


def decode(vocab: Vocabulary, ids: Sequence[int]) -> str:
    """Inverse of encode for in-vocabulary text; drops special tokens."""
    words: list[str] = []
    for token_id in ids:
        if not 0 <= token_id < len(vocab.pieces):
            raise ValueError(f"token id {token_id} out of range for vocabulary of {len(vocab)}")
        piece = vocab.pieces[token_id]
        if piece in SPECIALS:
            continue
        if piece.startswith("##") and words:
            words[-1] += piece[2:]
        elif piece.startswith("##"):
            words.append(piece[2:])
        else:
            words.append(piece)
    return " ".join(words)
