"""Shared test helpers."""

import random

from rxgen.corpus import Record
from rxgen.scorers import train_ngram
from rxgen.tokenizer import SPECIALS, Vocabulary


def random_ngram_scorer(seed: int, max_content: int = 5, max_order: int = 3):
    """A small randomly-trained n-gram scorer over single-character words.

    The 1e-9 probability floor makes every token reachable, so the induced
    search tree spans the full vocabulary (specials included). Returns the
    scorer plus the label ids used to condition it.
    """
    rng = random.Random(seed)
    n_content = rng.randint(2, max_content)
    chars = tuple(chr(ord("a") + i) for i in range(n_content))
    vocab = Vocabulary(SPECIALS + chars)
    label = rng.choice(chars)
    records = []
    for _ in range(rng.randint(2, 5)):
        length = rng.randint(1, 5)
        words = rng.choices(chars, k=length)  # repeats are common and intended
        records.append(Record(rng.choice(chars), " ".join(words)))
    order = rng.randint(1, max_order)
    scorer = train_ngram(records, vocab, order=order)
    label_ids = [vocab.ids[label]]
    return scorer, vocab, label_ids
