"""Scorer save/load container."""

import numpy as np
import pytest

from conftest import random_ngram_scorer
from rxgen.corpus import Record
from rxgen.errors import FormatError, KindMismatchError
from rxgen.scorers import TransformerConfig, load_scorer, save_scorer, train_transformer
from rxgen.tokenizer import SPECIALS, Vocabulary


def _probe(scorer, label_ids, n=6):
    return [scorer.next_distribution(label_ids, list(range(k))[:2]) for k in range(n)]


def test_ngram_round_trip_bitwise(tmp_path):
    scorer, _, label_ids = random_ngram_scorer(3)
    path = tmp_path / "s.ngram"
    save_scorer(scorer, path)
    loaded = load_scorer(path)
    assert loaded.kind == "ngram"
    for before, after in zip(_probe(scorer, label_ids), _probe(loaded, label_ids)):
        np.testing.assert_array_equal(before, after)


def test_transformer_round_trip_bitwise(tmp_path):
    records = [Record("a", "b c"), Record("b", "c d")]
    vocab = Vocabulary(SPECIALS + ("a", "b", "c", "d"))
    config = TransformerConfig(
        d_model=8, d_ff=16, d_kv=4, heads=2, layers=1, dropout=0.0,
        epochs=2, batch_size=2, seed=0,
    )
    scorer, _ = train_transformer(records, vocab, config)
    path = tmp_path / "s.tf"
    save_scorer(scorer, path)
    loaded = load_scorer(path, expected_kind="transformer")
    for before, after in zip(_probe(scorer, [4]), _probe(loaded, [4])):
        np.testing.assert_array_equal(before, after)
    assert loaded.config == config


def test_truncated_file_rejected(tmp_path):
    scorer, _, _ = random_ngram_scorer(1)
    path = tmp_path / "s.ngram"
    save_scorer(scorer, path)
    blob = path.read_bytes()
    for cut in (4, len(blob) // 2):
        clipped = tmp_path / f"cut{cut}"
        clipped.write_bytes(blob[:cut])
        with pytest.raises(FormatError):
            load_scorer(clipped)


def test_not_a_scorer_file(tmp_path):
    path = tmp_path / "junk"
    path.write_bytes(b"this is not a scorer file at all")
    with pytest.raises(FormatError):
        load_scorer(path)


def test_kind_mismatch(tmp_path):
    scorer, _, _ = random_ngram_scorer(2)
    path = tmp_path / "s.ngram"
    save_scorer(scorer, path)
    with pytest.raises(KindMismatchError):
        load_scorer(path, expected_kind="transformer")
