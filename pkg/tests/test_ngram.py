"""Interpolated n-gram scorer."""

import numpy as np
import pytest

from rxgen.corpus import Record
from rxgen.errors import ConfigError, TrainingError
from rxgen.scorers import NgramScorer, assert_distribution, default_weights, train_ngram
from rxgen.scorers.ngram import FLOOR
from rxgen.tokenizer import SPECIALS, Vocabulary, encode


def _char_vocab(*chars):
    pieces = SPECIALS + tuple(sorted(chars)) + tuple("##" + c for c in sorted(chars))
    return Vocabulary(pieces)


@pytest.fixture
def vocab():
    return _char_vocab("a", "b", "c", "d")


def _sequence(vocab, rec):
    return (
        tuple(encode(vocab, rec.label))
        + (vocab.bos_id,)
        + tuple(encode(vocab, rec.instruction))
        + (vocab.eos_id,)
    )


def test_seen_context_argmax_is_observed_next(vocab):
    rec = Record("a", "b c d")
    scorer = train_ngram([rec], vocab, order=3)
    seq = _sequence(vocab, rec)
    # prefix = everything after label+BOS up to (but excluding) "d"
    label_ids = encode(vocab, "a")
    prefix = list(seq[len(label_ids) + 1 : -2])
    dist = scorer.next_distribution(label_ids, prefix)
    observed_next = seq[-2]
    assert int(np.argmax(dist)) == observed_next


def test_order_one_is_floored_unigram(vocab):
    recs = [Record("a", "b b c"), Record("a", "c d")]
    scorer = train_ngram(recs, vocab, order=1)
    label_ids = encode(vocab, "a")
    d1 = scorer.next_distribution(label_ids, [])
    d2 = scorer.next_distribution(label_ids, encode(vocab, "d c b"))
    np.testing.assert_array_equal(d1, d2)
    # oracle: count tokens of label+BOS+instruction+EOS sequences directly
    counts = np.zeros(len(vocab))
    for rec in recs:
        for tok in _sequence(vocab, rec):
            counts[tok] += 1
    expected = counts / counts.sum()
    expected = (expected + FLOOR) / (expected + FLOOR).sum()
    np.testing.assert_allclose(d1, expected, atol=1e-12)


def test_unseen_context_backs_off_to_unigram():
    vocab = _char_vocab("a", "b", "c", "d", "e")  # "e" never occurs in training
    recs = [Record("a", "b c"), Record("a", "b d")]
    scorer = train_ngram(recs, vocab, order=2, interpolation_weights=[0.4, 0.6])
    unigram = train_ngram(recs, vocab, order=1).next_distribution([], [])
    # context ("e",) was never seen, so the bigram component is empty and only
    # the 0.4-weighted unigram remains; after the 1e-9 floor re-normalization
    # the result matches the floored unigram up to a rescaled floor term.
    dist = scorer.next_distribution(encode(vocab, "a"), encode(vocab, "e"))
    np.testing.assert_allclose(dist, unigram, atol=1e-8)


def test_distributions_are_simplex_and_strictly_positive(vocab):
    recs = [Record("a", "b c d"), Record("b", "a a c")]
    scorer = train_ngram(recs, vocab, order=3)
    rng = np.random.default_rng(0)
    for _ in range(50):
        prefix = rng.integers(0, len(vocab), size=rng.integers(0, 6)).tolist()
        dist = scorer.next_distribution(encode(vocab, "a"), prefix)
        assert_distribution(dist)
        assert (dist > 0).all()


def test_weight_and_corpus_validation(vocab):
    rec = Record("a", "b")
    with pytest.raises(ConfigError):
        train_ngram([rec], vocab, order=0)
    with pytest.raises(ConfigError):
        train_ngram([rec], vocab, order=2, interpolation_weights=[1.0])
    with pytest.raises(ConfigError):
        train_ngram([rec], vocab, order=2, interpolation_weights=[0.7, 0.7])
    with pytest.raises(TrainingError):
        train_ngram([], vocab, order=2)


def test_default_weights_sum_to_one():
    for order in (1, 2, 3, 4):
        weights = default_weights(order)
        assert len(weights) == order
        assert abs(sum(weights) - 1.0) < 1e-12
        assert all(b > a for a, b in zip(weights, weights[1:])) or order == 1
