"""Word-piece training, encoding, decoding."""

import random

import pytest

from rxgen.corpus import generate_synthetic_corpus
from rxgen.errors import CapacityError, InputError
from rxgen.tokenizer import (
    SPECIALS,
    Vocabulary,
    decode,
    encode,
    normalize,
    train_wordpiece,
)


def _vocab(*extra):
    return Vocabulary(SPECIALS + tuple(extra))


def test_train_produces_multicharacter_pieces():
    vocab = train_wordpiece(["aaab", "aaab"], vocab_size=10, min_frequency=2)
    assert "a" in vocab.pieces
    assert "b" in vocab.pieces or "##b" in vocab.pieces
    assert any(len(p.removeprefix("##")) >= 2 for p in vocab.pieces if p not in SPECIALS)
    assert len(vocab) == 10


def test_train_minimum_budget_gives_alphabet_only():
    # alphabet {a, b} in both bare and continuation form: 4 pieces + 4 specials
    vocab = train_wordpiece(["ab", "ba"], vocab_size=8, min_frequency=1)
    assert sorted(vocab.pieces[4:]) == ["##a", "##b", "a", "b"]


def test_train_budget_below_alphabet_rejected():
    with pytest.raises(CapacityError):
        train_wordpiece(["ab"], vocab_size=7)


def test_train_empty_corpus_rejected():
    with pytest.raises(InputError):
        train_wordpiece([], vocab_size=100)
    with pytest.raises(InputError):
        train_wordpiece(["   "], vocab_size=100)


def test_whole_word_piece_encodes_to_single_id():
    vocab = train_wordpiece(["hello hello hello"], vocab_size=20, min_frequency=2)
    assert "hello" in vocab.pieces
    assert encode(vocab, "hello") == [vocab.ids["hello"]]


def test_greedy_longest_match_trace():
    vocab = _vocab("##a", "##b", "a", "aa")
    ids = encode(vocab, "aaab")
    assert [vocab.pieces[i] for i in ids] == ["aa", "##a", "##b"]
    assert decode(vocab, ids) == "aaab"


def test_unseen_character_maps_to_unk():
    vocab = train_wordpiece(["abc abc"], vocab_size=20)
    ids = encode(vocab, "abéc")
    assert vocab.unk_id in ids
    # the in-alphabet characters around the unknown one still decode
    assert decode(vocab, ids) == "abc"


def test_decode_empty_and_range_check():
    vocab = _vocab("a")
    assert decode(vocab, []) == ""
    with pytest.raises(ValueError):
        decode(vocab, [len(vocab)])


def test_round_trip_on_synthetic_instructions():
    records = generate_synthetic_corpus(seed=5, n_labels=8, samples_per_label=3)
    texts = [r.record.instruction for r in records] + [r.record.label for r in records]
    vocab = train_wordpiece(texts, vocab_size=220, min_frequency=2)
    for text in texts:
        assert decode(vocab, encode(vocab, text)) == normalize(text)


def test_encode_total_on_arbitrary_text():
    vocab = train_wordpiece(["plain ascii text"], vocab_size=60)
    rng = random.Random(0)
    for _ in range(50):
        junk = "".join(chr(rng.randrange(33, 0x2FFF)) for _ in range(12))
        ids = encode(vocab, junk)
        assert all(0 <= i < len(vocab) for i in ids)


def test_monotone_vocabulary_and_specials_stability():
    corpus = ["the cat sat on the mat", "the cat ran", "a mat sat"]
    small = train_wordpiece(corpus, vocab_size=40, min_frequency=1)
    large = train_wordpiece(corpus, vocab_size=60, min_frequency=1)
    assert set(small.pieces) <= set(large.pieces)
    assert small.pieces[:4] == SPECIALS == large.pieces[:4]


def test_whitespace_normalization():
    vocab = train_wordpiece(["a b"], vocab_size=20)
    assert encode(vocab, "  a \t b  ") == encode(vocab, "a b")
    assert normalize(" a \n b ") == "a b"


def test_vocabulary_save_load_round_trip(tmp_path):
    vocab = train_wordpiece(["some words to keep", "words to keep"], vocab_size=64)
    path = tmp_path / "vocab.txt"
    vocab.save(path)
    loaded = Vocabulary.load(path)
    assert loaded == vocab
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[:4] == list(SPECIALS)
    assert lines.index("words") == vocab.ids["words"]
