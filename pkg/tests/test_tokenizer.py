import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from attnalign.tokenizer import (
    CLS_TOKEN,
    SubwordVocab,
    subword_tokenize,
    train_vocab,
    word_tokenize,
)


def test_word_tokenize_splits_punctuation():
    assert word_tokenize("Will definitely be going back to this place!") == [
        "will", "definitely", "be", "going", "back", "to", "this", "place", "!",
    ]


def test_word_tokenize_leading_and_nested_punctuation():
    assert word_tokenize('"hello," she said...') == ['"', "hello", ",", '"', "she", "said", ".", ".", "."]


def test_word_tokenize_case_flag():
    assert word_tokenize("Hello", lowercase=False) == ["Hello"]
    assert word_tokenize("Hello") == ["hello"]


def test_word_tokenize_empty_and_whitespace():
    assert word_tokenize("") == []
    assert word_tokenize("   \t\n ") == []


@pytest.fixture(scope="module")
def vocab():
    corpus = ["the cat sat on the mat", "the dog sat on the log", "cats and dogs"] * 5
    return train_vocab(corpus, target_size=60)


def test_specials_have_reserved_ids(vocab):
    assert vocab.entries["[CLS]"] == vocab.cls_id == 0
    assert vocab.entries["[PAD]"] == vocab.pad_id == 1
    assert vocab.entries["[UNK]"] == vocab.unk_id == 2


def test_training_is_deterministic():
    corpus = ["alpha beta gamma delta"] * 4 + ["beta gamma"] * 3
    v1 = train_vocab(corpus, target_size=40)
    v2 = train_vocab(corpus, target_size=40)
    assert v1.entries == v2.entries


def test_vocab_capped_at_target():
    corpus = ["aa bb cc dd ee ff gg hh"] * 10
    v = train_vocab(corpus, target_size=20)
    assert len(v) <= 20


def test_tokenize_prepends_classifier_token(vocab):
    seq = subword_tokenize(["cat"], vocab)
    assert seq.tokens[0] == CLS_TOKEN
    assert seq.ids[0] == vocab.cls_id


def test_greedy_longest_match_prefers_whole_word(vocab):
    seq = subword_tokenize(["the"], vocab)
    assert seq.tokens[1:] == ["the"]


def test_unseen_characters_map_to_unk(vocab):
    seq = subword_tokenize(["é"], vocab)
    assert vocab.unk_id in seq.ids[1:]


def test_alignment_partitions_token_range(vocab):
    words = ["the", "cats", "unhelpfulness", "mat"]
    seq = subword_tokenize(words, vocab)
    ranges = seq.word_alignment
    assert len(ranges) == len(words)
    assert ranges[0][0] == 1
    for (s0, e0), (s1, e1) in zip(ranges, ranges[1:]):
        assert e0 == s1
        assert s0 < e0
    assert ranges[-1][1] == len(seq)


def test_subword_alignment_shifts_off_classifier_slot(vocab):
    seq = subword_tokenize(["cats", "dogs"], vocab)
    assert seq.subword_alignment() == [(s - 1, e - 1) for s, e in seq.word_alignment]


def test_continuation_marker_on_split_words(vocab):
    seq = subword_tokenize(["unhelpfulness"], vocab)
    pieces = seq.tokens[1:]
    if len(pieces) > 1:
        known = [p for p in pieces[1:] if p != "[UNK]"]
        assert all(p.startswith(vocab.marker) for p in known)
        assert not pieces[0].startswith(vocab.marker)


def test_save_load_round_trip(vocab, tmp_path):
    path = tmp_path / "vocab.txt"
    vocab.save(path)
    loaded = SubwordVocab.load(path)
    assert loaded.entries == vocab.entries
    assert loaded.marker == vocab.marker
    words = ["the", "cats", "zebra"]
    np.testing.assert_array_equal(subword_tokenize(words, vocab).ids, subword_tokenize(words, loaded).ids)


@given(st.lists(st.text(alphabet="abcdef", min_size=1, max_size=8), min_size=1, max_size=6))
@settings(max_examples=50, deadline=None)
def test_alignment_covers_every_word(vocab, words):
    seq = subword_tokenize(words, vocab)
    covered = []
    for s, e in seq.word_alignment:
        covered.extend(range(s, e))
    assert covered == list(range(1, len(seq)))
