import pytest

from chitask import schema
from chitask.schema import CHIT_ACT, BeliefState, Dialogue, DialogueTurn
from chitask.vocab import EmptyCorpus, Vocabulary, build_vocab


def tiny_corpus():
    turn = DialogueTurn(
        user="hotel hotel hotel hotel cheap",
        belief=BeliefState.from_pairs([("hotel", {"price": "cheap"})]),
        db="db_1",
        act=CHIT_ACT,
        response="cheap rare",
    )
    return [Dialogue(turns=[turn], source="tod")]


def test_specials_first_and_pad_is_zero():
    v = build_vocab(tiny_corpus())
    assert v.pad_id == 0
    assert v.word_of[0] == schema.PAD_TOKEN
    specials = schema.special_tokens()
    assert tuple(v.word_of[: len(specials)]) == specials
    assert v.reserved_boundary == len(specials)


def test_frequency_order_with_lexicographic_ties():
    v = build_vocab(tiny_corpus())
    words = v.word_of[v.reserved_boundary:]
    # hotel x4, cheap x3 (user, belief, response), then singletons sorted
    assert words[0] == "hotel"
    assert words[1] == "cheap"
    assert words[2:] == sorted(words[2:])


def test_min_freq_prunes_to_unk():
    v = build_vocab(tiny_corpus(), min_freq=2)
    assert "hotel" in v and "cheap" in v
    assert "rare" not in v
    assert v.encode("rare") == [v.unk_id]


def test_empty_corpus_raises():
    with pytest.raises(EmptyCorpus):
        build_vocab([])


def test_special_round_trip_single_id():
    v = build_vocab(tiny_corpus())
    ids = v.encode("[db_2]")
    assert len(ids) == 1
    assert v.decode(ids) == "[db_2]"


def test_encode_decode_round_trip_in_vocab():
    v = build_vocab(tiny_corpus())
    text = "hotel cheap [hotel] <b> </b>"
    assert v.decode(v.encode(text)) == text


def test_encode_lowercases():
    v = build_vocab(tiny_corpus())
    assert v.encode("Hotel CHEAP") == v.encode("hotel cheap")


def test_empty_text_encodes_to_empty():
    v = build_vocab(tiny_corpus())
    assert v.encode("") == []
    assert v.decode([]) == ""


def test_encode_idempotent_through_decode():
    v = build_vocab(tiny_corpus())
    text = "hotel unseen cheap"
    once = v.encode(text)
    assert v.encode(v.decode(once)) == once


def test_deterministic_builds_share_hash():
    a = build_vocab(tiny_corpus())
    b = build_vocab(tiny_corpus())
    assert a.sha256() == b.sha256()
    assert a.word_of == b.word_of


def test_save_load_round_trip(tmp_path):
    v = build_vocab(tiny_corpus())
    path = tmp_path / "vocab.txt"
    v.save(path)
    loaded = Vocabulary.load(path)
    assert loaded.word_of == v.word_of
    assert loaded.sha256() == v.sha256()
    # file format: one token per line, line number = id
    lines = path.read_text().splitlines()
    assert lines[v.token_id("[db_2]")] == "[db_2]"
