import json
import random
from collections import Counter
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chitask import corpus, evaluation, schema
from chitask.corpus import (CLOSED_CLASS_WORDS, CorpusConfig, extract_chit_belief,
                            filter_chit, generate_tod_corpus, load_chit_corpus,
                            mix_corpora, read_chit_fixture)
from chitask.schema import BeliefState

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture()
def cfg():
    return CorpusConfig(chit_count=5, tod_count=5, seed=0)


def test_url_rejection(cfg):
    d = ["see https://x.y for details", "i would rather not .", "ok then .", "fine ."]
    decision = filter_chit(d, cfg)
    assert not decision.keep and decision.reason == "url"


def test_clean_dialogue_kept(cfg):
    d = ["one two three four five .", "six seven eight nine ten .",
         "are we done yet now ?", "yes we are done now ."]
    assert filter_chit(d, cfg).keep


def test_too_few_utterances(cfg):
    d = ["hello there friend .", "hello to you .", "bye now ."]
    decision = filter_chit(d, cfg)
    assert not decision.keep and decision.reason == "too_few_utterances"


def test_length_bounds(cfg):
    long = [" ".join(["w"] * 201), "fine .", "sure thing .", "done now ."]
    short = ["hi", "fine .", "sure thing .", "done now ."]
    assert filter_chit(long, cfg).reason == "utterance_length"
    assert filter_chit(short, cfg).reason == "utterance_length"


def test_removed_deleted_tokens(cfg):
    d = ["this is [removed] text", "why though .", "no idea .", "same here ."]
    assert filter_chit(d, cfg).reason == "removed_or_deleted"
    d2 = ["this is [deleted] text", "why though .", "no idea .", "same here ."]
    assert filter_chit(d2, cfg).reason == "removed_or_deleted"


def test_first_matching_rule_wins(cfg):
    # url outranks removed/deleted and the utterance count
    d = ["https://a.b and [removed] too", "hm"]
    assert filter_chit(d, cfg).reason == "url"
    # length outranks removed/deleted
    d2 = ["hm", "[deleted] content here .", "more text here .", "and more here ."]
    assert filter_chit(d2, cfg).reason == "utterance_length"


def test_filter_fixture_full_agreement(cfg):
    dialogues = read_chit_fixture(FIXTURES / "filter_fixture.txt")
    labels = json.loads((FIXTURES / "filter_labels.json").read_text())
    assert len(dialogues) == len(labels) == 50
    seen_reasons = set()
    for label in labels:
        decision = filter_chit(dialogues[label["index"]], cfg)
        assert decision.keep == label["keep"], f"dialogue {label['index']}"
        assert decision.reason == label["reason"], f"dialogue {label['index']}"
        seen_reasons.add(label["reason"])
    assert seen_reasons == {None, "url", "utterance_length", "removed_or_deleted",
                            "too_few_utterances"}


def test_extract_chit_belief_paper_example():
    belief = extract_chit_belief("does money buy happiness ?")
    assert belief == BeliefState.from_pairs([("chit", ["money", "happiness"])])


def test_extract_chit_belief_empty_utterance():
    assert extract_chit_belief("") == BeliefState.from_pairs([("chit", [])])


def test_extract_chit_belief_disabled_ablation():
    belief = extract_chit_belief("does money buy happiness ?", enabled=False)
    assert belief == BeliefState.from_pairs([("chit", [])])


def test_extract_dedupes_and_keeps_order():
    belief = extract_chit_belief("money money jazz money happiness")
    assert [s for s, _ in belief.entries[0].slots] == ["money", "jazz", "happiness"]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from(sorted(CLOSED_CLASS_WORDS)[:80] +
                                ["music", "ocean", "pancakes"]), max_size=12))
def test_extract_never_emits_closed_class(words):
    belief = extract_chit_belief(" ".join(words))
    for slot, value in belief.entries[0].slots:
        assert slot not in CLOSED_CLASS_WORDS
        assert value == ""


def test_chit_to_dialogue_pairs_and_drops_odd(cfg):
    utterances = ["does money buy happiness ?", "depends on the money .",
                  "what about jazz ?", "jazz is money for ears .", "left over"]
    d = corpus.chit_to_dialogue(utterances)
    assert len(d.turns) == 2
    assert d.source == "chit"
    for i, turn in enumerate(d.turns):
        assert turn.turn_index == i
        assert turn.db == schema.DB_NO_RESULT
        assert turn.act == schema.CHIT_ACT


def test_generate_tod_deterministic(default_db):
    a = generate_tod_corpus(default_db, 8, seed=42)
    b = generate_tod_corpus(default_db, 8, seed=42)
    assert a == b
    c = generate_tod_corpus(default_db, 8, seed=43)
    assert c != a


def test_generate_tod_count_zero(default_db):
    assert generate_tod_corpus(default_db, 0, seed=1) == []


def test_generated_corpus_self_consistent(default_db):
    dialogues = generate_tod_corpus(default_db, 40, seed=7)
    outcomes = [evaluation.gold_outcomes(d, default_db) for d in dialogues]
    inform, success = evaluation.inform_success(outcomes)
    assert inform == 100.0
    assert success == 100.0


def test_generated_goals_are_tod_only(default_db):
    for d in generate_tod_corpus(default_db, 20, seed=3):
        assert d.source == "tod"
        assert d.goal is not None
        for dom in d.goal.constraints:
            assert dom in schema.TOD_DOMAINS
        for i, turn in enumerate(d.turns):
            assert turn.turn_index == i


def test_mix_corpora_permutation(default_db, chit_fixture_path):
    cfg = CorpusConfig(chit_count=4, tod_count=4, seed=0)
    chit = load_chit_corpus(chit_fixture_path, cfg)[:4]
    tod = generate_tod_corpus(default_db, 4, seed=0)
    mixed = mix_corpora(chit, tod, seed=5)
    assert len(mixed) == 8
    key = lambda d: json.dumps(schema.dialogue_to_obj(d), sort_keys=True)
    assert Counter(map(key, mixed)) == Counter(map(key, chit + tod))
    assert mix_corpora(chit, tod, seed=5) == mixed
    assert mix_corpora(chit, tod, seed=6) != mixed


def test_mix_corpora_requires_nonempty(default_db):
    tod = generate_tod_corpus(default_db, 2, seed=0)
    with pytest.raises(ValueError):
        mix_corpora([], tod, seed=1)


def test_build_mixed_corpus_equal_counts(default_db, chit_fixture_path):
    cfg = CorpusConfig(chit_count=20, tod_count=20, seed=11)
    mixed = corpus.build_mixed_corpus(chit_fixture_path, default_db, cfg)
    counts = Counter(d.source for d in mixed)
    assert counts == {"chit": 20, "tod": 20}


def test_corpus_config_validation():
    with pytest.raises(ValueError):
        CorpusConfig(chit_count=0, tod_count=5, seed=0)
    with pytest.raises(ValueError):
        CorpusConfig(chit_count=5, tod_count=5, seed=0,
                     min_utterance_words=300, max_utterance_words=200)
