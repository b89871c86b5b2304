import numpy as np
import pytest

from chitask import corpus, schema
from chitask.db import EntityDatabase
from chitask.model import ModelConfig, TrainConfig, train
from chitask.pipeline import (DialogueSystem, SessionState, StageLimits, lexicalize,
                              trace_to_obj)
from chitask.vocab import build_vocab


def test_lexicalize_substitutes_first_match():
    text, unresolved = lexicalize("[value_name] is a nice hotel",
                                  [{"name": "alpha lodge"}, {"name": "beta house"}])
    assert text == "alpha lodge is a nice hotel"
    assert unresolved == ()


def test_lexicalize_no_matches_flags_placeholders():
    text, unresolved = lexicalize("call [value_phone] now", [])
    assert text == "call [value_phone] now"
    assert unresolved == ("[value_phone]",)


def test_lexicalize_plain_text_identity():
    text, unresolved = lexicalize("nothing to do here .", [{"name": "x"}])
    assert text == "nothing to do here ."
    assert unresolved == ()


def test_lexicalize_partial_resolution():
    text, unresolved = lexicalize("[value_name] at [value_phone]",
                                  [{"name": "alpha lodge"}])
    assert text == "alpha lodge at [value_phone]"
    assert unresolved == ("[value_phone]",)


@pytest.fixture(scope="module")
def tiny_system(default_db):
    """A deliberately under-trained system: exercises plumbing and repairs."""
    dialogues = corpus.generate_tod_corpus(default_db, 6, seed=2)
    vocab = build_vocab(dialogues)
    cfg = ModelConfig(vocab_size=len(vocab), layers=1, heads=2, embed_dim=16,
                      ffn_dim=32, max_seq_len=256, dropout=0.0)
    tc = TrainConfig(epochs=1, seed=0, chit_warmup_epochs=0)
    model = train(dialogues, cfg, tc, vocab).model
    return DialogueSystem(model, vocab, default_db)


def test_step_advances_state_and_fills_trace(tiny_system):
    state = SessionState()
    trace, new_state = tiny_system.step(state, "i am looking for a cheap hotel .")
    assert new_state.turn_index == 1
    assert state.turn_index == 0  # input state untouched
    assert trace.mode in ("chit", "task")
    assert trace.db_token in schema.DB_BUCKETS
    assert isinstance(trace.repairs, tuple)
    turn = new_state.turns[0]
    assert turn.user == "i am looking for a cheap hotel ."
    assert turn.belief == trace.belief
    assert turn.db == trace.db_token
    assert turn.act == trace.act


def test_db_token_always_matches_database(tiny_system, default_db):
    # the db module, not the model, owns the db token
    state = SessionState()
    for utterance in ("i am looking for a cheap hotel .",
                      "what is the phone number ?",
                      "does money buy happiness ?"):
        trace, state = tiny_system.step(state, utterance)
        try:
            expected = default_db.query(trace.belief).token
        except Exception:
            expected = schema.DB_NO_RESULT
        assert trace.db_token == expected


def test_identical_sessions_identical_traces(tiny_system):
    utterances = ["i am looking for a cheap hotel .", "what is the phone number ?"]
    def run():
        state = SessionState()
        out = []
        for u in utterances:
            trace, state = tiny_system.step(state, u)
            out.append(trace)
        return out
    assert run() == run()


def test_context_growth_one_turn_per_step(tiny_system):
    state = SessionState()
    for n, utterance in enumerate(["hello there .", "i want a cheap hotel .",
                                   "thank you , that is all ."], start=1):
        _, state = tiny_system.step(state, utterance)
        assert len(state.turns) == n
        assert [t.turn_index for t in state.turns] == list(range(n))


def test_user_text_normalized(tiny_system):
    trace, _ = tiny_system.step(SessionState(), "  I Am   LOOKING for a CHEAP hotel .  ")
    assert trace.user == "i am looking for a cheap hotel ."


def test_trace_to_obj_projection(tiny_system):
    trace, state = tiny_system.step(SessionState(), "i am looking for a cheap hotel .")
    obj = trace_to_obj(trace, turn_index=0)
    for key in ("user", "belief", "db_token", "act", "response_text",
                "lexicalized_text", "mode", "repairs", "turn_index"):
        assert key in obj
    assert obj["act"]["domain"] in schema.DOMAINS


def test_malformed_generation_triggers_repairs(default_db):
    # an untrained model babbles; the pipeline must never raise and must log repairs
    dialogues = corpus.generate_tod_corpus(default_db, 3, seed=8)
    vocab = build_vocab(dialogues)
    cfg = ModelConfig(vocab_size=len(vocab), layers=1, heads=2, embed_dim=8,
                      ffn_dim=16, max_seq_len=128, dropout=0.0)
    from chitask.model import TransformerLM
    system = DialogueSystem(TransformerLM(cfg, seed=1), vocab, default_db,
                            limits=StageLimits(belief_max_new=8, act_max_new=6,
                                               response_max_new=10))
    state = SessionState()
    for utterance in ("hello there .", "anything at all ."):
        trace, state = tiny_seen = system.step(state, utterance)
        trace, state = tiny_seen
        assert trace.mode in ("chit", "task")
    # turn 0 malformed belief falls back to the empty chit belief
    first = None
    system2 = DialogueSystem(TransformerLM(cfg, seed=1), vocab, default_db,
                             limits=StageLimits(belief_max_new=2, act_max_new=2,
                                                response_max_new=4))
    trace, _ = system2.step(SessionState(), "hello .")
    if "belief_malformed" in trace.repairs:
        assert trace.belief == schema.BeliefState.from_pairs([(schema.CHIT_DOMAIN, [])])


def test_belief_repair_reuses_previous_turn(default_db):
    # seed a session with a completed turn, then force a malformed belief
    dialogues = corpus.generate_tod_corpus(default_db, 3, seed=8)
    vocab = build_vocab(dialogues)
    cfg = ModelConfig(vocab_size=len(vocab), layers=1, heads=2, embed_dim=8,
                      ffn_dim=16, max_seq_len=128, dropout=0.0)
    from chitask.model import TransformerLM
    system = DialogueSystem(TransformerLM(cfg, seed=3), vocab, default_db,
                            limits=StageLimits(belief_max_new=2, act_max_new=4,
                                               response_max_new=6))
    prev_belief = schema.BeliefState.from_pairs([("hotel", {"price": "cheap"})])
    seeded = SessionState(turns=[schema.DialogueTurn(
        user="i want a cheap hotel .", belief=prev_belief, db="db_3",
        act=schema.SystemAct("hotel", "recommend", ("name",)),
        response="i recommend [value_name] .", turn_index=0)])
    trace, _ = system.step(seeded, "what is the phone number ?")
    if "belief_malformed" in trace.repairs:
        assert trace.belief == prev_belief
