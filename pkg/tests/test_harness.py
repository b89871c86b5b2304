import random

import pytest

from chitask import harness, schema
from chitask.corpus import generate_tod_corpus
from chitask.harness import (NoiseSetup, SwitchSetup, build_switch_setups,
                             inject_noise, switch_eval, switch_positions_to_rates)
from chitask.pipeline import GenerationTrace, SessionState
from chitask.schema import CHIT_ACT, BeliefState, Dialogue, DialogueTurn, SystemAct


class ScriptedAgent:
    """Deterministic stand-in for the pipeline: switches mode at a fixed body turn."""

    def __init__(self, body_type: str, switch_at: int):
        self.body_type = body_type
        self.switch_at = switch_at
        self.seen = 0

    def step(self, state: SessionState, user: str):
        self.seen += 1
        switched = self.seen >= self.switch_at
        want_chit = (self.body_type == "chit") == switched
        act = CHIT_ACT if want_chit else SystemAct("hotel", "inform", ("phone",))
        response = "the phone number is [value_phone] ." if act.act_type == "inform" \
            else "how lovely ."
        trace = GenerationTrace(
            user=user, raw_belief_text="", belief=BeliefState(), db_token="db_nore",
            matches=[{"name": "alpha lodge", "price": "cheap", "phone": "123"}],
            raw_act_text=act.serialize(), act=act, response=response,
            lexicalized=response, mode=schema.classify_response_type(act),
        )
        turn = DialogueTurn(user, trace.belief, trace.db_token, act, response,
                            state.turn_index)
        return trace, SessionState(turns=state.turns + [turn])


def chit_pool(n=6):
    dialogues = []
    for i in range(n):
        turns = [
            DialogueTurn(f"does money buy happiness {i} ?",
                         BeliefState.from_pairs([("chit", ["money"])]),
                         "db_nore", CHIT_ACT, "depends on the money .", 0),
            DialogueTurn("what music do you enjoy ?",
                         BeliefState.from_pairs([("chit", ["music"])]),
                         "db_nore", CHIT_ACT, "quiet jazz mostly .", 1),
            DialogueTurn("do you like rainy days ?",
                         BeliefState.from_pairs([("chit", ["rainy", "days"])]),
                         "db_nore", CHIT_ACT, "rain earns the reading .", 2),
        ]
        dialogues.append(Dialogue(turns=turns, source="chit"))
    return dialogues


@pytest.fixture(scope="module")
def pools(default_db):
    return chit_pool(), generate_tod_corpus(default_db, 12, seed=31)


def fresh_agent_eval(setups, body_type, switch_at, n_values=(1, 2)):
    # one scripted agent per setup: the switch counter is per conversation
    positions = []
    for setup in setups:
        report = switch_eval([setup], ScriptedAgent(body_type, switch_at), n_values)
        positions.extend(report.switch_positions)
    return switch_positions_to_rates(positions, n_values)


def test_scripted_agent_switches_exactly_at_two(pools):
    chit, tod = pools
    for direction, body_type in (("chit-first", "tod"), ("tod-first", "chit")):
        setups = build_switch_setups(chit, tod, direction, count=10, seed=1)
        rates = fresh_agent_eval(setups, body_type, switch_at=2)
        assert rates[1] == 0.0
        assert rates[2] == 100.0


def test_switch_rates_monotone_on_randomized_positions():
    rng = random.Random(9)
    positions = [rng.choice([1, 2, 3, 4, None]) for _ in range(1000)]
    rates = switch_positions_to_rates(positions, n_values=(1, 2, 3, 4, 5))
    values = [rates[n] for n in (1, 2, 3, 4, 5)]
    assert all(a <= b for a, b in zip(values, values[1:]))
    assert all(0.0 <= v <= 100.0 for v in values)


def test_table4_identity_switch2_decomposition():
    # switch-2 equals switch-1 plus the exactly-at-turn-2 rate
    assert 65.8 + 33.7 == pytest.approx(99.5, abs=1e-9)
    rng = random.Random(4)
    positions = [rng.choice([1, 2, 3, None]) for _ in range(400)]
    rates = switch_positions_to_rates(positions, n_values=(1, 2))
    exactly_two = 100.0 * sum(1 for p in positions if p == 2) / len(positions)
    assert rates[2] == pytest.approx(rates[1] + exactly_two, abs=1e-9)


def test_always_chit_agent_degenerate_rates(pools):
    chit, tod = pools
    tod_setups = build_switch_setups(chit, tod, "chit-first", count=8, seed=2)
    chit_setups = build_switch_setups(chit, tod, "tod-first", count=8, seed=3)
    # an agent that always answers [chit] [chit_act]
    always_chit = lambda: ScriptedAgent("chit", switch_at=0)
    rates_chit_body = fresh_agent_eval(chit_setups, "chit", 0)
    assert rates_chit_body[1] == rates_chit_body[2] == 100.0
    # for tod bodies the same agent never matches
    positions = []
    for setup in tod_setups:
        agent = ScriptedAgent("tod", switch_at=10**9)
        report = switch_eval([setup], agent)
        positions.extend(report.switch_positions)
    rates = switch_positions_to_rates(positions, (1, 2))
    assert rates[1] == rates[2] == 0.0


def test_setups_pair_types_correctly(pools):
    chit, tod = pools
    for direction, ptype, btype in (("chit-first", "chit", "tod"),
                                    ("tod-first", "tod", "chit")):
        for s in build_switch_setups(chit, tod, direction, count=5, seed=4):
            assert s.prefix_type == ptype and s.body_type == btype
            assert len(s.prefix_turns) == 2
            assert [t.turn_index for t in s.prefix_turns] == [0, 1]
            src = chit if ptype == "chit" else tod
            assert s.body.source == ("tod" if btype == "tod" else "chit")


def test_post_switch_scores_present(pools):
    chit, tod = pools
    setups = build_switch_setups(chit, tod, "chit-first", count=6, seed=5)
    positions_report = switch_eval(setups, ScriptedAgent("tod", 1))
    assert positions_report.post_switch_tod is not None
    assert positions_report.post_switch_chit is None
    scores = positions_report.post_switch_tod
    assert 0.0 <= scores.success <= scores.inform <= 100.0
    assert scores.combined == pytest.approx((scores.inform + scores.success) * 0.5 + scores.bleu)
    chit_report = switch_eval(build_switch_setups(chit, tod, "tod-first", count=6, seed=6),
                              ScriptedAgent("chit", 1))
    assert chit_report.post_switch_chit is not None
    assert chit_report.post_switch_tod is None


def test_inject_noise_identity_at_zero(pools):
    chit, tod = pools
    out = inject_noise(tod, NoiseSetup(0, chit), seed=3)
    assert out == tod
    assert out is not tod


def test_inject_noise_splice_law(pools):
    chit, tod = pools
    for turns in (1, 2):
        out = inject_noise(tod, NoiseSetup(turns, chit), seed=5)
        for before, after in zip(tod, out):
            assert len(after.turns) == len(before.turns) + turns
            assert after.noise_turns == tuple(range(after.noise_turns[0],
                                                    after.noise_turns[0] + turns))
            kept = [t for i, t in enumerate(after.turns) if i not in after.noise_turns]
            stripped = [(t.user, t.belief, t.db, t.act, t.response) for t in kept]
            original = [(t.user, t.belief, t.db, t.act, t.response) for t in before.turns]
            assert stripped == original
            assert after.goal == before.goal
            assert [t.turn_index for t in after.turns] == list(range(len(after.turns)))
            inserted = [after.turns[i] for i in after.noise_turns]
            assert all(t.act == CHIT_ACT for t in inserted)


def test_inject_noise_deterministic(pools):
    chit, tod = pools
    a = inject_noise(tod, NoiseSetup(1, chit), seed=6)
    b = inject_noise(tod, NoiseSetup(1, chit), seed=6)
    c = inject_noise(tod, NoiseSetup(1, chit), seed=7)
    assert a == b
    assert a != c


def test_inject_noise_requires_long_enough_pool(pools):
    _, tod = pools
    short = [Dialogue(turns=chit_pool(1)[0].turns[:1], source="chit")]
    with pytest.raises(ValueError):
        inject_noise(tod, NoiseSetup(2, short), seed=0)
