#!/usr/bin/env python3
"""Tour of the unified turn schema.

Chit-chat and task-oriented turns share the same five segments (user, belief,
db result, act, response), so both serialize into one flat token stream and
parse back losslessly.
"""

from chitask.schema import (CHIT_ACT, BeliefState, DialogueTurn, SystemAct,
                            classify_response_type, parse_segment, parse_turn,
                            serialize_turn)

print("== a task-oriented turn ==")
tod = DialogueTurn(
    user="i am looking for a cheap hotel .",
    belief=BeliefState.from_pairs([("hotel", {"price": "cheap"})]),
    db="db_2",
    act=SystemAct("hotel", "request", ("area",)),
    response="do you have a specific area you want to stay in ?",
)
print(serialize_turn(tod))

print("\n== a chit-chat turn uses the same segments ==")
chit = DialogueTurn(
    user="does money buy happiness ?",
    belief=BeliefState.from_pairs([("chit", ["money", "happiness"])]),
    db="db_nore",
    act=CHIT_ACT,
    response="depends on how much money you spend on it .",
)
print(serialize_turn(chit))

print("\n== serialization round-trips exactly ==")
for turn in (tod, chit):
    parsed, valid = parse_turn(serialize_turn(turn))
    print(f"round-trip ok={parsed == turn} valid={valid} "
          f"mode={classify_response_type(parsed.act)}")

print("\n== parsing model output is defensive, not brittle ==")
belief, valid = parse_segment("[hotel] price cheap area west", "belief")
print(f"parsed constraints: {belief.constraints_for('hotel')} (valid={valid})")
belief, valid = parse_segment("[hotel] sparkly cheap", "belief")
print(f"unknown tokens retained verbatim: {belief.entries[0].slots} (valid={valid})")
try:
    parse_segment("price cheap", "belief")
except Exception as exc:
    print(f"no opening domain token -> {type(exc).__name__}: {exc}")
