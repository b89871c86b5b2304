#!/usr/bin/env python3
"""The evaluation metrics on worked examples.

Inform/Success score task completion against the dialogue goal; BLEU and
distinct-n score surface quality and diversity; the combined score is
(Inform + Success) * 0.5 + BLEU.
"""

from chitask.evaluation import (DialogueOutcome, TurnOutcome, avg_len, bleu,
                                combined, distinct_n, inform_success)
from chitask.schema import SystemAct, TaskGoal

print("== corpus BLEU-4 with smoothing and brevity penalty ==")
cands = ["the cat sat on the mat", "a quick brown fox jumps high"]
refs = ["the cat is on the mat", "a fast brown fox leaps high"]
print(f"  bleu(two-sentence fixture) = {bleu(cands, refs):.2f}")
print(f"  perfect match              = {bleu(refs, refs):.2f}")
print(f"  disjoint vocabulary        = {bleu(['aa bb'], ['cc dd']):.2f}")

print("\n== distinct-n diversity ==")
print(f"  distinct-1 of 'a a a a'      = {distinct_n(['a a a a'], 1):.1f}")
print(f"  distinct-2 of repeated pairs = {distinct_n(['a b', 'a b'], 2):.1f}")
print(f"  avg response length          = {avg_len(['a b c', 'd e']):.1f}")

print("\n== inform and success against a goal ==")
goal = TaskGoal(constraints={"hotel": {"price": "cheap"}},
                requested={"hotel": ("phone",)})
entity = {"name": "alpha lodge", "price": "cheap", "phone": "01223000111"}
good = DialogueOutcome(goal=goal, turns=[
    TurnOutcome("i recommend [value_name] .",
                SystemAct("hotel", "recommend", ("name",)), [entity]),
    TurnOutcome("the phone number is [value_phone] .",
                SystemAct("hotel", "inform", ("phone",)), [entity]),
])
wrong_entity = DialogueOutcome(goal=goal, turns=[
    TurnOutcome("i recommend [value_name] .",
                SystemAct("hotel", "recommend", ("name",)),
                [{"name": "gamma inn", "price": "expensive"}]),
])
silent_phone = DialogueOutcome(goal=goal, turns=[
    TurnOutcome("i recommend [value_name] .",
                SystemAct("hotel", "recommend", ("name",)), [entity]),
    TurnOutcome("it is lovely .", SystemAct("hotel", "inform", ()), [entity]),
])
for label, outcome in (("satisfies goal + answers phone", good),
                       ("offers a wrong entity", wrong_entity),
                       ("never surfaces [value_phone]", silent_phone)):
    inform, success = inform_success([outcome])
    print(f"  {label:32s} inform={inform:5.1f} success={success:5.1f}")

print("\n== the combined score is exactly (inform + success) * 0.5 + bleu ==")
print(f"  combined(90.30, 80.50, 18.72) = {combined(90.30, 80.50, 18.72):.2f}")
print(f"  combined(88.70, 78.40, 16.60) = {combined(88.70, 78.40, 16.60):.2f}")
