#!/usr/bin/env python3
"""Build the mixed training corpus from the bundled fixtures.

Chit-chat dialogues come from plain-text fixtures run through the four
cleaning rules; task dialogues come from the template generator, which is
self-consistent by construction: its own gold turns score Inform = Success
= 100%.
"""

from importlib import resources

from chitask import corpus, evaluation, schema
from chitask.db import EntityDatabase

files = resources.files("chitask.data")
with resources.as_file(files / "entities.json") as p:
    database = EntityDatabase.load(p)

print("== the four chit-chat cleaning rules ==")
cfg = corpus.CorpusConfig(chit_count=40, tod_count=40, seed=11)
samples = [
    ["check https://example.org please", "no thanks ."],
    ["hm", "one word is too short .", "more words here .", "and here too ."],
    ["this got [removed] sadly", "a shame .", "indeed it is .", "yes truly ."],
    ["too short a dialogue .", "agreed completely ."],
    ["what music do you enjoy ?", "quiet jazz mostly .",
     "do you like rainy days ?", "rain earns the reading ."],
]
for dialogue in samples:
    decision = corpus.filter_chit(dialogue, cfg)
    verdict = "keep" if decision.keep else f"reject ({decision.reason})"
    print(f"  {verdict:28s} <- {dialogue[0][:40]!r}")

print("\n== noun-slot chit beliefs (the unified schema's chit side) ==")
for utterance in ("does money buy happiness ?", "what music do you enjoy ?"):
    belief = corpus.extract_chit_belief(utterance)
    print(f"  {utterance!r} -> {belief.serialize()}")
print("  ablation (chit beliefs disabled):",
      corpus.extract_chit_belief("does money buy happiness ?", enabled=False).serialize())

print("\n== synthetic task dialogues are goal-consistent ==")
tod = corpus.generate_tod_corpus(database, 30, seed=5)
outcomes = [evaluation.gold_outcomes(d, database) for d in tod]
inform, success = evaluation.inform_success(outcomes)
print(f"  gold self-consistency over {len(tod)} dialogues: "
      f"inform={inform:.0f} success={success:.0f}")
example = tod[0]
print(f"  goal: {example.goal.constraints} requested={example.goal.requested}")
for turn in example.turns:
    print(f"    [{turn.db}] {turn.act.serialize():38s} | {turn.user}")

print("\n== dialogue-level mixing ==")
with resources.as_file(files / "chit_train.txt") as p:
    mixed = corpus.build_mixed_corpus(p, database, cfg)
kinds = [d.source for d in mixed]
print(f"  {len(mixed)} dialogues, first ten sources: {kinds[:10]}")
schema.save_dialogues("/tmp/chitask-demo-corpus.jsonl", mixed)
print("  wrote /tmp/chitask-demo-corpus.jsonl (canonical one-dialogue-per-line format)")
