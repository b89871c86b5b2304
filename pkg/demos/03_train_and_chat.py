#!/usr/bin/env python3
"""Watch training converge on a reduced recipe, then chat with the real model.

The first half trains a quick low-budget model just to show the mechanics
(loss curve, warmup phase); the conversation at the end uses the full-recipe
fixture model, which is trained once and cached (a few minutes on first use).
"""

import sys
import time
from importlib import resources
from pathlib import Path

from chitask import corpus, training
from chitask.db import EntityDatabase
from chitask.model import ModelConfig, TrainConfig
from chitask.pipeline import SessionState
from chitask.vocab import build_vocab

files = resources.files("chitask.data")
with resources.as_file(files / "entities.json") as p:
    database = EntityDatabase.load(p)
ccfg = corpus.CorpusConfig(chit_count=50, tod_count=50, seed=7)
with resources.as_file(files / "chit_train.txt") as p:
    mixed = corpus.build_mixed_corpus(p, database, ccfg)
vocab = build_vocab(mixed)
print(f"corpus: {len(mixed)} dialogues, vocab {len(vocab)} tokens")

print("\n== a quick reduced-budget training run (mechanics only) ==")
model_cfg = ModelConfig(vocab_size=len(vocab))
train_cfg = TrainConfig(epochs=6, chit_warmup_epochs=3)
t0 = time.time()
result = training.fit(mixed, model_cfg, train_cfg, vocab, database,
                      selection=None, log=lambda m: print(f"  {m}"))
print(f"trained in {time.time() - t0:.0f}s; "
      f"loss {result.loss_history[0]:.3f} -> {result.loss_history[-1]:.3f}")

print("\n== conversation with the full-recipe fixture model ==")
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tools"))
from fixture_service import fixture_system

system = fixture_system()
state = SessionState()
script = [
    "does money buy happiness ?",
    "i am looking for a cheap hotel .",
    "i would like something in the west .",
    "what is the phone number ?",
    "thank you , that is all .",
]
for utterance in script:
    trace, state = system.step(state, utterance)
    print(f"you>  {utterance}")
    print(f"bot>  [{trace.mode}] {trace.lexicalized}")
    print(f"      belief: {trace.belief.serialize() or '(empty)'}  db: {trace.db_token}"
          + (f"  repairs: {','.join(trace.repairs)}" if trace.repairs else ""))
