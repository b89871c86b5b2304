#!/usr/bin/env python3
"""Serve the trained fixture model for end-to-end frontend tests.

Rebuilds the deterministic fixture corpus and vocabulary, reuses any cached
fixture checkpoint whose vocabulary hash matches (the pytest session fixture
caches one under the same directory), trains one otherwise, then starts the
chat service and prints ``READY <port>``.
"""

import argparse
import sys
import tempfile
import time
from pathlib import Path

from chitask import corpus, training
from chitask.db import DEFAULT_BUCKETS, EntityDatabase
from chitask.model import CheckpointMismatch, ModelConfig, TrainConfig, load_checkpoint, save_checkpoint
from chitask.pipeline import DialogueSystem
from chitask.vocab import build_vocab
from chitask import service

CACHE_DIR = Path(tempfile.gettempdir()) / "chitask-test-fixtures"
CORPUS_SEED = 7  # mirrors tests/conftest.py
TRAIN = dict(epochs=22, seed=4, chit_warmup_epochs=8, learning_rate=1.5e-3, batch_size=16)


def fixture_system():
    from importlib import resources
    files = resources.files("chitask.data")
    with resources.as_file(files / "entities.json") as p:
        database = EntityDatabase.load(p)
    ccfg = corpus.CorpusConfig(chit_count=100, tod_count=100, seed=CORPUS_SEED)
    with resources.as_file(files / "chit_train.txt") as p:
        mixed = corpus.build_mixed_corpus(p, database, ccfg)
    vocab = build_vocab(mixed)

    CACHE_DIR.mkdir(exist_ok=True)
    import hashlib
    import json
    import chitask
    data_hash = hashlib.sha256()
    for name in ("entities.json", "chit_train.txt"):
        data_hash.update((files / name).read_bytes())
    payload = json.dumps({"corpus_seed": CORPUS_SEED, "train": TRAIN,
                          "version": chitask.__version__,
                          "data": data_hash.hexdigest()}, sort_keys=True)
    key = hashlib.sha256(payload.encode()).hexdigest()[:16]
    ckpt = CACHE_DIR / f"fixture-{key}.ckpt"
    if ckpt.exists():
        model, _ = load_checkpoint(ckpt, expected_vocab_hash=vocab.sha256())
        print(f"reusing cached checkpoint {ckpt}", file=sys.stderr)
    else:
        print("training the fixture model (first run takes a few minutes)",
              file=sys.stderr)
        cfg = ModelConfig(vocab_size=len(vocab))
        started = time.time()
        result = training.fit(mixed, cfg, TrainConfig(**TRAIN), vocab, database)
        elapsed = time.time() - started
        model = result.model
        save_checkpoint(ckpt, model, vocab.sha256(), bucket_table=DEFAULT_BUCKETS)
        meta = CACHE_DIR / f"fixture-{key}.json"
        if not meta.exists():
            meta.write_text(json.dumps({"loss_history": result.loss_history,
                                        "train_seconds": elapsed,
                                        "best_epoch": result.best_epoch}))
    return DialogueSystem(model, vocab, database)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--port", type=int, default=0)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--static", default=None)
    args = parser.parse_args()
    system = fixture_system()
    server = service.make_server(system, host=args.host, port=args.port,
                                 static_dir=args.static)
    print(f"READY {server.server_address[1]}", flush=True)
    server.serve_forever()


if __name__ == "__main__":
    main()
