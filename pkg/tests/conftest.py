import hashlib
import json
import os
import random
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import pytest

from chitask import corpus, schema
from chitask.db import DEFAULT_BUCKETS, EntityDatabase
from chitask.schema import BeliefState, Dialogue, DialogueTurn, SystemAct

CHIT_WORDS = ["money", "happiness", "music", "jazz", "rain", "books", "coffee",
              "dreams", "cats", "puns", "autumn", "guitar", "poetry", "ocean"]

VALUE_POOL = {
    "price": ["cheap", "moderate", "expensive"],
    "area": ["north", "south", "east", "west", "centre"],
    "stars": ["2", "3", "4", "5"],
    "food": ["chinese", "italian", "indian", "british"],
    "type": ["museum", "park", "cinema"],
    "departure": ["cambridge", "london", "norwich", "ely"],
    "destination": ["cambridge", "london", "norwich", "ely"],
    "day": ["monday", "friday", "sunday"],
    "leave": ["09:00", "12:30", "18:15"],
    "arrive": ["10:00", "13:30"],
    "parking": ["yes", "no"],
    "department": ["acute medicine"],
}
WORD_POOL = ["please", "thanks", "looking", "nice", "great", "town", "something",
             "hello", "sure", "maybe", "okay", "wonderful", "question", "answer"]


def random_belief(rng: random.Random) -> BeliefState:
    entries = []
    n = rng.randint(0, 3)
    domains = rng.sample(schema.DOMAINS, n) if n else []
    for dom in domains:
        if dom == schema.CHIT_DOMAIN:
            slots = rng.sample(CHIT_WORDS, rng.randint(0, 4))
            entries.append((dom, slots))
        else:
            names = rng.sample(schema.SLOT_REGISTRY[dom], rng.randint(1, 3))
            picked = {}
            for s in names:
                pool = VALUE_POOL.get(s)
                picked[s] = rng.choice(pool) if pool and rng.random() < 0.8 else ""
            entries.append((dom, picked))
    return BeliefState.from_pairs(entries)


def random_act(rng: random.Random) -> SystemAct:
    if rng.random() < 0.25:
        return schema.CHIT_ACT
    dom = rng.choice(schema.TOD_DOMAINS)
    act_type = rng.choice([a for a in schema.ACT_TYPES if a != "chit_act"])
    slots = tuple(rng.sample(schema.SLOT_REGISTRY[dom], rng.randint(0, 2)))
    return SystemAct(dom, act_type, slots)


def random_turn(rng: random.Random, turn_index: int = 0) -> DialogueTurn:
    user = " ".join(rng.sample(WORD_POOL, rng.randint(0, 6)))
    response = " ".join(rng.sample(WORD_POOL, rng.randint(0, 6)))
    return DialogueTurn(
        user=user,
        belief=random_belief(rng),
        db=rng.choice(schema.DB_BUCKETS),
        act=random_act(rng),
        response=response,
        turn_index=turn_index,
    )


@pytest.fixture(scope="session")
def toy_db() -> EntityDatabase:
    return EntityDatabase({
        "hotel": [
            {"name": "alpha lodge", "price": "cheap", "area": "west", "stars": "3"},
            {"name": "beta house", "price": "cheap", "area": "east", "stars": "4"},
            {"name": "gamma inn", "price": "expensive", "area": "west", "stars": "5"},
            {"name": "delta villa", "price": "cheap", "area": "west", "stars": "2"},
        ],
        "restaurant": [
            {"name": "golden bowl", "food": "chinese", "price": "cheap", "area": "centre"},
            {"name": "river spice", "food": "indian", "price": "moderate", "area": "north"},
        ],
    })


@pytest.fixture(scope="session")
def default_db() -> EntityDatabase:
    from importlib import resources
    with resources.as_file(resources.files("chitask.data") / "entities.json") as p:
        return EntityDatabase.load(p)


@pytest.fixture(scope="session")
def chit_fixture_path():
    from importlib import resources
    with resources.as_file(resources.files("chitask.data") / "chit_train.txt") as p:
        yield p


# --- the fixture model: default tiny config trained on the 200-dialogue corpus ---

FIXTURE_CORPUS_SEED = 7
FIXTURE_TRAIN = dict(epochs=22, seed=4, chit_warmup_epochs=8,
                     learning_rate=1.5e-3, batch_size=16)


@dataclass
class FixtureSystem:
    system: object
    vocab: object
    database_full: EntityDatabase
    heldout_chit: list
    loss_history: list
    train_seconds: float
    epochs_used: int
    checkpoint_path: Path = None


def _fixture_cache_key() -> str:
    import chitask
    from importlib import resources
    files = resources.files("chitask.data")
    data_hash = hashlib.sha256()
    for name in ("entities.json", "chit_train.txt"):
        data_hash.update((files / name).read_bytes())
    payload = json.dumps({"corpus_seed": FIXTURE_CORPUS_SEED, "train": FIXTURE_TRAIN,
                          "version": chitask.__version__,
                          "data": data_hash.hexdigest()}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


@pytest.fixture(scope="session")
def fixture_system(default_db, chit_fixture_path):
    """Train (or reload) the shared fixture model used by the learning gates.

    The checkpoint is cached under the system temp dir keyed by the recipe, so
    repeated local runs skip retraining; delete the cache for a fresh timing.
    """
    from chitask import training
    from chitask.model import ModelConfig, TrainConfig, load_checkpoint, save_checkpoint
    from chitask.pipeline import DialogueSystem
    from chitask.vocab import Vocabulary, build_vocab

    ccfg = corpus.CorpusConfig(chit_count=100, tod_count=100, seed=FIXTURE_CORPUS_SEED)
    mixed = corpus.build_mixed_corpus(chit_fixture_path, default_db, ccfg)
    vocab = build_vocab(mixed)
    hc = corpus.CorpusConfig(chit_count=40, tod_count=10, seed=9)
    from importlib import resources
    with resources.as_file(resources.files("chitask.data") / "chit_heldout.txt") as p:
        heldout_chit = corpus.load_chit_corpus(p, hc)[:40]

    cache_dir = Path(tempfile.gettempdir()) / "chitask-test-fixtures"
    cache_dir.mkdir(exist_ok=True)
    ckpt = cache_dir / f"fixture-{_fixture_cache_key()}.ckpt"
    meta_path = cache_dir / f"fixture-{_fixture_cache_key()}.json"

    tc = TrainConfig(**FIXTURE_TRAIN)
    if ckpt.exists() and meta_path.exists():
        model, header = load_checkpoint(ckpt, expected_vocab_hash=vocab.sha256())
        meta = json.loads(meta_path.read_text())
    else:
        mc = ModelConfig(vocab_size=len(vocab))
        started = time.time()
        result = training.fit(mixed, mc, tc, vocab, default_db)
        elapsed = time.time() - started
        model = result.model
        meta = {"loss_history": result.loss_history, "train_seconds": elapsed,
                "best_epoch": result.best_epoch}
        save_checkpoint(ckpt, model, vocab.sha256(), train_cfg=tc,
                        bucket_table=DEFAULT_BUCKETS)
        meta_path.write_text(json.dumps(meta))

    system = DialogueSystem(model, vocab, default_db)
    return FixtureSystem(
        system=system, vocab=vocab, database_full=default_db,
        heldout_chit=heldout_chit, loss_history=meta["loss_history"],
        train_seconds=meta["train_seconds"],
        epochs_used=tc.epochs + tc.chit_warmup_epochs,
        checkpoint_path=ckpt,
    )
