"""chitask: one autoregressive dialogue model for both chatting and tasks.

A unified turn schema (user, belief, db result, act, response) lets chit-chat
and task-oriented dialogues share one training stream; a weighted cross-entropy
loss sharpens entity recommendation; evaluation, mode-switching and robustness
harnesses measure the result.
"""

from . import corpus, db, evaluation, harness, pipeline, schema, vocab
from .db import BucketTable, EntityDatabase
from .model import ModelConfig, TrainConfig, TransformerLM
from .pipeline import DialogueSystem, SessionState
from .schema import BeliefState, Dialogue, DialogueTurn, SystemAct, TaskGoal
from .vocab import Vocabulary, build_vocab

__version__ = "0.1.0"

__all__ = [
    "corpus", "db", "evaluation", "harness", "pipeline", "schema", "vocab",
    "BucketTable", "EntityDatabase", "ModelConfig", "TrainConfig", "TransformerLM",
    "DialogueSystem", "SessionState",
    "BeliefState", "Dialogue", "DialogueTurn", "SystemAct", "TaskGoal",
    "Vocabulary", "build_vocab", "__version__",
]
