"""Flattening dialogues into supervised training sequences.

One example per (dialogue, turn): the serialized context through turn t with
loss on the final turn's belief/db/act/response segments (end markers included,
begin markers excluded — those are injected, never generated, at inference).
Act-segment content tokens of configured act types carry the recommendation
weight; sequences longer than the model window are truncated from the head.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import schema
from ..schema import DEFAULT_MARKERS, Dialogue, SegmentMarkers
from ..vocab import Vocabulary
from .config import TrainConfig


@dataclass
class TokenSequence:
    ids: np.ndarray        # int64 (N,)
    weights: np.ndarray    # float32 (N,)
    loss_mask: np.ndarray  # bool (N,)

    def __len__(self) -> int:
        return int(self.ids.shape[0])


def _segment(tokens, begin, end, supervised, weight=1.0, content_weight=None):
    """Yield (token, weight, mask) triples for one marker-wrapped segment."""
    out = [(begin, 1.0, False)]
    w = weight if content_weight is None else content_weight
    out.extend((tok, w, supervised) for tok in tokens)
    out.append((end, 1.0, supervised))
    return out


def build_training_sequence(dialogue: Dialogue, up_to_turn: int, vocab: Vocabulary,
                            max_seq_len: int, cfg: TrainConfig,
                            markers: SegmentMarkers = DEFAULT_MARKERS) -> TokenSequence:
    if not 0 <= up_to_turn < len(dialogue.turns):
        raise IndexError(f"turn {up_to_turn} out of range for {len(dialogue.turns)} turns")
    triples: list[tuple[str, float, bool]] = [(markers.start, 1.0, False)]
    for t, turn in enumerate(dialogue.turns[: up_to_turn + 1]):
        final = t == up_to_turn
        act_w = cfg.recommend_weight if turn.act.act_type in cfg.weighted_act_types else 1.0
        triples += _segment(turn.user.lower().split(), *markers.user, supervised=False)
        triples += _segment(turn.belief.serialize().split(), *markers.belief, supervised=final)
        triples += _segment([schema.DB_TOKENS.get(turn.db, schema.bracketed(turn.db))],
                            *markers.db, supervised=final)
        triples += _segment(turn.act.serialize().split(), *markers.act, supervised=final,
                            content_weight=act_w)
        triples += _segment(turn.response.lower().split(), *markers.response, supervised=final)

    if len(triples) > max_seq_len:
        triples = triples[-max_seq_len:]
    unk = vocab.unk_id
    ids = np.array([vocab.id_of.get(tok, unk) for tok, _, _ in triples], dtype=np.int64)
    weights = np.array([w for _, w, _ in triples], dtype=np.float32)
    mask = np.array([m for _, _, m in triples], dtype=bool)
    if cfg.supervise_context:
        mask[:] = True  # full-sequence supervision, every token of the flat stream
    mask[0] = False
    return TokenSequence(ids, weights, mask)


def pad_batch(sequences: list[TokenSequence], pad_id: int = 0):
    """Right-pad a list of sequences into (B, T) arrays; pads carry no loss."""
    width = max(len(s) for s in sequences)
    B = len(sequences)
    ids = np.full((B, width), pad_id, dtype=np.int64)
    weights = np.ones((B, width), dtype=np.float32)
    mask = np.zeros((B, width), dtype=bool)
    for r, s in enumerate(sequences):
        n = len(s)
        ids[r, :n] = s.ids
        weights[r, :n] = s.weights
        mask[r, :n] = s.loss_mask
    return ids, weights, mask
