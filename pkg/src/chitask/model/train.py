"""Training loop: one supervised example per (dialogue, turn), seeded end to end."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..vocab import Vocabulary
from .config import ModelConfig, TrainConfig
from .net import TransformerLM
from .optim import AdamW, clip_grad_norm
from .sequences import TokenSequence, build_training_sequence, pad_batch


class DivergedLoss(RuntimeError):
    """Loss went non-finite; carries the last epoch-end parameter snapshot."""

    def __init__(self, message: str, model: TransformerLM, history: list[float]):
        super().__init__(message)
        self.model = model
        self.history = history


@dataclass
class TrainResult:
    model: TransformerLM
    loss_history: list[float] = field(default_factory=list)
    examples: int = 0


def build_examples(dialogues, vocab: Vocabulary, max_seq_len: int,
                   cfg: TrainConfig) -> list[TokenSequence]:
    examples = []
    for d in dialogues:
        for t in range(len(d.turns)):
            examples.append(build_training_sequence(d, t, vocab, max_seq_len, cfg))
    return examples


def _epoch_order(n, lengths, batch_size, rng):
    """Shuffle, bucket by length for padding efficiency, then shuffle batches."""
    order = list(rng.permutation(n))
    order.sort(key=lambda i: lengths[i] // 64)  # stable: keeps shuffle inside buckets
    batches = [order[i:i + batch_size] for i in range(0, n, batch_size)]
    rng.shuffle(batches)
    return batches


def train(dialogues, model_cfg: ModelConfig, cfg: TrainConfig, vocab: Vocabulary,
          log=None) -> TrainResult:
    """Deterministic given the seed: fixed init, iteration order and dropout stream.

    Mirrors the paper-scale recipe of starting from a chat model: an optional
    warmup phase fits the chit-chat dialogues alone before the mixed corpus.
    Only the mixed-phase epoch losses enter the returned history.
    """
    if not dialogues:
        raise ValueError("training corpus is empty")
    if model_cfg.vocab_size != len(vocab):
        raise ValueError("model vocab_size disagrees with the vocabulary")
    examples = build_examples(dialogues, vocab, model_cfg.max_seq_len, cfg)

    seeds = np.random.SeedSequence(cfg.seed).spawn(3)
    model = TransformerLM(model_cfg, seed=cfg.seed)
    shuffle_rng = np.random.Generator(np.random.PCG64(seeds[1]))
    dropout_rng = np.random.Generator(np.random.PCG64(seeds[2]))
    opt = AdamW(model.params, lr=cfg.learning_rate, weight_decay=cfg.weight_decay)

    chit = [d for d in dialogues if d.source == "chit"]
    if cfg.chit_warmup_epochs > 0 and chit:
        warmup = build_examples(chit, vocab, model_cfg.max_seq_len, cfg)
        _run_epochs(model, opt, warmup, cfg, cfg.chit_warmup_epochs, vocab.pad_id,
                    shuffle_rng, dropout_rng, log, tag="warmup")

    history = _run_epochs(model, opt, examples, cfg, cfg.epochs, vocab.pad_id,
                          shuffle_rng, dropout_rng, log, tag="mixed")
    return TrainResult(model=model, loss_history=history, examples=len(examples))


def _run_epochs(model, opt, examples, cfg, epochs, pad_id, shuffle_rng, dropout_rng,
                log, tag):
    lengths = [len(e) for e in examples]
    history: list[float] = []
    snapshot = {k: v.copy() for k, v in model.params.items()}
    for epoch in range(epochs):
        if epochs > 1:
            frac = epoch / (epochs - 1)
            opt.lr = cfg.learning_rate * (1.0 - (1.0 - cfg.lr_decay) * frac)
        total_loss = 0.0
        total_count = 0
        for batch_idx in _epoch_order(len(examples), lengths, cfg.batch_size, shuffle_rng):
            batch = [examples[i] for i in batch_idx]
            ids, weights, mask = pad_batch(batch, pad_id=pad_id)
            loss, grads, count = model.loss_and_grads(
                ids, weights, mask, train=True, rng=dropout_rng
            )
            if not np.isfinite(loss):
                model.params = snapshot
                raise DivergedLoss(
                    f"non-finite loss at {tag} epoch {epoch}", model, history
                )
            clip_grad_norm(grads, cfg.grad_clip_norm)
            opt.step(grads)
            total_loss += loss * count
            total_count += count
        mean = total_loss / max(total_count, 1)
        history.append(mean)
        snapshot = {k: v.copy() for k, v in model.params.items()}
        if log is not None:
            log(f"{tag} epoch {epoch + 1}/{epochs}  loss {mean:.4f}")
    return history
