"""End-to-end training driver: fit the mixed corpus, keep the best checkpoint.

Model selection follows the paper-scale recipe of picking the checkpoint by
validation performance: after each epoch past a burn-in, a held-out probe
(task dialogues plus switch setups in both directions) scores the current
parameters, and the best-scoring epoch's parameters are restored at the end.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import corpus, evaluation, harness
from .db import DEFAULT_BUCKETS, BucketTable, EntityDatabase
from .model import ModelConfig, TrainConfig, TransformerLM
from .model.optim import AdamW, clip_grad_norm
from .model.sequences import pad_batch
from .model.train import DivergedLoss, _epoch_order, build_examples
from .pipeline import DialogueSystem
from .vocab import Vocabulary


@dataclass
class SelectionConfig:
    val_tod: int = 20          # validation task dialogues
    val_switch: int = 12       # switch setups per direction
    val_seed: int = 977        # offsets the corpus seed for validation data
    burn_in: int = 6           # first probed epoch (1-based)
    probe_every: int = 2


@dataclass
class ValProbe:
    epoch: int
    inform: float
    switch2_chit_first: float
    switch2_tod_first: float
    success: float = 0.0

    @property
    def score(self) -> float:
        # inform and chit-to-task switching gate the fixture model; success and
        # the task-to-chit rate break ties (see the robustness notes in README)
        gate = min(self.inform, self.switch2_chit_first)
        total = (self.inform + self.switch2_chit_first + self.switch2_tod_first
                 + self.success)
        return gate + 0.01 * total


@dataclass
class FitResult:
    model: TransformerLM
    loss_history: list[float]
    examples: int
    best_epoch: int | None = None
    probes: list[ValProbe] = field(default_factory=list)


def _probe_sets(mixed, database: EntityDatabase, cfg: TrainConfig, sel: SelectionConfig,
                buckets: BucketTable):
    chit_pool = [d for d in mixed if d.source == "chit"]
    val_tod = corpus.generate_tod_corpus(database, sel.val_tod, seed=cfg.seed + sel.val_seed,
                                         buckets=buckets)
    s_ct = harness.build_switch_setups(chit_pool, val_tod, "chit-first", sel.val_switch,
                                       seed=cfg.seed + sel.val_seed + 1)
    s_tc = harness.build_switch_setups(chit_pool, val_tod, "tod-first", sel.val_switch,
                                       seed=cfg.seed + sel.val_seed + 2)
    return val_tod, s_ct, s_tc


_DEFAULT_SELECTION = object()


def fit(mixed, model_cfg: ModelConfig, cfg: TrainConfig, vocab: Vocabulary,
        database: EntityDatabase, buckets: BucketTable = DEFAULT_BUCKETS,
        selection=_DEFAULT_SELECTION, log=None) -> FitResult:
    """Warmup on chit-chat, train on the mixed corpus, select the best epoch.

    ``selection=None`` disables validation probing and keeps the final epoch.
    """
    if model_cfg.vocab_size != len(vocab):
        raise ValueError("model vocab_size disagrees with the vocabulary")
    if selection is _DEFAULT_SELECTION:
        selection = SelectionConfig()
    examples = build_examples(mixed, vocab, model_cfg.max_seq_len, cfg)
    if cfg.intro_oversample > 1:
        extra = []
        i = 0
        for d in mixed:
            prev_domain = None
            for t, turn in enumerate(d.turns):
                if t == 0 or turn.act.domain != prev_domain:
                    extra.extend([examples[i]] * (cfg.intro_oversample - 1))
                prev_domain = turn.act.domain
                i += 1
        examples = examples + extra
    chit_only = [d for d in mixed if d.source == "chit"]
    chit_examples = build_examples(chit_only, vocab, model_cfg.max_seq_len, cfg) if chit_only else []

    seeds = np.random.SeedSequence(cfg.seed).spawn(3)
    model = TransformerLM(model_cfg, seed=cfg.seed)
    shuffle_rng = np.random.Generator(np.random.PCG64(seeds[1]))
    dropout_rng = np.random.Generator(np.random.PCG64(seeds[2]))
    opt = AdamW(model.params, lr=cfg.learning_rate, weight_decay=cfg.weight_decay)
    val_tod = s_ct = s_tc = None
    if selection is not None:
        val_tod, s_ct, s_tc = _probe_sets(mixed, database, cfg, selection, buckets)

    def run_epoch(ex, lr):
        opt.lr = lr
        lengths = [len(e) for e in ex]
        total = count_all = 0
        for batch_idx in _epoch_order(len(ex), lengths, cfg.batch_size, shuffle_rng):
            ids, w, m = pad_batch([ex[i] for i in batch_idx], pad_id=vocab.pad_id)
            offset = 0
            if cfg.pos_jitter > 0:
                room = min(cfg.pos_jitter, model_cfg.max_seq_len - ids.shape[1])
                if room > 0:
                    offset = int(dropout_rng.integers(0, room + 1))
            loss, grads, count = model.loss_and_grads(ids, w, m, train=True, rng=dropout_rng,
                                                      pos_offset=offset,
                                                      word_dropout=cfg.word_dropout)
            if not np.isfinite(loss):
                raise DivergedLoss("non-finite training loss", model, history)
            clip_grad_norm(grads, cfg.grad_clip_norm)
            opt.step(grads)
            total += loss * count
            count_all += count
        return total / max(count_all, 1)

    history: list[float] = []
    for epoch in range(cfg.chit_warmup_epochs):
        denom = max(cfg.chit_warmup_epochs - 1, 1)
        lr = cfg.learning_rate * (1.0 - (1.0 - cfg.lr_decay) * epoch / denom)
        warm_loss = run_epoch(chit_examples, lr) if chit_examples else float("nan")
        if log:
            log(f"warmup epoch {epoch + 1}/{cfg.chit_warmup_epochs}  loss {warm_loss:.4f}")

    best: tuple[float, int] | None = None
    best_params: dict[str, np.ndarray] | None = None
    probes: list[ValProbe] = []
    for epoch in range(cfg.epochs):
        denom = max(cfg.epochs - 1, 1)
        lr = cfg.learning_rate * (1.0 - (1.0 - cfg.lr_decay) * epoch / denom)
        mean = run_epoch(examples, lr)
        history.append(mean)
        if log:
            log(f"epoch {epoch + 1}/{cfg.epochs}  loss {mean:.4f}")
        probe_due = (selection is not None
                     and epoch + 1 >= selection.burn_in
                     and (epoch + 1 - selection.burn_in) % selection.probe_every == 0)
        if probe_due:
            system = DialogueSystem(model, vocab, database, buckets)
            rep = evaluation.evaluate_corpus(system, val_tod, mode="tod")
            r_ct = harness.switch_eval(s_ct, system)
            r_tc = harness.switch_eval(s_tc, system)
            probe = ValProbe(epoch + 1, rep.tod.inform,
                             r_ct.switch_rates[2], r_tc.switch_rates[2],
                             rep.tod.success)
            probes.append(probe)
            if log:
                log(f"  probe: inform {probe.inform:.0f} "
                    f"switch2 {probe.switch2_chit_first:.0f}/{probe.switch2_tod_first:.0f}")
            if best is None or probe.score > best[0]:
                best = (probe.score, epoch + 1)
                best_params = {k: v.copy() for k, v in model.params.items()}

    best_epoch = None
    if best_params is not None:
        model.params = best_params
        best_epoch = best[1]
        if log:
            log(f"selected epoch {best_epoch}")
    return FitResult(model=model, loss_history=history, examples=len(examples),
                     best_epoch=best_epoch, probes=probes)
