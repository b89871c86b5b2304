"""Behavioral protocols: mode-switch measurement and noise robustness.

A switch setup prepends gold turns of one dialogue type to a body of the other
type; Switch-n is the share of setups whose generated response type matches the
body type within the first n body turns. Robustness splices chit-chat turns
into task dialogues and tracks how the combined score degrades.
"""

from __future__ import annotations

import copy
import random
from dataclasses import dataclass, field

from . import evaluation
from .evaluation import ChitScores, TodScores, bleu, combined, distinct_n, avg_len, inform_success
from .pipeline import SessionState
from .schema import Dialogue, DialogueTurn


@dataclass
class SwitchSetup:
    prefix_turns: list[DialogueTurn]
    body: Dialogue
    prefix_type: str  # chit | tod
    body_type: str    # the other one


@dataclass
class NoiseSetup:
    insert_turns: int = 1
    noise_pool: list[Dialogue] = field(default_factory=list)


@dataclass
class SwitchReport:
    switch_rates: dict[int, float]          # n -> percentage switched by turn n
    switch_positions: list[int | None]      # per setup, 1-based body turn of the switch
    post_switch_tod: TodScores | None = None
    post_switch_chit: ChitScores | None = None

    def to_obj(self) -> dict:
        return {
            "switch_rates": {str(k): v for k, v in self.switch_rates.items()},
            "post_switch_tod": self.post_switch_tod.to_obj() if self.post_switch_tod else None,
            "post_switch_chit": self.post_switch_chit.to_obj() if self.post_switch_chit else None,
        }


def build_switch_setups(chit: list[Dialogue], tod: list[Dialogue], direction: str,
                        count: int, seed: int, prefix_turns: int = 2) -> list[SwitchSetup]:
    """Compose setups of one direction: 'chit-first' bodies are TOD and vice versa."""
    if direction not in ("chit-first", "tod-first"):
        raise ValueError("direction must be chit-first or tod-first")
    rng = random.Random(seed)
    prefix_pool = chit if direction == "chit-first" else tod
    body_pool = tod if direction == "chit-first" else chit
    prefix_pool = [d for d in prefix_pool if len(d.turns) >= prefix_turns]
    if not prefix_pool or not body_pool:
        raise ValueError("insufficient source dialogues for switch setups")
    setups = []
    for _ in range(count):
        src = rng.choice(prefix_pool)
        # pre-pend the dialogue-initial turns: the conversation so far is a
        # task (or chat) that is still underway, not one already closed out
        prefix = [copy.deepcopy(t) for t in src.turns[:prefix_turns]]
        for i, t in enumerate(prefix):
            t.turn_index = i
        body = rng.choice(body_pool)
        setups.append(SwitchSetup(
            prefix_turns=prefix,
            body=body,
            prefix_type="chit" if direction == "chit-first" else "tod",
            body_type="tod" if direction == "chit-first" else "chit",
        ))
    return setups


def switch_positions_to_rates(positions: list[int | None], n_values) -> dict[int, float]:
    total = len(positions)
    return {
        n: 100.0 * sum(1 for p in positions if p is not None and p <= n) / total
        for n in n_values
    }


def switch_eval(setups: list[SwitchSetup], system, n_values=(1, 2)) -> SwitchReport:
    """Run each composed dialogue; score switching and post-switch quality.

    The prefix turns are injected as gold context (they are the conversation so
    far); the body's user turns run through the system. Post-switch metrics
    cover the body turns only.
    """
    if not setups:
        raise ValueError("no switch setups")
    positions: list[int | None] = []
    tod_outcomes = []
    cands: list[str] = []
    refs: list[str] = []
    body_type = setups[0].body_type
    for setup in setups:
        state = SessionState(turns=list(setup.prefix_turns))
        pos: int | None = None
        traces = []
        for turn in setup.body.turns:
            trace, state = system.step(state, turn.user)
            traces.append(trace)
            want = "chit" if setup.body_type == "chit" else "task"
            if pos is None and trace.mode == want:
                pos = len(traces)
        positions.append(pos)
        noise = set(setup.body.noise_turns)
        pairs = [(tr.response, t.response) for i, (tr, t) in
                 enumerate(zip(traces, setup.body.turns)) if i not in noise]
        cands.extend(p[0] for p in pairs)
        refs.extend(p[1] for p in pairs)
        if setup.body_type == "tod":
            tod_outcomes.append(evaluation.traces_to_outcome(traces, setup.body.goal))
    report = SwitchReport(
        switch_rates=switch_positions_to_rates(positions, n_values),
        switch_positions=positions,
    )
    if body_type == "tod":
        inform, success = inform_success(tod_outcomes)
        b = bleu(cands, refs)
        report.post_switch_tod = TodScores(inform, success, b, combined(inform, success, b))
    else:
        report.post_switch_chit = ChitScores(
            bleu=bleu(cands, refs), dist1=distinct_n(cands, 1),
            dist2=distinct_n(cands, 2), avg_len=avg_len(cands),
        )
    return report


def inject_noise(corpus: list[Dialogue], setup: NoiseSetup, seed: int) -> list[Dialogue]:
    """Splice consecutive chit turns into each TOD dialogue at a seeded position.

    The original turns keep their relative order; inserted turn indices are
    recorded in noise_turns so evaluation can exclude them from BLEU.
    """
    if setup.insert_turns == 0:
        return [copy.deepcopy(d) for d in corpus]
    pool = [d for d in setup.noise_pool if len(d.turns) >= setup.insert_turns]
    if not pool:
        raise ValueError("noise pool has no dialogue long enough")
    rng = random.Random(seed)
    out: list[Dialogue] = []
    for dialogue in corpus:
        d = copy.deepcopy(dialogue)
        if d.source != "tod" or not d.turns:
            out.append(d)
            continue
        src = rng.choice(pool)
        start = rng.randrange(len(src.turns) - setup.insert_turns + 1)
        chunk = [copy.deepcopy(t) for t in src.turns[start:start + setup.insert_turns]]
        pos = rng.randrange(len(d.turns))
        d.turns[pos:pos] = chunk
        for i, t in enumerate(d.turns):
            t.turn_index = i
        d.noise_turns = tuple(range(pos, pos + setup.insert_turns))
        out.append(d)
    return out


def robustness_eval(system, tod_dialogues: list[Dialogue], noise_pool: list[Dialogue],
                    turns_levels=(0, 1, 2), seed: int = 0) -> dict[int, TodScores]:
    """Combined-score trajectory under increasing noise, same base dialogues."""
    results: dict[int, TodScores] = {}
    for level in turns_levels:
        perturbed = inject_noise(tod_dialogues, NoiseSetup(level, noise_pool), seed + level)
        report = evaluation.evaluate_corpus(system, perturbed, mode="tod")
        results[level] = report.tod
    return results
