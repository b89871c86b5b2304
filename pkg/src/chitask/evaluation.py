"""Corpus-level metrics and evaluation drivers.

Task dialogues report Inform, Success, BLEU and the combined score
(Inform + Success) * 0.5 + BLEU; chit-chat reports BLEU, distinct-1/2 and the
average response length. Inform/Success here are exact on the synthetic corpus
and deliberately simpler than the full MultiWOZ evaluator, so absolute numbers
are not comparable to published ones.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from . import schema
from .db import DEFAULT_BUCKETS, BucketTable, EntityDatabase
from .pipeline import DialogueSystem, GenerationTrace, SessionState
from .schema import Dialogue, SystemAct, TaskGoal

OFFER_ACTS = ("recommend", "inform")


class EmptyInput(ValueError):
    """Metric invoked with no sentences."""


class MissingGoal(ValueError):
    """A task dialogue reached the evaluator without a goal."""


def _ngrams(tokens: list[str], n: int):
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def bleu(candidates: list[str], references: list[str]) -> float:
    """Corpus BLEU-4 with brevity penalty, percentage-scaled.

    Higher-order precisions with zero matches get add-one smoothing so short
    responses do not zero the geometric mean.
    """
    if not candidates or len(candidates) != len(references):
        raise EmptyInput("need equal-length nonempty candidate and reference lists")
    clipped = [0, 0, 0, 0]
    totals = [0, 0, 0, 0]
    cand_len = 0
    ref_len = 0
    for cand, ref in zip(candidates, references):
        cand_toks = cand.split()
        ref_toks = ref.split()
        cand_len += len(cand_toks)
        ref_len += len(ref_toks)
        for n in range(1, 5):
            counts = Counter(_ngrams(cand_toks, n))
            ref_counts = Counter(_ngrams(ref_toks, n))
            totals[n - 1] += sum(counts.values())
            clipped[n - 1] += sum(min(c, ref_counts[g]) for g, c in counts.items())
    if cand_len == 0:
        return 0.0
    log_sum = 0.0
    for n in range(1, 5):
        c, t = clipped[n - 1], totals[n - 1]
        if n == 1:
            if c == 0:
                return 0.0
            p = c / t
        elif c == 0:
            p = (c + 1) / (t + 1)
        else:
            p = c / t
        log_sum += 0.25 * math.log(p)
    bp = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    return 100.0 * bp * math.exp(log_sum)


def distinct_n(sentences: list[str], n: int) -> float:
    """Percentage of distinct n-grams pooled over all sentences."""
    if n not in (1, 2):
        raise ValueError("distinct_n is defined for n in {1, 2}")
    seen: set[tuple[str, ...]] = set()
    total = 0
    for s in sentences:
        grams = _ngrams(s.split(), n)
        total += len(grams)
        seen.update(grams)
    if total == 0:
        return 0.0
    return 100.0 * len(seen) / total


def avg_len(sentences: list[str]) -> float:
    """Mean whitespace-token length of the (delexicalized) responses."""
    if not sentences:
        return 0.0
    return sum(len(s.split()) for s in sentences) / len(sentences)


def combined(inform: float, success: float, bleu_score: float) -> float:
    return (inform + success) * 0.5 + bleu_score


@dataclass
class TodScores:
    inform: float
    success: float
    bleu: float
    combined: float

    def to_obj(self) -> dict:
        return {"inform": self.inform, "success": self.success,
                "bleu": self.bleu, "combined": self.combined}


@dataclass
class ChitScores:
    bleu: float
    dist1: float
    dist2: float
    avg_len: float

    def to_obj(self) -> dict:
        return {"bleu": self.bleu, "dist1": self.dist1,
                "dist2": self.dist2, "avg_len": self.avg_len}


@dataclass
class TurnOutcome:
    """What the system did at one turn, as the evaluator sees it."""

    response: str
    act: SystemAct | None
    matches: list[dict] = field(default_factory=list)
    repairs: tuple[str, ...] = ()


@dataclass
class DialogueOutcome:
    goal: TaskGoal | None
    turns: list[TurnOutcome]


def _entity_satisfies(entity: dict, constraints: dict[str, str]) -> bool:
    return all(entity.get(k, "").lower() == v.lower() for k, v in constraints.items())


def _informed_domain(outcome: DialogueOutcome, domain: str, constraints: dict[str, str]) -> bool:
    offered: list[dict] = []
    final_offer_act: dict | None = None
    for turn in outcome.turns:
        if turn.act is None or turn.act.domain != domain:
            continue
        if not turn.matches:
            continue
        if "[value_name]" in turn.response:
            offered.append(turn.matches[0])
        if turn.act.act_type in OFFER_ACTS:
            final_offer_act = turn.matches[0]
    if final_offer_act is not None:
        offered.append(final_offer_act)
    return any(_entity_satisfies(e, constraints) for e in offered)


def inform_success(outcomes: list[DialogueOutcome]) -> tuple[float, float]:
    """Dialogue-level Inform and Success rates, in percent.

    A dialogue informs when every constrained domain received an offered entity
    consistent with the goal; it succeeds when it informs and every requested
    slot's placeholder shows up in some system response.
    """
    if not outcomes:
        raise EmptyInput("no dialogues to score")
    informed = 0
    succeeded = 0
    for outcome in outcomes:
        if outcome.goal is None:
            raise MissingGoal("task dialogue evaluated without a goal")
        ok = all(
            _informed_domain(outcome, dom, constraints)
            for dom, constraints in outcome.goal.constraints.items()
        )
        informed += ok
        if ok:
            all_text = " ".join(t.response for t in outcome.turns)
            wanted = [f"[value_{slot}]" for slot in outcome.goal.requested_slots()]
            succeeded += all(w in all_text for w in wanted)
    return 100.0 * informed / len(outcomes), 100.0 * succeeded / len(outcomes)


def gold_outcomes(dialogue: Dialogue, database: EntityDatabase,
                  buckets: BucketTable = DEFAULT_BUCKETS) -> DialogueOutcome:
    """Score a dialogue's own gold turns (the corpus self-consistency oracle)."""
    turns = []
    for t in dialogue.turns:
        matches = database.query(t.belief, buckets).matches
        turns.append(TurnOutcome(response=t.response, act=t.act, matches=matches))
    return DialogueOutcome(goal=dialogue.goal, turns=turns)


# --- running a system over a corpus ---

@dataclass
class EvalReport:
    tod: TodScores | None = None
    chit: ChitScores | None = None
    tod_dialogues: int = 0
    chit_dialogues: int = 0
    repaired_turns: int = 0
    repair_counts: dict[str, int] = field(default_factory=dict)

    def to_obj(self) -> dict:
        return {
            "tod": self.tod.to_obj() if self.tod else None,
            "chit": self.chit.to_obj() if self.chit else None,
            "tod_dialogues": self.tod_dialogues,
            "chit_dialogues": self.chit_dialogues,
            "repaired_turns": self.repaired_turns,
            "repair_counts": dict(self.repair_counts),
        }


def run_dialogue(system: DialogueSystem, dialogue: Dialogue) -> list[GenerationTrace]:
    """Feed the gold user turns through the pipeline, end to end."""
    state = SessionState()
    traces = []
    for turn in dialogue.turns:
        trace, state = system.step(state, turn.user)
        traces.append(trace)
    return traces


def traces_to_outcome(traces: list[GenerationTrace], goal: TaskGoal | None) -> DialogueOutcome:
    return DialogueOutcome(
        goal=goal,
        turns=[TurnOutcome(response=t.response, act=t.act, matches=t.matches,
                           repairs=t.repairs) for t in traces],
    )


def _collect_repairs(report: EvalReport, traces: list[GenerationTrace]) -> None:
    for t in traces:
        if t.repairs:
            report.repaired_turns += 1
        for r in t.repairs:
            report.repair_counts[r] = report.repair_counts.get(r, 0) + 1


def evaluate_corpus(system: DialogueSystem, dialogues: list[Dialogue],
                    mode: str = "both", trace_sink=None) -> EvalReport:
    """Generate over the corpus and score TOD and/or chit dialogues.

    Turns listed in a dialogue's noise_turns have no gold response and are
    excluded from BLEU (they still run through the pipeline). ``trace_sink``,
    when given, receives each (dialogue, traces) pair for replay recording.
    """
    records = []
    for dialogue in dialogues:
        is_tod = dialogue.source == "tod"
        if (mode == "tod" and not is_tod) or (mode == "chit" and is_tod):
            continue
        traces = run_dialogue(system, dialogue)
        if trace_sink is not None:
            trace_sink(dialogue, traces)
        records.append((dialogue, traces))
    return score_traces(records, mode)


# --- trace replay files: score pre-recorded generations offline ---

def save_trace_file(path, records) -> None:
    """One dialogue per line: the gold dialogue plus its generated traces."""
    import json

    from .pipeline import trace_to_obj
    with open(path, "w", encoding="utf-8") as fh:
        for dialogue, traces in records:
            obj = {
                "source": dialogue.source,
                "gold": schema.dialogue_to_obj(dialogue),
                "traces": [trace_to_obj(t, i) for i, t in enumerate(traces)],
            }
            fh.write(json.dumps(obj) + "\n")


def load_trace_file(path):
    import json

    from .pipeline import trace_from_obj
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            dialogue = schema.dialogue_from_obj(obj["gold"])
            traces = [trace_from_obj(t) for t in obj["traces"]]
            records.append((dialogue, traces))
    return records


def score_traces(records, mode: str = "both") -> EvalReport:
    """The evaluate_corpus scoring path over pre-recorded traces."""
    report = EvalReport()
    tod_outcomes: list[DialogueOutcome] = []
    tod_cands: list[str] = []
    tod_refs: list[str] = []
    chit_cands: list[str] = []
    chit_refs: list[str] = []
    for dialogue, traces in records:
        is_tod = dialogue.source == "tod"
        if mode == "tod" and not is_tod:
            continue
        if mode == "chit" and is_tod:
            continue
        _collect_repairs(report, traces)
        noise = set(dialogue.noise_turns)
        pairs = [(tr.response, turn.response) for i, (tr, turn) in
                 enumerate(zip(traces, dialogue.turns)) if i not in noise]
        if is_tod:
            report.tod_dialogues += 1
            tod_outcomes.append(traces_to_outcome(traces, dialogue.goal))
            tod_cands.extend(p[0] for p in pairs)
            tod_refs.extend(p[1] for p in pairs)
        else:
            report.chit_dialogues += 1
            chit_cands.extend(p[0] for p in pairs)
            chit_refs.extend(p[1] for p in pairs)
    if tod_outcomes:
        inform, success = inform_success(tod_outcomes)
        b = bleu(tod_cands, tod_refs)
        report.tod = TodScores(inform, success, b, combined(inform, success, b))
    if chit_cands:
        report.chit = ChitScores(
            bleu=bleu(chit_cands, chit_refs),
            dist1=distinct_n(chit_cands, 1),
            dist2=distinct_n(chit_cands, 2),
            avg_len=avg_len(chit_cands),
        )
    return report
