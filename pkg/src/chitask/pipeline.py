"""Three-stage per-turn inference: belief, then DB lookup, then act and response.

The DB token in the running sequence always comes from the database, never from
the model: after the belief stage the generated db tokens are discarded and the
true lookup result is spliced in before act generation. Malformed generations
never raise; they trigger recorded repairs instead.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import schema
from .db import DEFAULT_BUCKETS, BucketTable, EntityDatabase, UnknownDomain
from .model import DecodeSession, TransformerLM, continue_until
from .schema import (CHIT_ACT, DEFAULT_MARKERS, BeliefState, DialogueTurn,
                     MalformedSegment, SystemAct)
from .vocab import Vocabulary

_PLACEHOLDER_RE = re.compile(r"\[value_([a-z_]+)\]")

REPAIR_BELIEF_MALFORMED = "belief_malformed"
REPAIR_BELIEF_TRUNCATED = "belief_truncated"
REPAIR_ACT_MALFORMED = "act_malformed"
REPAIR_ACT_TRUNCATED = "act_truncated"
REPAIR_RESPONSE_TRUNCATED = "response_truncated"
REPAIR_UNKNOWN_DOMAIN = "unknown_db_domain"


@dataclass
class StageLimits:
    belief_max_new: int = 48
    act_max_new: int = 24
    response_max_new: int = 60  # runaway responses are cut here

    def reserve(self) -> int:
        # room for one whole generated turn plus injected structure tokens
        return self.belief_max_new + self.act_max_new + self.response_max_new + 8


@dataclass
class SessionState:
    """One conversation: completed turns plus bookkeeping counters."""

    turns: list[DialogueTurn] = field(default_factory=list)
    truncations: int = 0
    repairs: int = 0

    @property
    def turn_index(self) -> int:
        return len(self.turns)


@dataclass
class GenerationTrace:
    user: str
    raw_belief_text: str
    belief: BeliefState
    db_token: str
    matches: list[dict]
    raw_act_text: str
    act: SystemAct
    response: str
    lexicalized: str
    mode: str
    repairs: tuple[str, ...] = ()
    unresolved_placeholders: tuple[str, ...] = ()


def lexicalize(response: str, matches: list[dict]) -> tuple[str, tuple[str, ...]]:
    """Substitute the first match's fields into [value_*] placeholders.

    Unresolvable placeholders stay verbatim and are reported back.
    """
    entity = matches[0] if matches else {}
    unresolved: list[str] = []

    def sub(m: re.Match) -> str:
        slot = m.group(1)
        if slot in entity:
            return str(entity[slot])
        unresolved.append(m.group(0))
        return m.group(0)

    return _PLACEHOLDER_RE.sub(sub, response), tuple(unresolved)


class DialogueSystem:
    """Pipeline agent bound to one immutable checkpoint and database."""

    def __init__(self, model: TransformerLM, vocab: Vocabulary, database: EntityDatabase,
                 buckets: BucketTable = DEFAULT_BUCKETS,
                 markers: schema.SegmentMarkers = DEFAULT_MARKERS,
                 limits: StageLimits | None = None):
        self.model = model
        self.vocab = vocab
        self.database = database
        self.buckets = buckets
        self.markers = markers
        self.limits = limits or StageLimits()

    def _encode_prefix(self, text: str) -> tuple[list[int], bool]:
        ids = self.vocab.encode(text)
        room = self.model.cfg.max_seq_len - self.limits.reserve()
        if len(ids) > room:
            return ids[-room:], True
        return ids, False

    def _generate(self, prefix_text: str, end_marker: str, max_new: int):
        ids, truncated_ctx = self._encode_prefix(prefix_text)
        session = DecodeSession(self.model, ids)
        stop = self.vocab.token_id(end_marker)
        result = continue_until(session, {stop}, max_new)
        out = result.ids[:-1] if (result.ids and result.ids[-1] == stop) else result.ids
        return self.vocab.decode(out), result.truncated, truncated_ctx

    def step(self, state: SessionState, user_utterance: str) -> tuple[GenerationTrace, SessionState]:
        """Run one full turn; returns the trace and the advanced session state."""
        m = self.markers
        user = " ".join(user_utterance.lower().split())
        repairs: list[str] = []
        truncations = 0
        context = schema.serialize_context(state.turns, m)
        base = f"{context} {m.user[0]} {user} {m.user[1]}"

        # stage 1: belief
        raw_belief, runaway, cut = self._generate(f"{base} {m.belief[0]}", m.belief[1],
                                                  self.limits.belief_max_new)
        truncations += int(cut)
        if runaway:
            repairs.append(REPAIR_BELIEF_TRUNCATED)
        try:
            belief, _ = schema.parse_segment(raw_belief, "belief")
        except MalformedSegment:
            repairs.append(REPAIR_BELIEF_MALFORMED)
            if state.turns:
                belief = state.turns[-1].belief
            else:
                belief = BeliefState.from_pairs([(schema.CHIT_DOMAIN, [])])

        # stage 2: database is authoritative for the db token
        try:
            result = self.database.query(belief, self.buckets)
            db_token, matches = result.token, result.matches
        except UnknownDomain:
            repairs.append(REPAIR_UNKNOWN_DOMAIN)
            db_token, matches = schema.DB_NO_RESULT, []

        belief_text = belief.serialize()
        belief_seg = f"{m.belief[0]} {belief_text} {m.belief[1]}" if belief_text else \
            f"{m.belief[0]} {m.belief[1]}"
        db_seg = f"{m.db[0]} {schema.DB_TOKENS[db_token]} {m.db[1]}"

        # stage 3: act, conditioned on belief and the true db token
        raw_act, runaway, cut = self._generate(
            f"{base} {belief_seg} {db_seg} {m.act[0]}", m.act[1], self.limits.act_max_new)
        truncations += int(cut)
        if runaway:
            repairs.append(REPAIR_ACT_TRUNCATED)
        try:
            act, _ = schema.parse_segment(raw_act, "act")
        except MalformedSegment:
            repairs.append(REPAIR_ACT_MALFORMED)
            act = CHIT_ACT

        act_seg = f"{m.act[0]} {act.serialize()} {m.act[1]}"

        # stage 4: response
        response, runaway, cut = self._generate(
            f"{base} {belief_seg} {db_seg} {act_seg} {m.response[0]}", m.response[1],
            self.limits.response_max_new)
        truncations += int(cut)
        if runaway:
            repairs.append(REPAIR_RESPONSE_TRUNCATED)

        lexicalized, unresolved = lexicalize(response, matches)
        trace = GenerationTrace(
            user=user,
            raw_belief_text=raw_belief,
            belief=belief,
            db_token=db_token,
            matches=matches,
            raw_act_text=raw_act,
            act=act,
            response=response,
            lexicalized=lexicalized,
            mode=schema.classify_response_type(act),
            repairs=tuple(repairs),
            unresolved_placeholders=unresolved,
        )
        turn = DialogueTurn(
            user=user, belief=belief, db=db_token, act=act, response=response,
            turn_index=state.turn_index,
        )
        new_state = SessionState(
            turns=state.turns + [turn],
            truncations=state.truncations + truncations,
            repairs=state.repairs + len(repairs),
        )
        return trace, new_state


def trace_to_obj(trace: GenerationTrace, turn_index: int | None = None) -> dict:
    """Structured projection used by the service API and replay files."""
    obj = {
        "user": trace.user,
        "belief": schema.belief_to_obj(trace.belief),
        "raw_belief_text": trace.raw_belief_text,
        "db_token": trace.db_token,
        "matches": list(trace.matches),
        "act": {"domain": trace.act.domain, "type": trace.act.act_type,
                "slots": list(trace.act.slots)},
        "raw_act_text": trace.raw_act_text,
        "response_text": trace.response,
        "lexicalized_text": trace.lexicalized,
        "mode": trace.mode,
        "repairs": list(trace.repairs),
        "unresolved_placeholders": list(trace.unresolved_placeholders),
    }
    if turn_index is not None:
        obj["turn_index"] = turn_index
    return obj


def trace_from_obj(obj: dict) -> GenerationTrace:
    """Inverse of trace_to_obj, for offline scoring of replay files."""
    act = SystemAct(obj["act"]["domain"], obj["act"]["type"],
                    tuple(obj["act"].get("slots", ())))
    return GenerationTrace(
        user=obj.get("user", ""),
        raw_belief_text=obj.get("raw_belief_text", ""),
        belief=schema.belief_from_obj(obj.get("belief", [])),
        db_token=obj["db_token"],
        matches=list(obj.get("matches", ())),
        raw_act_text=obj.get("raw_act_text", ""),
        act=act,
        response=obj["response_text"],
        lexicalized=obj.get("lexicalized_text", obj["response_text"]),
        mode=obj.get("mode", schema.classify_response_type(act)),
        repairs=tuple(obj.get("repairs", ())),
        unresolved_placeholders=tuple(obj.get("unresolved_placeholders", ())),
    )
