"""Unified dialogue turn schema shared by chit-chat and task-oriented dialogues.

Every turn carries the same five segments (user text, belief state, DB result
token, system act, response text), so both dialogue types serialize to one flat
token stream and parse back losslessly. Chit-chat lives under the pseudo-domain
``chit``: its belief slots are content words with empty values, its DB token is
always ``[db_nore]`` and its act is exactly ``[chit] [chit_act]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

CHIT_DOMAIN = "chit"
TOD_DOMAINS = ("taxi", "attraction", "police", "restaurant", "train", "hotel", "hospital")
DOMAINS = TOD_DOMAINS + (CHIT_DOMAIN,)

ACT_TYPES = ("inform", "request", "recommend", "offerbook", "offerbooked", "bye", "greet", "chit_act")

DB_BUCKETS = ("db_0", "db_1", "db_2", "db_3", "db_nore")
DB_NO_RESULT = "db_nore"

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
SOS_TOKEN = "<sos>"


def bracketed(name: str) -> str:
    return f"[{name}]"


DOMAIN_TOKENS = {d: bracketed(d) for d in DOMAINS}
ACT_TOKENS = {a: bracketed(a) for a in ACT_TYPES}
DB_TOKENS = {b: bracketed(b) for b in DB_BUCKETS}

_TOKEN_TO_DOMAIN = {v: k for k, v in DOMAIN_TOKENS.items()}
_TOKEN_TO_ACT = {v: k for k, v in ACT_TOKENS.items()}
_TOKEN_TO_DB = {v: k for k, v in DB_TOKENS.items()}

# Slot names each TOD domain may carry in a belief state or act. Fixed at
# corpus-build time; the belief parser uses it to split slot names from
# multi-word values.
SLOT_REGISTRY: dict[str, tuple[str, ...]] = {
    "hotel": ("price", "area", "stars", "type", "parking", "name", "phone", "address", "postcode"),
    "restaurant": ("food", "price", "area", "name", "phone", "address", "postcode"),
    "train": ("departure", "destination", "day", "leave", "arrive", "name", "price", "duration"),
    "taxi": ("departure", "destination", "leave", "arrive", "name", "phone"),
    "attraction": ("type", "area", "name", "phone", "address", "postcode", "fee"),
    "police": ("name", "phone", "address", "postcode"),
    "hospital": ("department", "name", "phone", "address"),
}

ALL_SLOT_NAMES = tuple(sorted({s for slots in SLOT_REGISTRY.values() for s in slots}))
PLACEHOLDER_TOKENS = tuple(f"[value_{s}]" for s in ALL_SLOT_NAMES)


@dataclass(frozen=True)
class SegmentMarkers:
    """Begin/end tokens wrapping each of the five segments, plus the dialogue start token."""

    user: tuple[str, str] = ("<u>", "</u>")
    belief: tuple[str, str] = ("<b>", "</b>")
    db: tuple[str, str] = ("<d>", "</d>")
    act: tuple[str, str] = ("<a>", "</a>")
    response: tuple[str, str] = ("<r>", "</r>")
    start: str = "<sos>"

    def all_tokens(self) -> tuple[str, ...]:
        out: list[str] = [self.start]
        for pair in (self.user, self.belief, self.db, self.act, self.response):
            out.extend(pair)
        return tuple(out)


DEFAULT_MARKERS = SegmentMarkers()


def special_tokens(markers: SegmentMarkers = DEFAULT_MARKERS) -> tuple[str, ...]:
    """The reserved token set, in canonical id order (pad always first)."""
    toks: list[str] = [PAD_TOKEN, UNK_TOKEN]
    toks.extend(markers.all_tokens())
    toks.extend(DOMAIN_TOKENS[d] for d in DOMAINS)
    toks.extend(ACT_TOKENS[a] for a in ACT_TYPES)
    toks.extend(DB_TOKENS[b] for b in DB_BUCKETS)
    toks.extend(PLACEHOLDER_TOKENS)
    return tuple(toks)


class MalformedSegment(ValueError):
    """A generated segment that cannot be parsed into its structured form."""


class CorpusFormatError(ValueError):
    """A corpus file line that does not match the canonical dialogue format."""


@dataclass(frozen=True)
class BeliefEntry:
    domain: str
    slots: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class BeliefState:
    """Ordered per-domain slot/value constraints; values are empty for chit-chat."""

    entries: tuple[BeliefEntry, ...] = ()

    @classmethod
    def from_pairs(cls, pairs) -> "BeliefState":
        """Build from [(domain, {slot: value} | [slot, ...]), ...]."""
        entries = []
        for domain, slots in pairs:
            if isinstance(slots, dict):
                slot_items = tuple((k, v) for k, v in slots.items())
            else:
                slot_items = tuple((s, "") for s in slots)
            entries.append(BeliefEntry(domain, slot_items))
        return cls(tuple(entries))

    def is_empty(self) -> bool:
        return not self.entries

    def domains(self) -> tuple[str, ...]:
        return tuple(e.domain for e in self.entries)

    def latest_tod_domain(self) -> str | None:
        """The active task domain: the first TOD entry.

        Belief entries are kept newest-domain-first, so the most recently
        constrained domain leads the serialization and the db query targets it.
        """
        for entry in self.entries:
            if entry.domain != CHIT_DOMAIN:
                return entry.domain
        return None

    def constraints_for(self, domain: str) -> dict[str, str]:
        out: dict[str, str] = {}
        for entry in self.entries:
            if entry.domain == domain:
                out.update({k: v for k, v in entry.slots if v})
        return out

    def serialize(self) -> str:
        pieces: list[str] = []
        for entry in self.entries:
            pieces.append(DOMAIN_TOKENS.get(entry.domain, bracketed(entry.domain)))
            for slot, value in entry.slots:
                pieces.append(slot)
                if value:
                    pieces.append(value)
        return " ".join(pieces)


@dataclass(frozen=True)
class SystemAct:
    """One domain-act pair with optional slot names; chit-chat acts carry no slots."""

    domain: str
    act_type: str
    slots: tuple[str, ...] = ()

    def serialize(self) -> str:
        pieces = [
            DOMAIN_TOKENS.get(self.domain, bracketed(self.domain)),
            ACT_TOKENS.get(self.act_type, bracketed(self.act_type)),
        ]
        pieces.extend(self.slots)
        return " ".join(pieces)


CHIT_ACT = SystemAct(CHIT_DOMAIN, "chit_act")


@dataclass
class DialogueTurn:
    user: str
    belief: BeliefState
    db: str
    act: SystemAct
    response: str
    turn_index: int = 0


@dataclass
class TaskGoal:
    """Per-domain constraints and requested slots; consumed only by evaluation."""

    constraints: dict[str, dict[str, str]] = field(default_factory=dict)
    requested: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def domains(self) -> tuple[str, ...]:
        return tuple(self.constraints)

    def requested_slots(self) -> tuple[str, ...]:
        out: list[str] = []
        for slots in self.requested.values():
            out.extend(slots)
        return tuple(out)


@dataclass
class Dialogue:
    turns: list[DialogueTurn]
    source: str = "tod"  # one of {chit, tod, mixed}
    goal: TaskGoal | None = None
    noise_turns: tuple[int, ...] = ()


def serialize_turn(turn: DialogueTurn, markers: SegmentMarkers = DEFAULT_MARKERS) -> str:
    """Flatten one turn into its five marker-wrapped segments, in U B D A R order."""
    pieces: list[str] = []
    for (begin, end), body in (
        (markers.user, turn.user),
        (markers.belief, turn.belief.serialize()),
        (markers.db, DB_TOKENS.get(turn.db, bracketed(turn.db))),
        (markers.act, turn.act.serialize()),
        (markers.response, turn.response),
    ):
        pieces.append(begin)
        if body:
            pieces.append(body)
        pieces.append(end)
    return " ".join(pieces)


def serialize_context(turns, markers: SegmentMarkers = DEFAULT_MARKERS, include_start: bool = True) -> str:
    """Concatenate completed turns into the running dialogue context string."""
    pieces = [markers.start] if include_start else []
    pieces.extend(serialize_turn(t, markers) for t in turns)
    return " ".join(pieces)


def _parse_belief(tokens: list[str], registry) -> tuple[BeliefState, bool]:
    if not tokens:
        return BeliefState(), True
    if tokens[0] not in _TOKEN_TO_DOMAIN:
        raise MalformedSegment(f"belief segment does not open with a domain token: {tokens[0]!r}")
    entries: list[BeliefEntry] = []
    anomalies = 0
    domain: str | None = None
    slots: list[tuple[str, str]] = []
    open_slot: str | None = None
    value_parts: list[str] = []

    def close_slot():
        nonlocal open_slot, value_parts
        if open_slot is not None:
            slots.append((open_slot, " ".join(value_parts)))
        open_slot, value_parts = None, []

    def close_entry():
        nonlocal domain, slots
        close_slot()
        if domain is not None:
            entries.append(BeliefEntry(domain, tuple(slots)))
        domain, slots = None, []

    for tok in tokens:
        if tok in _TOKEN_TO_DOMAIN:
            close_entry()
            domain = _TOKEN_TO_DOMAIN[tok]
            continue
        if domain == CHIT_DOMAIN:
            # every chit token is a value-less slot name
            close_slot()
            slots.append((tok, ""))
            continue
        known = registry.get(domain, ())
        if tok in known:
            close_slot()
            open_slot = tok
        elif open_slot is not None and not tok.startswith("["):
            value_parts.append(tok)
        else:
            # unknown token in slot-name position: retained verbatim, flag the parse
            close_slot()
            slots.append((tok, ""))
            anomalies += 1
    close_entry()
    return BeliefState(tuple(entries)), anomalies == 0


def _parse_act(tokens: list[str]) -> tuple[SystemAct, bool]:
    if not tokens or tokens[0] not in _TOKEN_TO_DOMAIN:
        raise MalformedSegment("act segment does not open with a domain token")
    if len(tokens) < 2 or tokens[1] not in _TOKEN_TO_ACT:
        raise MalformedSegment("act segment is missing its act-type token")
    slots = tuple(tokens[2:])
    valid = not any(s.startswith("[") for s in slots)
    return SystemAct(_TOKEN_TO_DOMAIN[tokens[0]], _TOKEN_TO_ACT[tokens[1]], slots), valid


def _parse_db(tokens: list[str]) -> tuple[str, bool]:
    if len(tokens) != 1 or tokens[0] not in _TOKEN_TO_DB:
        raise MalformedSegment(f"db segment must be exactly one db token, got {tokens!r}")
    return _TOKEN_TO_DB[tokens[0]], True


def parse_segment(text: str, kind: str, registry=SLOT_REGISTRY):
    """Best-effort parse of a raw segment string (markers already stripped).

    Returns ``(value, valid)``. Raises :class:`MalformedSegment` only when the
    segment is structurally unusable: a nonempty belief/act with no opening
    domain token, an act without an act-type token, or a db segment that is not
    a single db token. These signal model generation errors, not crashes.
    """
    tokens = text.split()
    if kind == "belief":
        return _parse_belief(tokens, registry)
    if kind == "act":
        return _parse_act(tokens)
    if kind == "db":
        return _parse_db(tokens)
    raise ValueError(f"unknown segment kind: {kind!r}")


def parse_turn(text: str, turn_index: int = 0, markers: SegmentMarkers = DEFAULT_MARKERS,
               registry=SLOT_REGISTRY) -> tuple[DialogueTurn, bool]:
    """Inverse of :func:`serialize_turn`; used by round-trip checks and replay."""
    tokens = text.split()
    spans: dict[str, list[str]] = {}
    order = [("user", markers.user), ("belief", markers.belief), ("db", markers.db),
             ("act", markers.act), ("response", markers.response)]
    pos = 0
    for name, (begin, end) in order:
        try:
            i = tokens.index(begin, pos)
            j = tokens.index(end, i + 1)
        except ValueError as exc:
            raise MalformedSegment(f"missing {name} segment markers") from exc
        spans[name] = tokens[i + 1 : j]
        pos = j + 1
    belief, b_ok = _parse_belief(spans["belief"], registry)
    db, _ = _parse_db(spans["db"])
    act, a_ok = _parse_act(spans["act"])
    turn = DialogueTurn(
        user=" ".join(spans["user"]),
        belief=belief,
        db=db,
        act=act,
        response=" ".join(spans["response"]),
        turn_index=turn_index,
    )
    return turn, b_ok and a_ok


def classify_response_type(act: SystemAct) -> str:
    """Partition parseable acts into the two response types."""
    return "chit" if act.domain == CHIT_DOMAIN else "task"


# --- canonical corpus format: one JSON dialogue per line ---

def belief_to_obj(belief: BeliefState) -> list[dict]:
    return [{"domain": e.domain, "slots": {k: v for k, v in e.slots}} for e in belief.entries]


def belief_from_obj(obj) -> BeliefState:
    entries = []
    for item in obj:
        entries.append(BeliefEntry(item["domain"], tuple((k, v) for k, v in item["slots"].items())))
    return BeliefState(tuple(entries))


def dialogue_to_obj(d: Dialogue) -> dict:
    obj: dict = {"source": d.source}
    if d.goal is not None:
        obj["goal"] = {
            dom: {"constraints": dict(d.goal.constraints.get(dom, {})),
                  "requested": list(d.goal.requested.get(dom, ()))}
            for dom in set(d.goal.constraints) | set(d.goal.requested)
        }
    obj["turns"] = [
        {
            "user": t.user,
            "belief": belief_to_obj(t.belief),
            "db": t.db,
            "act": {"domain": t.act.domain, "type": t.act.act_type, "slots": list(t.act.slots)},
            "response": t.response,
        }
        for t in d.turns
    ]
    if d.noise_turns:
        obj["noise_turns"] = list(d.noise_turns)
    return obj


def dialogue_from_obj(obj: dict) -> Dialogue:
    try:
        goal = None
        if "goal" in obj and obj["goal"] is not None:
            goal = TaskGoal(
                constraints={dom: dict(g.get("constraints", {})) for dom, g in obj["goal"].items()},
                requested={dom: tuple(g.get("requested", ())) for dom, g in obj["goal"].items()},
            )
        turns = []
        for i, t in enumerate(obj["turns"]):
            act = SystemAct(t["act"]["domain"], t["act"]["type"], tuple(t["act"].get("slots", ())))
            turns.append(DialogueTurn(
                user=t["user"],
                belief=belief_from_obj(t["belief"]),
                db=t["db"],
                act=act,
                response=t["response"],
                turn_index=i,
            ))
        return Dialogue(
            turns=turns,
            source=obj.get("source", "tod"),
            goal=goal,
            noise_turns=tuple(obj.get("noise_turns", ())),
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise CorpusFormatError(f"bad dialogue object: {exc}") from exc


def save_dialogues(path, dialogues) -> None:
    # insertion order is deterministic and meaningful (belief slot order);
    # never sort keys here
    with open(path, "w", encoding="utf-8") as fh:
        for d in dialogues:
            fh.write(json.dumps(dialogue_to_obj(d)) + "\n")


def load_dialogues(path) -> list[Dialogue]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}:{line_no}: not valid JSON") from exc
            out.append(dialogue_from_obj(obj))
    return out
