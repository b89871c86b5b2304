"""Mixed-corpus construction: cleaned chit-chat plus synthetic task dialogues.

Chit-chat comes from plain-text fixtures (one utterance per line, blank line
between dialogues), run through the four filter rules, paired into turns and
annotated with noun-slot belief states. Task dialogues come from a template
generator whose output is schema-consistent by construction: its gold turns
score Inform = Success = 100 when evaluated against their own goals.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass

from . import schema
from .db import DEFAULT_BUCKETS, EntityDatabase
from .schema import CHIT_ACT, BeliefState, Dialogue, DialogueTurn, SystemAct, TaskGoal

# Closed-class lexicon for the content-word extractor: determiners, pronouns,
# prepositions, conjunctions, auxiliaries, common verbs and punctuation.
# Anything not listed here counts as a noun at desk scale.
CLOSED_CLASS_WORDS = frozenset("""
a an the this that these those some any no every each either neither both all few many much more most less least
i me my mine you your yours he him his she her hers it its we us our ours they them their theirs
myself yourself himself herself itself ourselves themselves one ones who whom whose which what when where why how
in on at by for with about against between into through during before after above below to from up down out off
over under again further of near around
and or but nor so yet if because although though while whereas unless until since as than
am is are was were be been being have has had having do does did doing will would shall should may might must can
could ought need dare
not never ever always often sometimes also just only very too quite rather really lately maybe perhaps
yes yeah yep sure ok okay absolutely surely
buy buys bought get gets got make makes made go goes went gone come comes came take takes took give gives gave
say says said tell tells told know knows knew think thinks thought feel feels felt want wants wanted like likes
liked love loves loved enjoy enjoys enjoyed prefer prefers preferred see sees saw seen look looks looked watch
watches watched read reads reading listen listens listened play plays played believe believes believed handle
handles handled pick picks picked learn learns learned keep keeps kept let lets spend spends spent live lives
lived work works worked try tries tried use uses used find finds found put puts mean means meant call calls
called ask asks asked seem seems seemed turn turns turned start starts started show shows showed hear hears
heard talk talks talked drink drinks drank eat eats ate sleep sleeps slept wake wakes woke sit sits sat stand
stands stood happen happens happened hold holds held bring brings brought exist exists existed insist insists
insisted depend depends depended favor favors favored belong belongs belonged
. , ? ! ; : ' " - ( ) ...
""".split())

_URL_RE = re.compile(r"(https?://|www\.)", re.IGNORECASE)
_REMOVED_RE = re.compile(r"\[(removed|deleted)\]")


@dataclass
class CorpusConfig:
    chit_count: int = 100
    tod_count: int = 100
    seed: int = 0
    chit_belief_enabled: bool = True  # False reproduces the "no chit belief slots" ablation
    max_utterance_words: int = 200
    min_utterance_words: int = 2
    min_dialogue_utterances: int = 4

    def __post_init__(self):
        if self.chit_count <= 0 or self.tod_count <= 0:
            raise ValueError("dialogue counts must be positive")
        if self.min_utterance_words >= self.max_utterance_words:
            raise ValueError("min_utterance_words must be below max_utterance_words")


@dataclass(frozen=True)
class FilterDecision:
    keep: bool
    reason: str | None = None


# Rule order matters: the first matching rule is the recorded rejection reason.
REJECT_URL = "url"
REJECT_LENGTH = "utterance_length"
REJECT_REMOVED = "removed_or_deleted"
REJECT_TOO_FEW = "too_few_utterances"


def filter_chit(utterances: list[str], cfg: CorpusConfig) -> FilterDecision:
    """Apply the four cleaning rules to one raw dialogue."""
    if any(_URL_RE.search(u) for u in utterances):
        return FilterDecision(False, REJECT_URL)
    for u in utterances:
        n = len(u.split())
        if n > cfg.max_utterance_words or n < cfg.min_utterance_words:
            return FilterDecision(False, REJECT_LENGTH)
    if any(_REMOVED_RE.search(u) for u in utterances):
        return FilterDecision(False, REJECT_REMOVED)
    if len(utterances) < cfg.min_dialogue_utterances:
        return FilterDecision(False, REJECT_TOO_FEW)
    return FilterDecision(True)


def extract_chit_belief(utterance: str, enabled: bool = True) -> BeliefState:
    """Noun-slot chit belief: content words in order of first appearance.

    With ``enabled=False`` (the ablation), the belief is a bare ``[chit]`` entry.
    """
    if not enabled:
        return BeliefState.from_pairs([(schema.CHIT_DOMAIN, [])])
    seen: list[str] = []
    for tok in utterance.lower().split():
        if tok in CLOSED_CLASS_WORDS or tok.startswith("["):
            continue
        if tok not in seen:
            seen.append(tok)
    return BeliefState.from_pairs([(schema.CHIT_DOMAIN, seen)])


def read_chit_fixture(path) -> list[list[str]]:
    """Plain-text fixture reader: one utterance per line, blank line between dialogues."""
    dialogues: list[list[str]] = []
    current: list[str] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                current.append(line)
            elif current:
                dialogues.append(current)
                current = []
    if current:
        dialogues.append(current)
    return dialogues


def chit_to_dialogue(utterances: list[str], chit_belief_enabled: bool = True) -> Dialogue:
    """Pair consecutive utterances into (user, response) turns; drop an odd trailer."""
    turns: list[DialogueTurn] = []
    usable = len(utterances) - len(utterances) % 2
    for t in range(0, usable, 2):
        user = utterances[t].lower()
        turns.append(DialogueTurn(
            user=user,
            belief=extract_chit_belief(user, chit_belief_enabled),
            db=schema.DB_NO_RESULT,
            act=CHIT_ACT,
            response=utterances[t + 1].lower(),
            turn_index=t // 2,
        ))
    return Dialogue(turns=turns, source="chit")


def load_chit_corpus(path, cfg: CorpusConfig) -> list[Dialogue]:
    """Read, filter and structure a chit fixture into schema dialogues."""
    kept = [d for d in read_chit_fixture(path) if filter_chit(d, cfg).keep]
    return [chit_to_dialogue(d, cfg.chit_belief_enabled) for d in kept]


# --- synthetic task-oriented dialogue generator ---

# Constraint slots the user may inform, as a per-domain cycle: a dialogue
# constrains (s, successor(s)), so the one missing slot after the opener is
# always determined and the system's request is predictable from the prefix.
GEN_CONSTRAINTS: dict[str, tuple[str, ...]] = {
    "hotel": ("price", "area", "stars"),
    "restaurant": ("food", "price", "area"),
    "attraction": ("type", "area"),
    "train": ("departure", "destination", "day"),
}


def _constraint_pair(rng: random.Random, domain: str, entity: dict) -> list[str]:
    order = [s for s in GEN_CONSTRAINTS[domain] if s in entity]
    if domain == "train" or len(order) <= 2:
        return order
    i = rng.randrange(len(order))
    return [order[i], order[(i + 1) % len(order)]]
GEN_REQUESTABLES: dict[str, tuple[str, ...]] = {
    "hotel": ("phone", "address", "postcode"),
    "restaurant": ("phone", "address", "postcode"),
    "attraction": ("phone", "address", "fee"),
    "train": ("price", "leave", "duration"),
}

# One canonical phrasing per pattern keeps the desk-scale language model's
# conditional entropy on structure tokens near zero; content words carry all
# the variation.
_OPENERS: dict[tuple[str, str], tuple[str, ...]] = {
    ("hotel", "price"): ("i am looking for a {v} hotel .",),
    ("hotel", "area"): ("i am looking for a hotel in the {v} .",),
    ("hotel", "stars"): ("i am looking for a {v} star hotel .",),
    ("restaurant", "food"): ("i want to find a {v} restaurant .",),
    ("restaurant", "price"): ("i am looking for a {v} restaurant .",),
    ("restaurant", "area"): ("i want a restaurant in the {v} .",),
    ("attraction", "type"): ("i am looking for a {v} to visit .",),
    ("attraction", "area"): ("what attractions are there in the {v} ?",),
}

_FOLLOWUPS: dict[tuple[str, str], tuple[str, ...]] = {
    ("hotel", "price"): ("something {v} please .",),
    ("hotel", "area"): ("i would like something in the {v} .",),
    ("hotel", "stars"): ("it should have {v} stars .",),
    ("restaurant", "food"): ("i would like {v} food .",),
    ("restaurant", "price"): ("something {v} please .",),
    ("restaurant", "area"): ("somewhere in the {v} please .",),
    ("attraction", "type"): ("a {v} sounds nice .",),
    ("attraction", "area"): ("somewhere in the {v} please .",),
}

_REQUEST_LINES: dict[str, tuple[str, ...]] = {
    "price": ("do you have a price range in mind ?",),
    "area": ("do you have a specific area you want to stay in ?",),
    "stars": ("how many stars should it have ?",),
    "food": ("what type of food would you like ?",),
    "type": ("what kind of attraction are you interested in ?",),
}

_RECOMMEND_LINES = (
    "i recommend [value_name] .",
    "how about [value_name] ?",
)

# Request phrasings carry the slot token verbatim so the act slots are a
# literal copy from the utterance.
_REQ_NOUN = {
    "phone": "phone number", "address": "address", "postcode": "postcode",
    "fee": "entrance fee", "price": "price", "leave": "leave time", "duration": "duration",
}
_INFORM_PHRASE = {
    "phone": "the phone number is [value_phone]",
    "address": "the address is [value_address]",
    "postcode": "the postcode is [value_postcode]",
    "fee": "the entrance fee is [value_fee]",
    "price": "the price is [value_price]",
    "leave": "the leave time is [value_leave]",
    "duration": "the duration is [value_duration]",
}

_BYE_USER = ("thank you , that is all .", "thanks , goodbye .")
_BYE_LINES = ("you are welcome . goodbye .",)


def _train_opener(constraints: dict[str, str]) -> str:
    return "i need a train from {departure} to {destination} on {day} .".format(**constraints)


def _compose_domain_turns(rng: random.Random, domain: str, constraints: dict[str, str],
                          requested: tuple[str, ...], compact: bool):
    """Yield (user, new_constraints, act, response) events for one domain flow.

    Compact flows state every constraint in the opening utterance; stepwise
    flows let the system request the missing slot first.
    """
    events = []
    slots = list(constraints)
    if domain == "train":
        events.append((_train_opener(constraints), dict(constraints),
                       SystemAct(domain, "recommend", ("name",)),
                       rng.choice(_RECOMMEND_LINES)))
    elif compact or len(slots) < 2:
        first, rest = slots[0], slots[1:]
        opener = rng.choice(_OPENERS[(domain, first)]).format(v=constraints[first])
        extra = " ".join(
            rng.choice(_FOLLOWUPS[(domain, s)]).format(v=constraints[s]) for s in rest
        )
        user = f"{opener} {extra}".strip()
        events.append((user, dict(constraints),
                       SystemAct(domain, "recommend", ("name",)),
                       rng.choice(_RECOMMEND_LINES)))
    else:
        informed: dict[str, str] = {}
        for i, slot in enumerate(slots):
            if i == 0:
                user = rng.choice(_OPENERS[(domain, slot)]).format(v=constraints[slot])
            else:
                user = rng.choice(_FOLLOWUPS[(domain, slot)]).format(v=constraints[slot])
            informed[slot] = constraints[slot]
            if i < len(slots) - 1:
                nxt = slots[i + 1]
                events.append((user, dict(informed),
                               SystemAct(domain, "request", (nxt,)),
                               rng.choice(_REQUEST_LINES[nxt])))
            else:
                events.append((user, dict(informed),
                               SystemAct(domain, "recommend", ("name",)),
                               rng.choice(_RECOMMEND_LINES)))
    # one single-slot request turn per requested slot keeps the copy path literal
    for slot in requested:
        user = f"what is the {_REQ_NOUN[slot]} ?"
        events.append((user, {}, SystemAct(domain, "inform", (slot,)),
                       _INFORM_PHRASE[slot] + " ."))
    return events


def generate_tod_corpus(template_db: EntityDatabase, count: int, seed: int,
                        buckets=DEFAULT_BUCKETS, two_domain_rate: float = 0.15) -> list[Dialogue]:
    """Emit schema-consistent synthetic task dialogues with self-consistent goals."""
    usable = [d for d in GEN_CONSTRAINTS if d in template_db.tables and template_db.tables[d]]
    if not usable:
        raise ValueError("template database has no usable domain tables")
    rng = random.Random(seed)
    dialogues: list[Dialogue] = []
    for _ in range(count):
        n_domains = 2 if (len(usable) > 1 and rng.random() < two_domain_rate) else 1
        if n_domains == 2 and "train" in usable:
            # tourist-flow pairing: a venue first, then the train out; the train
            # intro restates every constraint, which keeps the belief handover local
            first = rng.choice([d for d in usable if d != "train"])
            domains = [first, "train"]
        else:
            domains = rng.sample(usable, n_domains)
        goal = TaskGoal()
        belief_pairs: list[tuple[str, dict[str, str]]] = []
        turns: list[DialogueTurn] = []
        for di, domain in enumerate(domains):
            entity = rng.choice(template_db.tables[domain])
            slot_pool = _constraint_pair(rng, domain, entity)
            constraints = {s: entity[s] for s in slot_pool}
            req_pool = [s for s in GEN_REQUESTABLES[domain] if s in entity]
            n_req = rng.choice((1, 2)) if n_domains == 1 else 1
            requested = tuple(rng.sample(req_pool, min(len(req_pool), n_req)))
            goal.constraints[domain] = dict(constraints)
            goal.requested[domain] = requested
            # domain switches stay stepwise: one new value per utterance keeps
            # the belief update local and learnable
            compact = di == 0 and rng.random() < 0.35
            for user, informed, act, response in _compose_domain_turns(rng, domain, constraints,
                                                                       requested, compact):
                if informed:
                    # newest-domain-first: the active domain leads the belief
                    if belief_pairs and belief_pairs[0][0] == domain:
                        belief_pairs[0] = (domain, {**belief_pairs[0][1], **informed})
                    else:
                        belief_pairs.insert(0, (domain, dict(informed)))
                belief = BeliefState.from_pairs([(d, dict(s)) for d, s in belief_pairs])
                result = template_db.query(belief, buckets)
                turns.append(DialogueTurn(
                    user=user, belief=belief, db=result.token, act=act,
                    response=response, turn_index=len(turns),
                ))
        bye_user = rng.choice(_BYE_USER)
        belief = BeliefState.from_pairs([(d, dict(s)) for d, s in belief_pairs])
        result = template_db.query(belief, buckets)
        turns.append(DialogueTurn(
            user=bye_user, belief=belief, db=result.token,
            act=SystemAct(domains[-1], "bye"), response=rng.choice(_BYE_LINES),
            turn_index=len(turns),
        ))
        dialogues.append(Dialogue(turns=turns, source="tod", goal=goal))
    return dialogues


def mix_corpora(chit: list[Dialogue], tod: list[Dialogue], seed: int) -> list[Dialogue]:
    """Seeded uniform shuffle of the concatenation; mixing is dialogue-level."""
    if not chit or not tod:
        raise ValueError("both corpora must be nonempty")
    combined = list(chit) + list(tod)
    random.Random(seed).shuffle(combined)
    return combined


def build_mixed_corpus(chit_path, template_db: EntityDatabase, cfg: CorpusConfig) -> list[Dialogue]:
    """Fixture-to-corpus pipeline: filter chit, synthesize TOD, mix."""
    chit = load_chit_corpus(chit_path, cfg)
    if len(chit) < cfg.chit_count:
        raise ValueError(f"only {len(chit)} chit dialogues survive filtering, need {cfg.chit_count}")
    rng = random.Random(cfg.seed)
    chit = rng.sample(chit, cfg.chit_count)
    tod = generate_tod_corpus(template_db, cfg.tod_count, cfg.seed)
    return mix_corpora(chit, tod, cfg.seed)
