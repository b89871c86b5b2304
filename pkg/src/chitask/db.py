"""Entity database queried between belief generation and act generation.

Matching is exact string equality after lowercasing; the match count maps to
one of the closed db tokens through a configurable bucket table.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import schema


class UnknownDomain(KeyError):
    """Belief names a domain with no table; a generation error, not a crash."""


@dataclass(frozen=True)
class BucketTable:
    """Order-preserving map from match counts to db tokens.

    ``boundaries[k]`` is the inclusive upper count for bucket ``db_k``; counts
    above the last boundary fall into the final non-nore bucket.
    """

    boundaries: tuple[int, ...] = (0, 1, 3)  # db_0 <= 0, db_1 <= 1, db_2 <= 3, db_3 above

    def token_for(self, count: int) -> str:
        for i, upper in enumerate(self.boundaries):
            if count <= upper:
                return f"db_{i}"
        return f"db_{len(self.boundaries)}"

    def to_obj(self) -> list[int]:
        return list(self.boundaries)

    @classmethod
    def from_obj(cls, obj) -> "BucketTable":
        return cls(tuple(int(x) for x in obj))


DEFAULT_BUCKETS = BucketTable()


@dataclass
class QueryResult:
    matches: list[dict]
    token: str
    domain: str | None


class EntityDatabase:
    """Per-domain entity tables; every entity is a flat slot->value record with a name."""

    def __init__(self, tables: dict[str, list[dict]]):
        self.tables = {
            dom: [{k: str(v).lower() for k, v in ent.items()} for ent in ents]
            for dom, ents in tables.items()
        }

    def domains(self) -> tuple[str, ...]:
        return tuple(self.tables)

    def entities(self, domain: str) -> list[dict]:
        if domain not in self.tables:
            raise UnknownDomain(domain)
        return self.tables[domain]

    def query(self, belief: schema.BeliefState, buckets: BucketTable = DEFAULT_BUCKETS) -> QueryResult:
        """Match entities of the most recently constrained TOD domain.

        A belief without any TOD domain yields ``db_nore`` and no matches.
        """
        domain = belief.latest_tod_domain()
        if domain is None:
            return QueryResult([], schema.DB_NO_RESULT, None)
        if domain not in self.tables:
            raise UnknownDomain(domain)
        constraints = {k.lower(): v.lower() for k, v in belief.constraints_for(domain).items()}
        matches = [
            ent for ent in self.tables[domain]
            if all(ent.get(slot) == value for slot, value in constraints.items())
        ]
        return QueryResult(matches, buckets.token_for(len(matches)), domain)

    def validate(self, registry=schema.SLOT_REGISTRY) -> list[str]:
        """Registry conformance problems, empty when the fixture is clean."""
        problems: list[str] = []
        for dom, ents in self.tables.items():
            if dom not in schema.TOD_DOMAINS:
                problems.append(f"unknown domain table: {dom}")
                continue
            allowed = set(registry.get(dom, ()))
            for i, ent in enumerate(ents):
                if "name" not in ent:
                    problems.append(f"{dom}[{i}]: entity has no name slot")
                for slot in ent:
                    if slot not in allowed:
                        problems.append(f"{dom}[{i}]: slot {slot!r} not in registry")
        return problems

    def to_obj(self) -> dict:
        return {dom: list(ents) for dom, ents in self.tables.items()}

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_obj(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "EntityDatabase":
        with open(path, "r", encoding="utf-8") as fh:
            return cls(json.load(fh))
