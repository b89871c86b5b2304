"""Word-level vocabulary mapping tokens to integer ids.

Whitespace tokenization, lowercased. All schema special tokens (markers,
domain/act/db tokens, placeholders, pad/unk/sos) occupy the low id range and
never split; unknown words map to ``<unk>``; pad is always id 0.
"""

from __future__ import annotations

import hashlib
from collections import Counter

from . import schema


class EmptyCorpus(ValueError):
    """Vocabulary construction over an empty corpus."""


class Vocabulary:
    def __init__(self, words):
        words = list(words)
        self.word_of = words
        self.id_of = {w: i for i, w in enumerate(words)}
        if len(self.id_of) != len(words):
            raise ValueError("duplicate tokens in vocabulary")
        self.special = tuple(schema.special_tokens())
        self.reserved_boundary = len(self.special)
        self.pad_id = self.id_of[schema.PAD_TOKEN]
        self.unk_id = self.id_of[schema.UNK_TOKEN]
        self.sos_id = self.id_of[schema.SOS_TOKEN]

    def __len__(self) -> int:
        return len(self.word_of)

    def __contains__(self, word: str) -> bool:
        return word in self.id_of

    def encode(self, text: str) -> list[int]:
        unk = self.unk_id
        return [self.id_of.get(tok, unk) for tok in text.lower().split()]

    def decode(self, ids) -> str:
        return " ".join(self.word_of[i] for i in ids)

    def token_id(self, word: str) -> int:
        return self.id_of[word]

    def as_text(self) -> str:
        return "\n".join(self.word_of) + "\n"

    def sha256(self) -> str:
        return hashlib.sha256(self.as_text().encode("utf-8")).hexdigest()

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.as_text())

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path, "r", encoding="utf-8") as fh:
            words = [line.rstrip("\n") for line in fh]
        while words and words[-1] == "":
            words.pop()
        return cls(words)


def build_vocab(corpus, min_freq: int = 1) -> Vocabulary:
    """Specials first (fixed order), then corpus words with frequency >= min_freq,
    by descending frequency with lexicographic tie-break."""
    corpus = list(corpus)
    if not corpus:
        raise EmptyCorpus("cannot build a vocabulary from an empty corpus")
    specials = schema.special_tokens()
    special_set = set(specials)
    counts: Counter[str] = Counter()
    for dialogue in corpus:
        for turn in dialogue.turns:
            for tok in schema.serialize_turn(turn).lower().split():
                if tok not in special_set:
                    counts[tok] += 1
    kept = [w for w, c in counts.items() if c >= min_freq]
    kept.sort(key=lambda w: (-counts[w], w))
    return Vocabulary(list(specials) + kept)
