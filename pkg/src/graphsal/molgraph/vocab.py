from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .graph import MolecularGraph


@dataclass(frozen=True)
class AtomVocabulary:
    """(element, aromatic) pairs mapped to dense indices.

    Index ``len(entries)`` is reserved for anything not in the vocabulary.
    """

    entries: tuple[tuple[str, bool], ...]

    def __post_init__(self):
        entries = tuple((str(e), bool(a)) for e, a in self.entries)
        if len(set(entries)) != len(entries):
            raise ValueError("duplicate vocabulary entries")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_index", {key: k for k, key in enumerate(entries)})

    @property
    def unknown_index(self) -> int:
        return len(self.entries)

    @property
    def size(self) -> int:
        """Number of embedding rows needed, unknown bucket included."""
        return len(self.entries) + 1

    def index(self, element: str, aromatic: bool) -> int:
        return self._index.get((element, bool(aromatic)), self.unknown_index)

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "AtomVocabulary":
        """Build from SMILES-style tokens: lowercase means aromatic (``"c"``, ``"n"``)."""
        return cls(tuple((t.capitalize(), t[0].islower()) for t in tokens))

    @classmethod
    def build(cls, graphs: Iterable[MolecularGraph]) -> "AtomVocabulary":
        seen = {(a.element, a.aromatic) for g in graphs for a in g.atoms}
        return cls(tuple(sorted(seen)))

    def to_json(self) -> str:
        return json.dumps([[e, a] for e, a in self.entries])

    @classmethod
    def from_json(cls, text: str) -> "AtomVocabulary":
        return cls(tuple((e, a) for e, a in json.loads(text)))


def featurize(graph: MolecularGraph, vocab: AtomVocabulary) -> list[int]:
    return [vocab.index(a.element, a.aromatic) for a in graph.atoms]
