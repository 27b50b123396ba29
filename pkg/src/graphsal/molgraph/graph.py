from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

BOND_ORDERS = ("single", "double", "triple", "aromatic")


@dataclass(frozen=True)
class Atom:
    element: str
    charge: int = 0
    aromatic: bool = False


@dataclass(frozen=True)
class Bond:
    i: int
    j: int
    order: str = "single"


@dataclass(frozen=True)
class MolecularGraph:
    """Heavy-atom molecular graph; hydrogens are never nodes."""

    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "bonds", tuple(self.bonds))
        n = len(self.atoms)
        seen = set()
        for b in self.bonds:
            if not (0 <= b.i < n and 0 <= b.j < n):
                raise ValueError(f"bond ({b.i}, {b.j}) references a missing atom")
            if b.i == b.j:
                raise ValueError(f"self-bond on atom {b.i}")
            if b.order not in BOND_ORDERS:
                raise ValueError(f"unknown bond order {b.order!r}")
            key = (min(b.i, b.j), max(b.i, b.j))
            if key in seen:
                raise ValueError(f"duplicate bond {key}")
            seen.add(key)

    def __len__(self):
        return len(self.atoms)

    @cached_property
    def neighbors(self) -> tuple[tuple[tuple[int, str], ...], ...]:
        """Per atom, the (neighbor, bond order) pairs in bond order."""
        adj: list[list[tuple[int, str]]] = [[] for _ in self.atoms]
        for b in self.bonds:
            adj[b.i].append((b.j, b.order))
            adj[b.j].append((b.i, b.order))
        return tuple(tuple(a) for a in adj)

    @property
    def degrees(self) -> list[int]:
        return [len(nb) for nb in self.neighbors]

    def bond_order(self, i: int, j: int) -> str | None:
        for k, order in self.neighbors[i]:
            if k == j:
                return order
        return None

    def is_connected(self) -> bool:
        if not self.atoms:
            return True
        seen = {0}
        stack = [0]
        while stack:
            for k, _ in self.neighbors[stack.pop()]:
                if k not in seen:
                    seen.add(k)
                    stack.append(k)
        return len(seen) == len(self.atoms)

    def adjacency_list(self) -> list[tuple[int, int, str]]:
        return sorted((min(b.i, b.j), max(b.i, b.j), b.order) for b in self.bonds)

    def permuted(self, perm) -> "MolecularGraph":
        """Relabel atom ``k`` as ``perm[k]``."""
        perm = list(perm)
        if sorted(perm) != list(range(len(self.atoms))):
            raise ValueError("perm must be a permutation of the atom indices")
        atoms = [None] * len(self.atoms)
        for old, new in enumerate(perm):
            atoms[new] = self.atoms[old]
        bonds = [Bond(perm[b.i], perm[b.j], b.order) for b in self.bonds]
        return MolecularGraph(tuple(atoms), tuple(bonds))
