"""Random molecule-shaped graphs with planted ground-truth substructures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Atom, Bond, MolecularGraph
from .match import match_motif
from .smiles import parse_smiles

# valence units available per atom; aromatic bonds count one unit
VALENCE = {
    ("C", False): 4, ("N", False): 3, ("O", False): 2, ("S", False): 2,
    ("C", True): 3, ("N", True): 2, ("O", True): 2, ("S", True): 2,
    ("F", False): 1, ("Cl", False): 1, ("Br", False): 1, ("I", False): 1,
    ("B", False): 3, ("P", False): 3,
}
BOND_UNITS = {"single": 1, "double": 2, "triple": 3, "aromatic": 1}

CHAIN_ATOMS = (("C", 0.6), ("N", 0.15), ("O", 0.15), ("S", 0.1))
DEFAULT_DECOYS = ("c1ccccc1", "C1CCCCC1", "C1CCNCC1", "c1cncnc1")


def valence_cap(atom: Atom) -> int:
    return VALENCE.get((atom.element, atom.aromatic), 4)


@dataclass(frozen=True)
class GeneratorConfig:
    count: int
    motif: str = "c1ccncc1"
    min_atoms: int = 8
    max_atoms: int = 24
    base_rate: float = 0.3
    seed: int = 0
    decoys: tuple[str, ...] = DEFAULT_DECOYS
    ring_prob: float = 0.2


class _Builder:
    def __init__(self):
        self.atoms: list[Atom] = []
        self.bonds: list[Bond] = []
        self.free: list[int] = []

    def __len__(self):
        return len(self.atoms)

    def add_fragment(self, frag: MolecularGraph) -> int:
        base = len(self.atoms)
        used = [0] * len(frag.atoms)
        for b in frag.bonds:
            used[b.i] += BOND_UNITS[b.order]
            used[b.j] += BOND_UNITS[b.order]
        for a, u in zip(frag.atoms, used):
            self.atoms.append(a)
            self.free.append(max(valence_cap(a) - u, 0))
        for b in frag.bonds:
            self.bonds.append(Bond(b.i + base, b.j + base, b.order))
        return base

    def connect(self, i: int, j: int, order: str = "single"):
        units = BOND_UNITS[order]
        self.bonds.append(Bond(i, j, order))
        self.free[i] -= units
        self.free[j] -= units

    def open_sites(self, units: int = 1) -> list[int]:
        return [k for k, f in enumerate(self.free) if f >= units]

    def graph(self) -> MolecularGraph:
        return MolecularGraph(tuple(self.atoms), tuple(self.bonds))


def _pick(rng: np.random.Generator, weighted):
    items, weights = zip(*weighted)
    p = np.asarray(weights, dtype=float)
    return items[rng.choice(len(items), p=p / p.sum())]


def _grow(builder: _Builder, target: int, rng, rings, ring_prob, chain_atoms=CHAIN_ATOMS):
    """Attach atoms and rings until ``target`` atoms or no open valence."""
    while len(builder) < target:
        sites = builder.open_sites()
        if not sites:
            break
        site = sites[rng.integers(len(sites))]
        room = target - len(builder)
        fitting = [r for r in rings if len(r.atoms) <= room]
        if fitting and rng.random() < ring_prob:
            ring = fitting[rng.integers(len(fitting))]
            base = builder.add_fragment(ring)
            anchors = [base + k for k in range(len(ring.atoms)) if builder.free[base + k] >= 1]
            if anchors:
                builder.connect(site, anchors[rng.integers(len(anchors))])
            else:
                # ring with no substitutable atom; undo
                del builder.atoms[base:], builder.free[base:]
                builder.bonds = [b for b in builder.bonds if b.i < base and b.j < base]
            continue
        element = _pick(rng, chain_atoms)
        atom = Atom(element)
        k = builder.add_fragment(MolecularGraph((atom,)))
        order = "single"
        if builder.free[site] >= 2 and builder.free[k] >= 2 and rng.random() < 0.15:
            order = "double"
        builder.connect(site, k, order)


def _shuffled(graph: MolecularGraph, rng) -> MolecularGraph:
    return graph.permuted(rng.permutation(len(graph.atoms)))


def generate_synthetic_dataset(config: GeneratorConfig) -> list[tuple[MolecularGraph, int]]:
    """Graphs labelled 1 iff they contain ``config.motif``.

    Exactly ``round(count * base_rate)`` graphs receive a planted copy of the
    motif.  Labels are recomputed by substructure search afterwards, so a motif
    formed by accident is still labelled correctly.
    """
    if config.count < 1:
        raise ValueError("count must be at least 1")
    if not 0.0 <= config.base_rate <= 1.0:
        raise ValueError("base_rate must lie in [0, 1]")
    if config.min_atoms < 1 or config.min_atoms > config.max_atoms:
        raise ValueError("need 1 <= min_atoms <= max_atoms")
    motif = parse_smiles(config.motif)
    if len(motif.atoms) > config.max_atoms:
        raise ValueError(
            f"motif has {len(motif.atoms)} atoms, more than max_atoms={config.max_atoms}"
        )
    rings = [parse_smiles(s) for s in config.decoys]

    rng = np.random.default_rng(config.seed)
    n_pos = int(round(config.count * config.base_rate))
    planted = np.zeros(config.count, dtype=bool)
    planted[:n_pos] = True
    rng.shuffle(planted)

    out = []
    for plant in planted:
        target = int(rng.integers(config.min_atoms, config.max_atoms + 1))
        for _ in range(20):
            b = _Builder()
            if plant:
                b.add_fragment(motif)
                target = max(target, len(motif.atoms))
            else:
                start = rings[rng.integers(len(rings))] if rings and rng.random() < 0.5 else None
                if start is not None and len(start.atoms) <= target:
                    b.add_fragment(start)
                else:
                    b.add_fragment(MolecularGraph((Atom("C"),)))
            _grow(b, target, rng, rings, config.ring_prob)
            graph = _shuffled(b.graph(), rng)
            label = int(bool(match_motif(graph, motif)))
            if plant or label == 0:
                break
        out.append((graph, label))
    return out


@dataclass(frozen=True)
class SolubilityConfig:
    """Additive group-contribution target.

    Each hydroxyl oxygen adds ``hydroxyl``; every aromatic and aliphatic carbon
    adds its (negative) increment; Gaussian noise of ``noise`` sd on top.
    """

    count: int
    seed: int = 0
    min_atoms: int = 6
    max_atoms: int = 20
    positive_rate: float = 0.5
    hydroxyl: float = 1.5
    aromatic_carbon: float = -0.3
    aliphatic_carbon: float = -0.2
    nitrogen: float = 0.2
    intercept: float = 1.0
    noise: float = 0.1


SOLUBILITY_RINGS = ("c1ccccc1", "C1CCCCC1")
SOLUBILITY_CHAIN = (("C", 0.8), ("N", 0.2))


def solubility_value(graph: MolecularGraph, config: SolubilityConfig) -> float:
    """Noise-free group-contribution value of ``graph``."""
    value = config.intercept
    for a in graph.atoms:
        if a.element == "O":
            value += config.hydroxyl
        elif a.element == "C":
            value += config.aromatic_carbon if a.aromatic else config.aliphatic_carbon
        elif a.element == "N":
            value += config.nitrogen
    return value


def generate_solubility_dataset(config: SolubilityConfig) -> list[tuple[MolecularGraph, float]]:
    """Regression graphs; oxygen only ever appears as planted hydroxyl groups."""
    if config.count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(config.seed)
    rings = [parse_smiles(s) for s in SOLUBILITY_RINGS]
    out = []
    for _ in range(config.count):
        target = int(rng.integers(config.min_atoms, config.max_atoms + 1))
        b = _Builder()
        if rng.random() < 0.5:
            b.add_fragment(rings[0])
        else:
            b.add_fragment(MolecularGraph((Atom("C"),)))
        n_oh = int(rng.integers(1, 3)) if rng.random() < config.positive_rate else 0
        _grow(b, target - n_oh, rng, rings, 0.25, SOLUBILITY_CHAIN)
        for _ in range(n_oh):
            carbons = [k for k in b.open_sites() if b.atoms[k].element == "C"]
            if not carbons:
                break
            k = b.add_fragment(MolecularGraph((Atom("O"),)))
            b.connect(carbons[rng.integers(len(carbons))], k)
            b.free[k] = 0  # keep it a terminal hydroxyl
        graph = _shuffled(b.graph(), rng)
        value = solubility_value(graph, config) + config.noise * rng.standard_normal()
        out.append((graph, float(value)))
    return out
