"""Backtracking substructure search.

A motif embeds into a target when there is an injective atom map preserving
element, aromaticity and the order of every motif bond.  Extra target bonds
between mapped atoms are allowed (monomorphism, as in ordinary substructure
search).
"""

from __future__ import annotations

from .graph import MolecularGraph


def _atoms_compatible(a, b) -> bool:
    return a.element == b.element and a.aromatic == b.aromatic


def _search_order(motif: MolecularGraph) -> list[int]:
    """Motif atoms ordered so each one after the first touches an earlier one."""
    n = len(motif.atoms)
    degrees = motif.degrees
    order: list[int] = []
    placed = [False] * n
    while len(order) < n:
        start = max((k for k in range(n) if not placed[k]), key=lambda k: (degrees[k], -k))
        placed[start] = True
        order.append(start)
        head = len(order) - 1
        while head < len(order):
            for v, _ in sorted(motif.neighbors[order[head]]):
                if not placed[v]:
                    placed[v] = True
                    order.append(v)
            head += 1
    return order


def iter_embeddings(graph: MolecularGraph, motif: MolecularGraph):
    """Yield every embedding as a tuple ``mapping[motif_atom] = graph_atom``."""
    n_m = len(motif.atoms)
    if n_m == 0 or n_m > len(graph.atoms):
        return
    order = _search_order(motif)
    pos = {a: k for k, a in enumerate(order)}
    # for each motif atom, bonds to motif atoms placed earlier
    back = [
        [(u, o) for u, o in motif.neighbors[a] if pos[u] < pos[a]]
        for a in order
    ]
    mapping = [-1] * n_m
    used = [False] * len(graph.atoms)
    g_deg = graph.degrees
    m_deg = motif.degrees

    def candidates(k):
        a = order[k]
        if back[k]:
            anchor, _ = back[k][0]
            return [v for v, _ in graph.neighbors[mapping[anchor]]]
        return range(len(graph.atoms))

    def extend(k):
        if k == n_m:
            yield tuple(mapping)
            return
        a = order[k]
        for v in candidates(k):
            if used[v] or g_deg[v] < m_deg[a]:
                continue
            if not _atoms_compatible(motif.atoms[a], graph.atoms[v]):
                continue
            if any(graph.bond_order(mapping[u], v) != o for u, o in back[k]):
                continue
            mapping[a] = v
            used[v] = True
            yield from extend(k + 1)
            used[v] = False
            mapping[a] = -1

    yield from extend(0)


def match_motif(graph: MolecularGraph, motif: MolecularGraph) -> list[frozenset[int]]:
    """Distinct atom sets covered by embeddings of ``motif`` in ``graph``, sorted."""
    found = {frozenset(m) for m in iter_embeddings(graph, motif)}
    return sorted(found, key=sorted)


def motif_atoms(graph: MolecularGraph, motif: MolecularGraph) -> set[int]:
    """Union of all matched atom sets."""
    out: set[int] = set()
    for s in match_motif(graph, motif):
        out |= s
    return out
