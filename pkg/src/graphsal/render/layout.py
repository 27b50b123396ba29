"""2-D coordinates for molecule depiction.

Stress majorization on target distances: bonded atoms sit at unit length,
atoms sharing a ring are placed at the chord lengths of a regular polygon,
everything else at its shortest-path distance.  Deterministic for a given
graph and seed.
"""

from __future__ import annotations

import networkx as nx
import numpy as np

from ..molgraph import MolecularGraph


def _ordered_ring(g: nx.Graph, nodes) -> list[int] | None:
    """Cyclic order of a ring's atoms (a Hamiltonian cycle of the ring)."""
    nodes = sorted(nodes)
    members = set(nodes)
    start = nodes[0]
    path = [start]

    def walk():
        if len(path) == len(nodes):
            return g.has_edge(path[-1], start)
        for v in sorted(g.neighbors(path[-1])):
            if v in members and v not in path:
                path.append(v)
                if walk():
                    return True
                path.pop()
        return False

    return path if walk() else None


def rings(graph: MolecularGraph) -> list[list[int]]:
    g = nx.Graph()
    g.add_nodes_from(range(len(graph.atoms)))
    g.add_edges_from((b.i, b.j) for b in graph.bonds)
    out = []
    for cycle in sorted(nx.minimum_cycle_basis(g), key=lambda c: (len(c), sorted(c))):
        ordered = _ordered_ring(g, cycle)
        if ordered is not None:
            out.append(ordered)
    return out


def target_distances(graph: MolecularGraph) -> np.ndarray:
    n = len(graph.atoms)
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from((b.i, b.j) for b in graph.bonds)
    d = np.zeros((n, n))
    lengths = dict(nx.all_pairs_shortest_path_length(g))
    for i in range(n):
        for j in range(n):
            if i != j:
                # zigzag chain: path length k spans about 0.87 k bond lengths
                k = lengths[i][j]
                d[i, j] = 1.0 if k == 1 else 0.87 * k + 0.13
    for ring in rings(graph):
        k = len(ring)
        radius = 1.0 / (2.0 * np.sin(np.pi / k))
        for a in range(k):
            for b in range(a + 1, k):
                t = min(b - a, k - (b - a))
                chord = 2.0 * radius * np.sin(np.pi * t / k)
                d[ring[a], ring[b]] = d[ring[b], ring[a]] = chord
    return d


def compute_layout(graph: MolecularGraph, seed: int = 0, iterations: int = 300) -> np.ndarray:
    """Atom coordinates, shape ``(n, 2)``, in bond-length units, centred."""
    n = len(graph.atoms)
    if n == 1:
        return np.zeros((1, 2))
    d = target_distances(graph)
    w = np.zeros_like(d)
    off = d > 0
    w[off] = d[off] ** -2
    v = -w.copy()
    v[np.diag_indices(n)] = w.sum(axis=1)
    v_pinv = np.linalg.pinv(v)

    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, 2)) * np.sqrt(n)
    for _ in range(iterations):
        diff = x[:, None, :] - x[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=-1))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dist > 1e-12, w * d / dist, 0.0)
        b = -ratio
        b[np.diag_indices(n)] = ratio.sum(axis=1)
        x_new = v_pinv @ (b @ x)
        if np.max(np.abs(x_new - x)) < 1e-7:
            x = x_new
            break
        x = x_new

    x = x - x.mean(axis=0)
    # principal axis horizontal, with a sign convention so output is canonical
    _, _, vt = np.linalg.svd(x, full_matrices=False)
    x = x @ vt.T
    for axis in range(2):
        if x[0, axis] > 0:
            x[:, axis] = -x[:, axis]
    return x
