"""Brute-force metric oracles in exact rational arithmetic."""

from fractions import Fraction
from itertools import product

import numpy as np


def normalized(scores):
    lo, hi = min(scores), max(scores)
    if lo == hi:
        return [Fraction(0)] * len(scores)
    return [Fraction(s - lo) / Fraction(hi - lo) for s in scores]


def ranked_hits(scores_per_molecule, truths):
    """Hit flags in rank order: every atom compared against every other."""
    pool = []
    for m, (scores, truth) in enumerate(zip(scores_per_molecule, truths)):
        for a, v in enumerate(normalized(list(scores))):
            pool.append((v, m, a, a in set(truth)))

    def beats(x, y):
        return x[0] > y[0] or (x[0] == y[0] and (x[1], x[2]) < (y[1], y[2]))

    # rank = number of atoms that beat this one
    ranked = [None] * len(pool)
    for x in pool:
        ranked[sum(beats(y, x) for y in pool)] = x[3]
    return ranked


def pr_points(scores_per_molecule, truths):
    hits = ranked_hits(scores_per_molecule, truths)
    total = sum(hits)
    out, tp = [], 0
    for k, h in enumerate(hits, start=1):
        tp += h
        out.append((Fraction(tp, total), Fraction(tp, k)))
    return out


def average_precision(scores_per_molecule, truths):
    """Mean over true atoms of the precision at that atom's rank."""
    hits = ranked_hits(scores_per_molecule, truths)
    tp, acc = 0, Fraction(0)
    for k, h in enumerate(hits, start=1):
        if h:
            tp += 1
            acc += Fraction(tp, k)
    return acc / sum(hits)


def step_integral(points):
    """Rectangles under the enumerated points, right-continuous precision."""
    area, prev = Fraction(0), Fraction(0)
    for r, p in points:
        area += (r - prev) * p
        prev = r
    return area


def pair_count_roc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    wins = sum(Fraction(1) if p > n else Fraction(1, 2) if p == n else Fraction(0) for p in pos for n in neg)
    return wins / (len(pos) * len(neg))


def metric_cases(max_size=8, exhaustive_up_to=4, random_per_size=1500, seed=0):
    """(scores, truth) pairs for single molecules.

    Sizes up to ``exhaustive_up_to`` enumerate every score vector over a
    three-value alphabet and every non-empty truth set; larger sizes are sampled.
    """
    rng = np.random.default_rng(seed)
    for n in range(1, max_size + 1):
        if n <= exhaustive_up_to:
            for scores in product(range(3), repeat=n):
                for bits in product((0, 1), repeat=n):
                    truth = [a for a in range(n) if bits[a]]
                    if truth:
                        yield list(scores), truth
        else:
            for _ in range(random_per_size):
                scores = rng.integers(0, rng.integers(2, 6), size=n).tolist()
                truth = [a for a in range(n) if rng.random() < 0.4] or [int(rng.integers(n))]
                yield scores, truth


def pooled_cases(count=800, seed=1):
    """Multi-molecule inputs with at most 8 atoms in total."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        sizes = []
        while sum(sizes) < 8 and (not sizes or rng.random() < 0.7):
            sizes.append(int(rng.integers(1, 9 - sum(sizes))))
        mols, truths = [], []
        for n in sizes:
            mols.append(rng.integers(0, 4, size=n).tolist())
            truths.append([a for a in range(n) if rng.random() < 0.4] or [int(rng.integers(n))])
        yield mols, truths


def roc_cases(max_size=8, exhaustive_up_to=6, random_per_size=1500, seed=2):
    rng = np.random.default_rng(seed)
    for n in range(2, max_size + 1):
        if n <= exhaustive_up_to:
            for scores in product(range(3), repeat=n):
                for labels in product((0, 1), repeat=n):
                    if 0 < sum(labels) < n:
                        yield list(scores), list(labels)
        else:
            for _ in range(random_per_size):
                scores = rng.integers(0, 4, size=n).tolist()
                labels = rng.integers(0, 2, size=n).tolist()
                if 0 < sum(labels) < n:
                    yield scores, labels
