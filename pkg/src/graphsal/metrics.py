"""Ranking metrics for saliency against ground-truth atoms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata


@dataclass(frozen=True)
class PRCurve:
    """Precision/recall after each rank cut, best-scored atom first."""

    recall: np.ndarray
    precision: np.ndarray
    thresholds: np.ndarray

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.recall.tolist(), self.precision.tolist()))


def minmax(scores) -> np.ndarray:
    s = np.asarray(scores, dtype=np.float64)
    lo, hi = s.min(), s.max()
    if hi == lo:
        return np.zeros_like(s)
    return (s - lo) / (hi - lo)


def saliency_pr_curve(scores_per_molecule, truths) -> PRCurve:
    """Pool atoms of all molecules and rank them by normalized score.

    Each molecule's scores are min-max scaled to [0, 1] first.  Ties are broken
    by molecule index, then atom index.  Every molecule must have a non-empty
    truth set.
    """
    if len(scores_per_molecule) != len(truths):
        raise ValueError("need one truth set per molecule")
    keys, hits, values = [], [], []
    n_true = 0
    for m, (scores, truth) in enumerate(zip(scores_per_molecule, truths)):
        truth = set(truth)
        if not truth:
            raise ValueError(f"molecule {m} has an empty ground-truth set")
        s = minmax(scores)
        if any(not 0 <= t < len(s) for t in truth):
            raise ValueError(f"molecule {m}: truth atom outside the score vector")
        n_true += len(truth)
        for a, v in enumerate(s):
            keys.append((-v, m, a))
            values.append(v)
            hits.append(a in truth)
    if not keys:
        raise ValueError("no molecules to evaluate")
    order = sorted(range(len(keys)), key=keys.__getitem__)
    hit = np.asarray(hits, dtype=np.float64)[order]
    tp = np.cumsum(hit)
    k = np.arange(1, len(order) + 1)
    return PRCurve(tp / n_true, tp / k, np.asarray(values)[order])


def prc_auc(curve: PRCurve) -> float:
    """Area under the step curve: each recall increment weighted by the
    precision reached at that cut."""
    if len(curve.recall) == 0:
        raise ValueError("empty precision-recall curve")
    r = np.concatenate([[0.0], curve.recall])
    return float(np.sum(np.diff(r) * curve.precision))


def per_molecule_prc_auc(scores_per_molecule, truths) -> float:
    """Mean of per-molecule areas (alternative to pooling)."""
    return float(np.mean([
        prc_auc(saliency_pr_curve([s], [t])) for s, t in zip(scores_per_molecule, truths)
    ]))


def roc_auc(scores, labels) -> float:
    """Mann-Whitney statistic; a tied positive/negative pair counts one half."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    pos = y == 1
    n_pos = int(pos.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("roc_auc needs both classes present")
    ranks = rankdata(s)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))
