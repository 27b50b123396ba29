import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphsal.metrics import (
    minmax,
    per_molecule_prc_auc,
    prc_auc,
    roc_auc,
    saliency_pr_curve,
)
from oracles import (
    average_precision,
    metric_cases,
    pair_count_roc,
    pooled_cases,
    pr_points,
    roc_cases,
    step_integral,
)


def test_three_atom_example():
    curve = saliency_pr_curve([[0.9, 0.8, 0.1]], [{0, 2}])
    assert curve.points == pytest.approx([(0.5, 1.0), (0.5, 0.5), (1.0, 2 / 3)], abs=1e-15)
    want = float(step_integral(pr_points([[0.9, 0.8, 0.1]], [{0, 2}])))
    assert prc_auc(curve) == pytest.approx(want, abs=1e-12)
    assert prc_auc(curve) == pytest.approx(0.5 * 1.0 + 0.5 * 2 / 3, abs=1e-15)


def test_perfect_ranking():
    curve = saliency_pr_curve([[3.0, 2.0, 1.0, 0.0]], [{0, 1}])
    assert prc_auc(curve) == 1.0
    assert curve.points[:2] == [(0.5, 1.0), (1.0, 1.0)]


def test_single_point_curve():
    curve = saliency_pr_curve([[0.4]], [{0}])
    assert curve.points == [(1.0, 1.0)]
    assert prc_auc(curve) == 1.0


def test_errors():
    with pytest.raises(ValueError):
        saliency_pr_curve([[1.0, 2.0]], [set()])
    with pytest.raises(ValueError):
        saliency_pr_curve([[1.0, 2.0]], [{5}])
    with pytest.raises(ValueError):
        saliency_pr_curve([[1.0]], [])
    with pytest.raises(ValueError):
        roc_auc([0.1, 0.2], [1, 1])


def test_minmax_constant_is_zero():
    assert minmax([2.0, 2.0]).tolist() == [0.0, 0.0]
    assert minmax([1.0, 3.0, 2.0]).tolist() == [0.0, 1.0, 0.5]


def test_single_molecule_oracles():
    n = 0
    for scores, truth in metric_cases(exhaustive_up_to=3, random_per_size=150):
        curve = saliency_pr_curve([np.array(scores, dtype=float)], [truth])
        pts = pr_points([scores], [truth])
        assert curve.points == [(float(r), float(p)) for r, p in pts]
        auc = prc_auc(curve)
        assert abs(auc - float(step_integral(pts))) <= 1e-12
        assert abs(auc - float(average_precision([scores], [truth]))) <= 1e-12
        n += 1
    assert n > 500


def test_pooled_oracles():
    for mols, truths in pooled_cases(count=300):
        curve = saliency_pr_curve([np.array(m, dtype=float) for m in mols], truths)
        assert abs(prc_auc(curve) - float(average_precision(mols, truths))) <= 1e-12


def test_roc_oracle():
    for scores, labels in roc_cases(exhaustive_up_to=4, random_per_size=200):
        assert abs(roc_auc(scores, labels) - float(pair_count_roc(scores, labels))) <= 1e-12


def test_roc_examples():
    assert roc_auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
    assert roc_auc([0.5] * 6, [0, 1, 0, 1, 1, 0]) == 0.5
    scores, labels = [0.3, 0.7, 0.7, 0.1, 0.9, 0.3], [0, 1, 0, 0, 1, 1]
    assert roc_auc(scores, labels) == float(pair_count_roc(scores, labels))


@given(st.lists(st.lists(st.floats(-5, 5), min_size=1, max_size=6), min_size=1, max_size=5), st.data())
def test_curve_invariants(mols, data):
    truths = [data.draw(st.sets(st.integers(0, len(m) - 1), min_size=1)) for m in mols]
    curve = saliency_pr_curve(mols, truths)
    assert np.all(np.diff(curve.recall) >= 0)
    assert np.all((0 <= curve.precision) & (curve.precision <= 1))
    assert curve.recall[-1] == 1.0
    assert 0 <= prc_auc(curve) <= 1
    assert 0 <= per_molecule_prc_auc(mols, truths) <= 1


def test_random_scores_give_base_rate():
    rng = np.random.default_rng(0)
    mols, truths = [], []
    for _ in range(400):
        n = int(rng.integers(10, 20))
        mols.append(rng.random(n))
        truths.append(set(rng.choice(n, size=int(rng.integers(1, 5)), replace=False).tolist()))
    base = sum(len(t) for t in truths) / sum(len(m) for m in mols)
    assert abs(prc_auc(saliency_pr_curve(mols, truths)) - base) < 0.05


def test_per_molecule_average():
    mols = [[0.9, 0.1], [0.1, 0.9]]
    truths = [{0}, {0}]
    assert per_molecule_prc_auc(mols, truths) == pytest.approx((1.0 + 0.5) / 2)
