import json

import numpy as np
import pytest

from graphsal import autodiff as ad
from graphsal.gnn import batch_graphs, embed, forward, sample_masks, score
from graphsal.molgraph import parse_smiles
from graphsal.saliency import (
    METHODS,
    SmoothSpec,
    bayes_grad,
    bayes_smooth_grad,
    explain,
    node_gradients,
    result_from_dict,
    signed_scores,
    smooth_grad,
    vanilla_grad,
)
from reference_models import reference_scores

MOL = "c1ccncc1C(=O)NCCO"


def _phi(params, g):
    return embed(ad.Tape(), batch_graphs([g], params.vocab).features, params).value


def _no_dropout(params):
    p = params.copy()
    p.dropout = 0.0
    return p


def _fd_gradient(params, g, phi, masks=None, eps=1e-6):
    """Central differences through the dense longdouble reference model."""
    n, d = phi.shape
    stack = np.repeat(phi.astype(np.longdouble)[None], 2 * n * d, axis=0)
    for k in range(n * d):
        stack[k].flat[k] += eps
        stack[n * d + k].flat[k] -= eps
    vals = reference_scores(g, stack, params, masks)
    return ((vals[: n * d] - vals[n * d:]) / (2 * eps)).astype(np.float64).reshape(n, d)


@pytest.mark.parametrize("kind", ["nfp", "ggnn"])
def test_vanilla_is_norm_of_finite_difference_gradient(random_models, kind):
    params = random_models[kind]
    g = parse_smiles(MOL)
    fd = _fd_gradient(params, g, _phi(params, g))
    np.testing.assert_allclose(vanilla_grad(params, g).scores, np.linalg.norm(fd, axis=1), rtol=1e-6)
    np.testing.assert_allclose(vanilla_grad(params, g, norm="l1").scores, np.abs(fd).sum(axis=1), rtol=1e-6)


def test_bayes_is_mean_over_masks(random_models):
    params = random_models["ggnn"]
    g = parse_smiles(MOL)
    phi = _phi(params, g)
    root = np.random.SeedSequence(4).spawn(2)[0]
    masks = [sample_masks(params, len(g.atoms), np.random.default_rng(s)) for s in root.spawn(3)]
    want = np.mean([np.linalg.norm(_fd_gradient(params, g, phi, m), axis=1) for m in masks], axis=0)
    np.testing.assert_allclose(bayes_grad(params, g, samples=3, seed=4).scores, want, rtol=1e-6)


@pytest.mark.parametrize("kind", ["nfp", "ggnn", "linear"])
def test_reduction_chain(random_models, kind):
    params = _no_dropout(random_models[kind])
    g = parse_smiles(MOL)
    v = vanilla_grad(params, g).scores
    assert smooth_grad(params, g, SmoothSpec(0.0, 50), seed=1).scores.tobytes() == v.tobytes()
    assert bayes_grad(params, g, 50, seed=2).scores.tobytes() == v.tobytes()
    assert bayes_smooth_grad(params, g, SmoothSpec(0.0, 7), 5, seed=3).scores.tobytes() == v.tobytes()


def test_partial_reductions(random_models):
    params = random_models["ggnn"]
    g = parse_smiles(MOL)
    # sigma = 0 leaves only the dropout average
    a = bayes_smooth_grad(params, g, SmoothSpec(0.0, 4), dropout_samples=6, seed=5).scores
    b = bayes_grad(params, g, 6, seed=5).scores
    assert a.tobytes() == b.tobytes()
    # p = 0 leaves only the noise average
    p0 = _no_dropout(params)
    a = bayes_smooth_grad(p0, g, SmoothSpec(0.2, 8), dropout_samples=5, seed=6).scores
    b = smooth_grad(p0, g, SmoothSpec(0.2, 8), seed=6).scores
    assert a.tobytes() == b.tobytes()


@pytest.mark.parametrize("method", METHODS)
def test_seeded(random_models, method):
    params = random_models["nfp"]
    g = parse_smiles(MOL)
    a = explain(params, g, method, samples=8, dropout_samples=3, seed=11)
    b = explain(params, g, method, samples=8, dropout_samples=3, seed=11)
    assert a.scores.tobytes() == b.scores.tobytes()
    if method != "vanilla":
        c = explain(params, g, method, samples=8, dropout_samples=3, seed=12)
        assert not np.array_equal(a.scores, c.scores)


def test_chunking_does_not_change_gradients(random_models):
    params = random_models["ggnn"]
    g = parse_smiles(MOL)
    phi = _phi(params, g)
    rng = np.random.default_rng(0)
    phis = phi[None] + 0.1 * rng.standard_normal((7, *phi.shape))
    masks = [sample_masks(params, len(g.atoms), rng) for _ in range(7)]
    whole = node_gradients(params, g, phis, masks)
    pieces = node_gradients(params, g, phis, masks, chunk_atoms=len(g.atoms) * 2)
    np.testing.assert_allclose(whole, pieces, rtol=0, atol=1e-12)


def test_bayes_converges(random_models):
    params = random_models["ggnn"]
    g = parse_smiles(MOL)
    ref = bayes_grad(params, g, 4000, seed=99).scores
    errs = [np.abs(bayes_grad(params, g, m, seed=1).scores - ref).max() for m in (10, 1000)]
    assert errs[1] < errs[0] / 3


def test_signed_linear_surrogate(random_models):
    params = random_models["linear"]
    g = parse_smiles(MOL)
    phi = _phi(params, g)
    s = signed_scores(params, g).scores
    tape = ad.Tape()
    batch = batch_graphs([g], params.vocab)
    f0 = forward(tape, batch, tape.leaf(np.zeros_like(phi)), params).value[0, 0]
    assert abs(s.sum() - (score(g, params) - f0)) < 1e-9
    assert np.all(signed_scores(params, g, baseline=phi).scores == 0.0)


def test_signed_sampled_uses_mean_gradient(random_models):
    params = random_models["ggnn"]
    g = parse_smiles(MOL)
    phi = _phi(params, g)
    r = bayes_grad(params, g, 5, seed=3, signed=True)
    root = np.random.SeedSequence(3).spawn(2)[0]
    masks = [sample_masks(params, len(g.atoms), np.random.default_rng(s)) for s in root.spawn(5)]
    mean_grad = np.mean([_fd_gradient(params, g, phi, m) for m in masks], axis=0)
    np.testing.assert_allclose(r.scores, (phi * mean_grad).sum(axis=1), rtol=1e-5, atol=1e-9)
    assert r.signed and (r.scores < 0).any() and (r.scores > 0).any()


def test_result_schema(random_models):
    params = random_models["nfp"]
    g = parse_smiles(MOL)
    r = explain(params, g, "bayes-smooth", samples=4, dropout_samples=3, sigma=0.1, seed=2)
    r.smiles = MOL
    doc = json.loads(r.to_json())
    assert doc["format_version"] == "1.0"
    assert doc["params"] == {"M": 4, "M_dropout": 3, "sigma": 0.1, "norm": "l2", "seed": 2}
    assert len(doc["scores"]) == len(g.atoms) and doc["signed"] is False
    back = result_from_dict(doc)
    assert back.scores.tobytes() == r.scores.tobytes()
    doc["format_version"] = "3.0"
    with pytest.raises(ValueError, match="newer"):
        result_from_dict(doc)


def test_std_is_reported(random_models):
    params = random_models["ggnn"]
    g = parse_smiles(MOL)
    r = bayes_grad(params, g, 20, seed=0)
    assert r.std.shape == r.scores.shape and np.all(r.std >= 0) and r.std.max() > 0
    assert np.all(vanilla_grad(params, g).std == 0)


def test_argument_errors(random_models):
    params = random_models["nfp"]
    g = parse_smiles(MOL)
    with pytest.raises(ValueError):
        explain(params, g, "integrated")
    with pytest.raises(ValueError):
        vanilla_grad(params, g, norm="linf")
    with pytest.raises(ValueError):
        bayes_grad(params, g, 0)
    with pytest.raises(ValueError):
        smooth_grad(params, g, SmoothSpec(-0.1, 5))
    with pytest.raises(ValueError):
        vanilla_grad(params, g, signed=True, baseline=np.zeros((2, 2)))
