"""Gradient-based atom importance: VanillaGrad, SmoothGrad, BayesGrad,
BayesSmoothGrad, and their signed (input x gradient) forms.

All estimators differentiate the raw pre-sigmoid score with respect to the
embedded node features ``phi``.  SmoothGrad perturbs ``phi`` with Gaussian
noise; BayesGrad draws dropout masks, i.e. weight samples from the dropout
posterior.  Sample ``k`` always draws from its own child stream of the seed,
so results do not depend on how samples are chunked.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .gnn.model import DropoutMaskSet, ModelParams, batch_graphs, embed, forward, sample_masks
from .molgraph import MolecularGraph

METHODS = ("vanilla", "smooth", "bayes", "bayes-smooth")
NORMS = ("l2", "l1")
RESULT_VERSION = "1.0"


@dataclass(frozen=True)
class SmoothSpec:
    sigma: float = 0.15
    samples: int = 100

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.samples < 1:
            raise ValueError("sample count must be at least 1")


@dataclass
class SaliencyResult:
    scores: np.ndarray
    method: str
    signed: bool = False
    samples: int = 1
    dropout_samples: int = 1
    sigma: float = 0.0
    norm: str = "l2"
    seed: int | None = None
    std: np.ndarray | None = None
    smiles: str | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc = {
            "format_version": RESULT_VERSION,
            "smiles": self.smiles,
            "method": self.method,
            "params": {
                "M": self.samples,
                "M_dropout": self.dropout_samples,
                "sigma": self.sigma,
                "norm": self.norm,
                "seed": self.seed,
            },
            "scores": self.scores.tolist(),
            "signed": self.signed,
        }
        if self.std is not None:
            doc["std"] = self.std.tolist()
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _norm_rows(g: np.ndarray, norm: str) -> np.ndarray:
    if norm == "l2":
        return np.sqrt(np.sum(g * g, axis=-1))
    if norm == "l1":
        return np.sum(np.abs(g), axis=-1)
    raise ValueError(f"unknown norm {norm!r}; expected one of {NORMS}")


def node_gradients(
    params: ModelParams,
    graph: MolecularGraph,
    phis: np.ndarray,
    masks: list[DropoutMaskSet | None],
    chunk_atoms: int = 4096,
) -> np.ndarray:
    """d(score)/d(phi) for each row of a stack of embeddings.

    ``phis`` has shape ``(S, n, d)``; ``masks[s]`` is the mask set (or None)
    for sample ``s``.  Samples are evaluated as disjoint copies of the molecule,
    so the gradient of the summed score splits exactly into per-copy gradients.
    """
    S, n, d = phis.shape
    per_chunk = max(1, chunk_atoms // max(n, 1))
    out = np.empty_like(phis)
    for start in range(0, S, per_chunk):
        stop = min(S, start + per_chunk)
        k = stop - start
        tape = ad.Tape()
        batch = batch_graphs([graph] * k, params.vocab)
        phi = tape.leaf(phis[start:stop].reshape(k * n, d))
        chunk_masks = masks[start:stop]
        if chunk_masks[0] is None:
            mask_set = None
        else:
            mask_set = DropoutMaskSet.concat(list(chunk_masks))
        scores = forward(tape, batch, phi, params, mask_set)
        grads = ad.backward(tape, ad.sum_all(scores))
        out[start:stop] = grads[phi.id].reshape(k, n, d)
    return out


def _streams(seed, count, kind):
    root = np.random.SeedSequence(seed)
    mask_root, noise_root = root.spawn(2)
    parent = mask_root if kind == "mask" else noise_root
    return [np.random.default_rng(s) for s in parent.spawn(count)]


def _estimate(
    params: ModelParams,
    graph: MolecularGraph,
    *,
    method: str,
    noise_samples: int,
    sigma: float,
    mask_samples: int,
    norm: str,
    seed: int,
    baseline: np.ndarray | None = None,
    signed: bool = False,
) -> SaliencyResult:
    if norm not in NORMS:
        raise ValueError(f"unknown norm {norm!r}; expected one of {NORMS}")
    if noise_samples < 1 or mask_samples < 1:
        raise ValueError("sample count must be at least 1")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    n = len(graph.atoms)
    tape = ad.Tape()
    phi0 = embed(tape, batch_graphs([graph], params.vocab).features, params).value
    d = phi0.shape[1]
    if baseline is not None:
        baseline = np.asarray(baseline, dtype=np.float64)
        if baseline.shape != phi0.shape:
            raise ValueError(f"baseline shape {baseline.shape} does not match phi {phi0.shape}")

    # degenerate noise or dropout makes every draw identical: evaluate once
    use_masks = mask_samples if params.dropout > 0 else 1
    use_noise = noise_samples if sigma > 0 else 1
    if params.dropout > 0 and method in ("bayes", "bayes-smooth"):
        mask_sets = [sample_masks(params, n, rng) for rng in _streams(seed, use_masks, "mask")]
    else:
        use_masks = 1
        mask_sets = [None]
    noise_rngs = _streams(seed, use_masks * use_noise, "noise") if sigma > 0 else None

    phis = np.empty((use_masks * use_noise, n, d))
    masks: list[DropoutMaskSet | None] = []
    for j in range(use_masks):
        for m in range(use_noise):
            k = j * use_noise + m
            if noise_rngs is None:
                phis[k] = phi0
            else:
                phis[k] = phi0 + sigma * noise_rngs[k].standard_normal((n, d))
            masks.append(mask_sets[j])

    grads = node_gradients(params, graph, phis, masks)
    S = len(grads)
    if signed:
        displacement = phi0 - (baseline if baseline is not None else 0.0)
        per_sample = np.einsum("snd,nd->sn", grads, displacement)
        scores = np.einsum("nd,nd->n", grads.mean(axis=0), displacement) if S > 1 else per_sample[0]
    else:
        per_sample = _norm_rows(grads, norm)
        scores = per_sample.mean(axis=0) if S > 1 else per_sample[0]
    std = per_sample.std(axis=0, ddof=1) if S > 1 else np.zeros(n)

    return SaliencyResult(
        scores=np.asarray(scores, dtype=np.float64),
        method=method,
        signed=signed,
        samples=noise_samples if method in ("smooth", "bayes-smooth") else mask_samples,
        dropout_samples=mask_samples if method == "bayes-smooth" else 1,
        sigma=sigma,
        norm=norm,
        seed=seed,
        std=std,
    )


def vanilla_grad(params, graph, norm="l2", *, signed=False, baseline=None) -> SaliencyResult:
    """Norm of the score gradient per atom, dropout off."""
    return _estimate(params, graph, method="vanilla", noise_samples=1, sigma=0.0,
                     mask_samples=1, norm=norm, seed=0, signed=signed, baseline=baseline)


def smooth_grad(params, graph, spec: SmoothSpec = SmoothSpec(), norm="l2", seed=0,
                *, signed=False, baseline=None) -> SaliencyResult:
    """Mean gradient norm over Gaussian perturbations of the embeddings."""
    return _estimate(params, graph, method="smooth", noise_samples=spec.samples, sigma=spec.sigma,
                     mask_samples=1, norm=norm, seed=seed, signed=signed, baseline=baseline)


def bayes_grad(params, graph, samples=100, norm="l2", seed=0,
               *, signed=False, baseline=None) -> SaliencyResult:
    """Mean gradient norm over dropout-mask weight samples."""
    if samples < 1:
        raise ValueError("sample count must be at least 1")
    return _estimate(params, graph, method="bayes", noise_samples=1, sigma=0.0,
                     mask_samples=samples, norm=norm, seed=seed, signed=signed, baseline=baseline)


def bayes_smooth_grad(params, graph, spec: SmoothSpec = SmoothSpec(), dropout_samples=100,
                      norm="l2", seed=0, *, signed=False, baseline=None) -> SaliencyResult:
    """Mean over a grid of dropout samples x noise samples."""
    return _estimate(params, graph, method="bayes-smooth", noise_samples=spec.samples,
                     sigma=spec.sigma, mask_samples=dropout_samples, norm=norm, seed=seed,
                     signed=signed, baseline=baseline)


def signed_scores(params, graph, baseline=None, method="vanilla", **kwargs) -> SaliencyResult:
    """``(phi_i - b_i) . g_i`` per atom, ``g`` the (sample-averaged) gradient.

    ``baseline`` defaults to zeros.  For sampled methods the gradient rows are
    averaged first and the inner product is taken once.
    """
    fn = ESTIMATORS[method]
    return fn(params, graph, signed=True, baseline=baseline, **kwargs)


ESTIMATORS = {
    "vanilla": vanilla_grad,
    "smooth": smooth_grad,
    "bayes": bayes_grad,
    "bayes-smooth": bayes_smooth_grad,
}


def explain(params, graph, method="bayes", *, samples=100, sigma=0.15, norm="l2", seed=0,
            signed=False, baseline=None, dropout_samples=10) -> SaliencyResult:
    """Dispatch by method name with uniform keyword arguments.

    For ``bayes-smooth``, ``samples`` noise draws are taken under each of
    ``dropout_samples`` mask draws.
    """
    if method == "vanilla":
        return vanilla_grad(params, graph, norm, signed=signed, baseline=baseline)
    if method == "smooth":
        return smooth_grad(params, graph, SmoothSpec(sigma, samples), norm, seed,
                           signed=signed, baseline=baseline)
    if method == "bayes":
        return bayes_grad(params, graph, samples, norm, seed, signed=signed, baseline=baseline)
    if method == "bayes-smooth":
        return bayes_smooth_grad(params, graph, SmoothSpec(sigma, samples), dropout_samples, norm, seed,
                                 signed=signed, baseline=baseline)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def result_from_dict(doc: dict) -> SaliencyResult:
    from .gnn.model import check_version

    check_version(doc.get("format_version", RESULT_VERSION), RESULT_VERSION, "saliency result")
    p = doc["params"]
    return SaliencyResult(
        scores=np.asarray(doc["scores"], dtype=np.float64),
        method=doc["method"],
        signed=doc["signed"],
        samples=p["M"],
        dropout_samples=p.get("M_dropout", 1),
        sigma=p["sigma"],
        norm=p["norm"],
        seed=p["seed"],
        std=np.asarray(doc["std"]) if "std" in doc else None,
        smiles=doc.get("smiles"),
    )

