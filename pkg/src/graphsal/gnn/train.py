from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .. import autodiff as ad
from ..metrics import roc_auc
from ..molgraph import AtomVocabulary, MolecularGraph
from .model import (
    DropoutMaskSet,
    ModelParams,
    batch_graphs,
    bind,
    embed,
    encode,
    forward,
    init_params,
    make_batch,
    sample_masks,
)

log = logging.getLogger(__name__)

TASKS = ("binary", "regression")


class TrainingDiverged(FloatingPointError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    task: str = "binary"
    model: str = "ggnn"
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    hidden: int = 32
    rounds: int = 3
    fingerprint: int = 32
    dropout: float = 0.25

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class TrainLog:
    epochs: list[dict] = field(default_factory=list)


def logistic_loss(scores: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-sample -log p(label) for raw scores, computed without overflow."""
    s = scores
    return np.maximum(s, 0.0) - labels * s + np.log1p(np.exp(-np.abs(s)))


def _loss_and_grad(task, scores, labels):
    if task == "binary":
        loss = logistic_loss(scores, labels)
        p = np.where(scores >= 0, 1.0 / (1.0 + np.exp(-np.abs(scores))),
                     np.exp(-np.abs(scores)) / (1.0 + np.exp(-np.abs(scores))))
        grad = p - labels
    else:
        diff = scores - labels
        loss = diff * diff
        grad = 2.0 * diff
    n = len(scores)
    return float(loss.mean()), grad / n


class Adam:
    def __init__(self, params: dict[str, np.ndarray], lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]):
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for k in sorted(params):
            g = grads[k]
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            params[k] = params[k] - self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)


def predict_batch(params: ModelParams, graphs: list[MolecularGraph], chunk: int = 256) -> np.ndarray:
    """Deterministic raw scores (dropout off) for many molecules."""
    out = []
    for start in range(0, len(graphs), chunk):
        part = graphs[start : start + chunk]
        tape = ad.Tape()
        batch = batch_graphs(part, params.vocab)
        phi = embed(tape, batch.features, params)
        out.append(forward(tape, batch, phi, params).value[:, 0])
    return np.concatenate(out) if out else np.zeros(0)


def evaluate(params: ModelParams, graphs, labels) -> dict:
    labels = np.asarray(labels, dtype=np.float64)
    scores = predict_batch(params, list(graphs))
    if params.task == "binary":
        out = {"loss": float(logistic_loss(scores, labels).mean())}
        if 0 < labels.sum() < len(labels):
            out["roc_auc"] = roc_auc(scores, labels)
        return out
    diff = scores - labels
    out = {"loss": float(np.mean(diff * diff)), "mae": float(np.mean(np.abs(diff)))}
    if len(labels) > 1 and np.std(scores) > 0 and np.std(labels) > 0:
        out["pearson_r"] = float(np.corrcoef(scores, labels)[0, 1])
    return out


def train(
    dataset: list[tuple[MolecularGraph, float]],
    config: TrainConfig,
    vocab: AtomVocabulary | None = None,
    validation: list[tuple[MolecularGraph, float]] | None = None,
) -> tuple[ModelParams, TrainLog]:
    """Fit a model with Adam, resampling dropout masks on every forward pass.

    Deterministic for a given config seed.  Raises :class:`TrainingDiverged`
    if the loss becomes non-finite.
    """
    if not dataset:
        raise ValueError("empty training set")
    graphs = [g for g, _ in dataset]
    labels = np.asarray([y for _, y in dataset], dtype=np.float64)
    if config.task == "binary" and not np.all((labels == 0) | (labels == 1)):
        raise ValueError("binary task needs labels in {0, 1}")
    if vocab is None:
        vocab = AtomVocabulary.build(graphs)

    init_seed, shuffle_seed, mask_seed = np.random.SeedSequence(config.seed).spawn(3)
    params = init_params(
        config.model, vocab, hidden=config.hidden, rounds=config.rounds,
        fingerprint=config.fingerprint, dropout=config.dropout, task=config.task,
        seed=int(init_seed.generate_state(1)[0]),
    )
    if config.task == "regression":
        params.tensors["head.bias"] = np.array([labels.mean()])
    shuffle_rng = np.random.default_rng(shuffle_seed)
    mask_rng = np.random.default_rng(mask_seed)
    encoded = [encode(g, vocab) for g in graphs]
    opt = Adam(params.tensors, lr=config.learning_rate)
    history = TrainLog()

    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(len(encoded))
        running = []
        for start in range(0, len(order), config.batch_size):
            idx = order[start : start + config.batch_size]
            batch = make_batch([encoded[i] for i in idx])
            tape = ad.Tape()
            w = bind(tape, params, trainable=True)
            phi = ad.gather_rows(w["embedding"], batch.features)
            masks = sample_masks(params, batch.n_atoms, mask_rng) if params.dropout > 0 else None
            try:
                scores = forward(tape, batch, phi, params, masks, weights=w)
            except ad.NonFiniteError as exc:
                raise TrainingDiverged(f"epoch {epoch} step {start}: {exc}") from exc
            loss, dscore = _loss_and_grad(config.task, scores.value[:, 0], labels[idx])
            if not np.isfinite(loss):
                raise TrainingDiverged(f"epoch {epoch} step {start}: loss is {loss}")
            running.append(loss * len(idx))
            objective = ad.sum_all(ad.mul(scores, tape.constant(dscore[:, None])))
            grads = ad.backward(tape, objective)
            opt.step(params.tensors, {k: grads[v.id] for k, v in w.items()})
            for k, v in params.tensors.items():
                if not np.all(np.isfinite(v)):
                    raise TrainingDiverged(f"epoch {epoch} step {start}: parameter {k} is non-finite")

        entry = {"epoch": epoch + 1, "train_loss": float(np.sum(running) / len(order))}
        entry.update(evaluate(params, graphs, labels))
        if validation:
            val = evaluate(params, [g for g, _ in validation], [y for _, y in validation])
            entry.update({f"val_{k}": v for k, v in val.items()})
        history.epochs.append(entry)
        log.info("epoch %d %s", epoch + 1, entry)
    return params, history


def predict(
    graph: MolecularGraph,
    params: ModelParams,
    mode: str = "deterministic",
    samples: int = 100,
    seed: int = 0,
):
    """Score one molecule.

    ``mode="deterministic"`` returns the raw score with dropout off.
    ``mode="mc"`` returns ``(mean, std)`` of the raw score over ``samples``
    independently drawn dropout mask sets.
    """
    from .model import score

    if mode == "deterministic":
        return score(graph, params)
    if mode != "mc":
        raise ValueError(f"unknown prediction mode {mode!r}")
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if params.dropout == 0.0:
        return score(graph, params), 0.0
    streams = np.random.SeedSequence(seed).spawn(samples)
    n = len(graph.atoms)
    tape = ad.Tape()
    batch = batch_graphs([graph] * samples, params.vocab)
    phi = embed(tape, batch.features, params)
    masks = DropoutMaskSet.concat(
        [sample_masks(params, n, np.random.default_rng(s)) for s in streams]
    )
    values = forward(tape, batch, phi, params, masks).value[:, 0]
    std = float(values.std(ddof=1)) if samples > 1 else 0.0
    return float(values.mean()), std
