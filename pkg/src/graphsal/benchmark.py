"""Saliency quality against planted motifs, and the repeated-subset benchmark."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .gnn import ModelParams, TrainConfig, TrainingDiverged, train
from .metrics import PRCurve, per_molecule_prc_auc, prc_auc, saliency_pr_curve
from .molgraph import MolecularGraph, match_motif, parse_smiles
from .saliency import METHODS, explain

log = logging.getLogger(__name__)

METHOD_LABELS = {
    "vanilla": "VanillaGrad",
    "smooth": "SmoothGrad",
    "bayes": "BayesGrad",
    "bayes-smooth": "BayesSmoothGrad",
}
REPORT_VERSION = "1.0"


@dataclass(frozen=True)
class SaliencySettings:
    samples: int = 100
    sigma: float = 0.15
    norm: str = "l2"
    # bayes-smooth draws noise_samples x dropout_samples gradients
    smooth_noise_samples: int = 10
    smooth_dropout_samples: int = 10


def ground_truth(graphs: list[MolecularGraph], motif: MolecularGraph | str):
    """Positive molecules and the union of their motif atoms."""
    if isinstance(motif, str):
        motif = parse_smiles(motif)
    keep, truths = [], []
    for g in graphs:
        sets = match_motif(g, motif)
        if sets:
            keep.append(g)
            truths.append(sorted(set().union(*sets)))
    return keep, truths


def method_scores(params: ModelParams, graphs, method: str, settings: SaliencySettings, seed: int):
    out = []
    for k, g in enumerate(graphs):
        if method == "bayes-smooth":
            r = explain(params, g, method, samples=settings.smooth_noise_samples,
                        dropout_samples=settings.smooth_dropout_samples, sigma=settings.sigma,
                        norm=settings.norm, seed=seed + k)
        else:
            r = explain(params, g, method, samples=settings.samples, sigma=settings.sigma,
                        norm=settings.norm, seed=seed + k)
        out.append(r.scores)
    return out


def evaluate_saliency(
    params: ModelParams,
    graphs: list[MolecularGraph],
    truths,
    method: str,
    settings: SaliencySettings = SaliencySettings(),
    seed: int = 0,
    per_molecule: bool = False,
) -> tuple[PRCurve, float]:
    """Pooled PR curve of one method over the positive molecules, and its area.

    With ``per_molecule=True`` the returned area is the mean of per-molecule
    areas instead (the pooled curve is still returned).
    """
    if not graphs:
        raise ValueError("no positive molecules to evaluate")
    scores = method_scores(params, graphs, method, settings, seed)
    curve = saliency_pr_curve(scores, truths)
    auc = per_molecule_prc_auc(scores, truths) if per_molecule else prc_auc(curve)
    return curve, auc


@dataclass(frozen=True)
class BenchmarkConfig:
    subset_size: int = 1000
    repeats: int = 30
    methods: tuple[str, ...] = METHODS
    seed: int = 0
    seeds: tuple[int, ...] | None = None
    saliency: SaliencySettings = SaliencySettings()
    train: TrainConfig = TrainConfig()
    per_molecule: bool = False

    def __post_init__(self):
        if self.repeats < 2:
            raise ValueError("need at least 2 repeats to report a standard deviation")
        if self.seeds is not None and len(self.seeds) != self.repeats:
            raise ValueError("seeds must list one seed per repeat")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")

    def repeat_seeds(self) -> list[int]:
        if self.seeds is not None:
            return [int(s) for s in self.seeds]
        return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(self.seed).spawn(self.repeats)]


def _finite(x: float) -> float | None:
    return x if np.isfinite(x) else None


@dataclass
class BenchmarkReport:
    methods: tuple[str, ...]
    mean: dict[str, float]
    std: dict[str, float]
    per_repeat: dict[str, list[float | None]]
    seeds: list[int]
    subset_size: int
    failed: list[int] = field(default_factory=list)

    @property
    def repeats(self) -> int:
        return len(self.seeds)

    def to_dict(self) -> dict:
        return {
            "format_version": REPORT_VERSION,
            "subset_size": self.subset_size,
            "repeats": self.repeats,
            "seeds": self.seeds,
            "failed_repeats": self.failed,
            "methods": {
                m: {"mean": _finite(self.mean[m]), "std": _finite(self.std[m]),
                    "prc_auc": self.per_repeat[m]}
                for m in self.methods
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def to_table(self) -> str:
        ok = self.repeats - len(self.failed)
        lines = [f"{'Algorithm':<18}PRC-AUC score   ({ok} models, subset {self.subset_size})"]
        lines.append("-" * len(lines[0]))
        for m in self.methods:
            lines.append(f"{METHOD_LABELS[m]:<18}{self.mean[m]:.3f} ± {self.std[m]:.3f}")
        if self.failed:
            lines.append(f"failed repeats: {len(self.failed)} of {self.repeats}")
        return "\n".join(lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method"] + [f"repeat_{k}" for k in range(self.repeats)])
        for m in self.methods:
            w.writerow([m] + ["" if v is None else repr(v) for v in self.per_repeat[m]])
        return buf.getvalue()


def _run_repeat(args):
    k, seed, dataset, graphs, truths, config = args
    rng = np.random.default_rng(seed)
    subset = [dataset[i] for i in sorted(rng.choice(len(dataset), config.subset_size, replace=False))]
    try:
        params, _ = train(subset, replace(config.train, seed=seed))
    except TrainingDiverged as exc:
        log.warning("repeat %d diverged: %s", k, exc)
        return k, None
    aucs = {}
    for m in config.methods:
        _, aucs[m] = evaluate_saliency(params, graphs, truths, m, config.saliency, seed,
                                       config.per_molecule)
    log.info("repeat %d: %s", k, aucs)
    return k, aucs


def benchmark_run(
    dataset: list[tuple[MolecularGraph, float]],
    heldout: list[MolecularGraph],
    motif: str | MolecularGraph,
    config: BenchmarkConfig,
    workers: int | None = None,
) -> BenchmarkReport:
    """Train one model per random training subset; score every method on the
    same held-out positives with the same model (paired comparison)."""
    if len(dataset) <= config.subset_size:
        raise ValueError(f"dataset has {len(dataset)} samples; need more than subset_size={config.subset_size}")
    graphs, truths = ground_truth(heldout, motif)
    if not graphs:
        raise ValueError("no positive molecules: motif not found in any held-out molecule")
    if workers is None:
        workers = int(os.environ.get("GRAPHSAL_THREADS", "1") or 1)
    seeds = config.repeat_seeds()
    jobs = [(k, s, dataset, graphs, truths, config) for k, s in enumerate(seeds)]
    slots: list[dict | None] = [None] * len(seeds)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for k, aucs in pool.map(_run_repeat, jobs):
                slots[k] = aucs
    else:
        for job in jobs:
            k, aucs = _run_repeat(job)
            slots[k] = aucs

    failed = [k for k, s in enumerate(slots) if s is None]
    per_repeat = {m: [None if s is None else s[m] for s in slots] for m in config.methods}
    mean, std = {}, {}
    for m in config.methods:
        vals = np.array([v for v in per_repeat[m] if v is not None])
        mean[m] = float(vals.mean()) if len(vals) else float("nan")
        std[m] = float(vals.std(ddof=1)) if len(vals) >= 2 else float("nan")
    return BenchmarkReport(tuple(config.methods), mean, std, per_repeat, seeds, config.subset_size, failed)
