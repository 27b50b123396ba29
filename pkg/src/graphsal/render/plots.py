"""Report figures written next to the CSV/JSON outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.family": "sans-serif",
    "font.size": 10,
    "axes.labelsize": 10,
    "axes.titlesize": 11,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 100,
    "savefig.dpi": 150,
    "svg.hashsalt": "graphsal",
}

# PNG metadata stripped so identical inputs give identical bytes
_PNG_META = {"Software": None}


def _save(fig, path):
    path = str(path)
    meta = _PNG_META if path.endswith(".png") else {"Date": None, "Creator": None}
    fig.savefig(path, metadata=meta, bbox_inches="tight")
    plt.close(fig)


def plot_pr_curves(curves: dict, path, title: str = "Saliency precision-recall"):
    """``curves`` maps a label to a PRCurve (or ``(curve, auc)`` pair)."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.6))
        for label, item in curves.items():
            curve, auc = item if isinstance(item, tuple) else (item, None)
            r = np.concatenate([[0.0], curve.recall])
            p = np.concatenate([[curve.precision[0]], curve.precision])
            name = label if auc is None else f"{label} (AUC {auc:.3f})"
            ax.step(r, p, where="pre", label=name, lw=1.3)
        ax.set_xlabel("recall")
        ax.set_ylabel("precision")
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1.02)
        ax.set_title(title)
        ax.legend(loc="lower left", frameon=False)
        _save(fig, path)


def plot_benchmark(report, path, labels: dict | None = None):
    """Per-repeat PRC-AUC per method with mean and standard deviation."""
    labels = labels or {}
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.4))
        for k, m in enumerate(report.methods):
            vals = np.array([v for v in report.per_repeat[m] if v is not None])
            jitter = np.linspace(-0.12, 0.12, len(vals)) if len(vals) > 1 else np.zeros(len(vals))
            ax.plot(k + jitter, vals, "o", ms=3, alpha=0.5, color="0.4")
            ax.errorbar(k + 0.25, report.mean[m], yerr=report.std[m], fmt="s", color="C3",
                        capsize=3, ms=5)
        ax.set_xticks(range(len(report.methods)))
        ax.set_xticklabels([labels.get(m, m) for m in report.methods])
        ax.set_ylabel("PRC-AUC")
        ax.set_title(f"{report.repeats} models, subset size {report.subset_size}")
        _save(fig, path)


def plot_training(epochs: list[dict], path, keys=("train_loss", "loss", "val_loss")):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.2))
        x = [e["epoch"] for e in epochs]
        for key in keys:
            if all(key in e for e in epochs):
                ax.plot(x, [e[key] for e in epochs], label=key, lw=1.3)
        ax.set_xlabel("epoch")
        ax.set_ylabel("loss")
        ax.set_yscale("log")
        ax.legend(frameon=False)
        _save(fig, path)


def plot_regression(predicted, measured, path, title: str | None = None):
    predicted = np.asarray(predicted)
    measured = np.asarray(measured)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.8, 3.6))
        ax.plot(measured, predicted, "o", ms=3, alpha=0.6)
        lo = float(min(measured.min(), predicted.min()))
        hi = float(max(measured.max(), predicted.max()))
        ax.plot([lo, hi], [lo, hi], "--", color="0.5", lw=1)
        ax.set_xlabel("measured")
        ax.set_ylabel("predicted")
        if title:
            ax.set_title(title)
        _save(fig, path)
