"""Command-line interface: ``graphsal {generate,train,explain,eval-saliency,benchmark}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .benchmark import (
    METHOD_LABELS,
    BenchmarkConfig,
    SaliencySettings,
    benchmark_run,
    evaluate_saliency,
    ground_truth,
)
from .gnn import TrainConfig, evaluate, params_from_json, params_to_json, predict_batch, train
from .io import DatasetError, atomic_write, dataset_csv, read_dataset
from .molgraph import (
    GeneratorConfig,
    SmilesError,
    SolubilityConfig,
    generate_solubility_dataset,
    generate_synthetic_dataset,
    parse_smiles,
)
from .saliency import METHODS, NORMS, explain

log = logging.getLogger("graphsal")

METRICS_VERSION = "1.0"
FAILED_REPEAT_LIMIT = 0.2


class CLIError(Exception):
    pass


def _methods(text: str) -> tuple[str, ...]:
    methods = tuple(m.strip() for m in text.split(",") if m.strip())
    for m in methods:
        if m not in METHODS:
            raise CLIError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    return methods


def _dumps(doc) -> str:
    return json.dumps(doc, indent=1) + "\n"


def _with_suffix(base: Path, suffix: str) -> Path:
    return base.with_name(base.stem + suffix)


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        task=args.task, model=args.model, epochs=args.epochs, batch_size=args.batch_size,
        learning_rate=args.lr, seed=args.seed, hidden=args.hidden, rounds=args.rounds,
        dropout=args.dropout,
    )


# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    if args.kind == "motif":
        rows = generate_synthetic_dataset(GeneratorConfig(
            count=args.count, motif=args.motif, min_atoms=args.min_atoms, max_atoms=args.max_atoms,
            base_rate=args.base_rate, seed=args.seed,
        ))
    else:
        rows = generate_solubility_dataset(SolubilityConfig(
            count=args.count, seed=args.seed, min_atoms=args.min_atoms, max_atoms=args.max_atoms,
        ))
    atomic_write(args.out, dataset_csv(rows))
    log.info("wrote %d rows to %s", len(rows), args.out)
    return 0


def cmd_train(args) -> int:
    rows = read_dataset(args.dataset, args.task)
    data = [(g, y) for g, y, _ in rows]
    validation = None
    if args.validation:
        validation = [(g, y) for g, y, _ in read_dataset(args.validation, args.task)]
    config = _train_config(args)
    params, history = train(data, config, validation=validation)
    out = Path(args.out)
    atomic_write(out, params_to_json(params) + "\n")

    final = evaluate(params, [g for g, _ in data], [y for _, y in data])
    metrics = {
        "format_version": METRICS_VERSION,
        "task": args.task,
        "model_kind": args.model,
        "config": {k: getattr(config, k) for k in config.__dataclass_fields__},
        "epochs": history.epochs,
        "final": {"train": final},
    }
    if validation:
        metrics["final"]["validation"] = evaluate(params, [g for g, _ in validation],
                                                  [y for _, y in validation])
    metrics_path = Path(args.metrics) if args.metrics else _with_suffix(out, ".metrics.json")
    atomic_write(metrics_path, _dumps(metrics))
    if not args.no_figures:
        from .render.plots import plot_regression, plot_training

        plot_training(history.epochs, _with_suffix(out, ".loss.png"))
        if args.task == "regression":
            target = validation or data
            pred = predict_batch(params, [g for g, _ in target])
            plot_regression(pred, [y for _, y in target], _with_suffix(out, ".scatter.png"))
    print(_dumps(metrics["final"]), end="")
    return 0


def cmd_explain(args) -> int:
    params = params_from_json(Path(args.model).read_text())
    try:
        graph = parse_smiles(args.smiles)
    except SmilesError as exc:
        raise CLIError(f"cannot parse SMILES {args.smiles!r}: {exc}") from exc
    if args.method not in METHODS:
        raise CLIError(f"unknown method {args.method!r}; choose from {', '.join(METHODS)}")
    result = explain(
        params, graph, args.method, samples=args.samples, sigma=args.sigma, norm=args.norm,
        seed=args.seed, signed=args.signed, dropout_samples=args.dropout_samples,
    )
    result.smiles = args.smiles
    from .render.svg import RenderSpec, render_svg

    title = f"{METHOD_LABELS[args.method]}{' (signed)' if args.signed else ''}"
    svg = render_svg(graph, result.scores, signed=args.signed, title=title,
                     spec=RenderSpec(show_values=args.show_values))
    base = Path(args.out)
    atomic_write(_with_suffix(base, ".svg") if base.suffix != ".svg" else base, svg)
    json_path = Path(args.json) if args.json else _with_suffix(base, ".json")
    atomic_write(json_path, result.to_json() + "\n")
    print(result.to_json())
    return 0


def _curve_rows(method, curve):
    for k, (r, p, t) in enumerate(zip(curve.recall, curve.precision, curve.thresholds), start=1):
        yield [method, k, repr(float(r)), repr(float(p)), repr(float(t))]


def cmd_eval_saliency(args) -> int:
    params = params_from_json(Path(args.model).read_text())
    rows = read_dataset(args.dataset, params.task)
    graphs, truths = ground_truth([g for g, _, _ in rows], args.motif)
    if not graphs:
        raise CLIError(f"no positive molecules: motif {args.motif!r} not found in any molecule")
    settings = SaliencySettings(samples=args.samples, sigma=args.sigma, norm=args.norm,
                                smooth_noise_samples=args.smooth_noise_samples,
                                smooth_dropout_samples=args.dropout_samples)
    curves, summary = {}, {}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "rank", "recall", "precision", "threshold"])
    for m in _methods(args.methods):
        curve, auc = evaluate_saliency(params, graphs, truths, m, settings, args.seed,
                                       per_molecule=args.per_molecule_average)
        curves[METHOD_LABELS[m]] = (curve, auc)
        summary[m] = auc
        w.writerows(_curve_rows(m, curve))
    base = Path(args.out)
    atomic_write(_with_suffix(base, ".curves.csv"), buf.getvalue())
    report = {
        "format_version": METRICS_VERSION,
        "positives": len(graphs),
        "pooling": "per-molecule-average" if args.per_molecule_average else "pooled",
        "prc_auc": summary,
    }
    atomic_write(_with_suffix(base, ".json"), _dumps(report))
    if not args.no_figures:
        from .render.plots import plot_pr_curves

        plot_pr_curves(curves, _with_suffix(base, ".png"))
    width = max(len(v) for v in METHOD_LABELS.values()) + 2
    for m, auc in summary.items():
        print(f"{METHOD_LABELS[m]:<{width}}{auc:.4f}")
    return 0


def cmd_benchmark(args) -> int:
    rows = read_dataset(args.dataset, "binary")
    data = [(g, y) for g, y, _ in rows]
    if args.heldout:
        heldout = [g for g, _, _ in read_dataset(args.heldout, "binary")]
    else:
        n_hold = int(round(len(data) * args.heldout_fraction))
        if n_hold < 1:
            raise CLIError("held-out split is empty; pass --heldout or raise --heldout-fraction")
        heldout = [g for g, _ in data[-n_hold:]]
        data = data[:-n_hold]
    train_cfg = TrainConfig(task="binary", model=args.model, epochs=args.epochs,
                            batch_size=args.batch_size, learning_rate=args.lr,
                            hidden=args.hidden, rounds=args.rounds, dropout=args.dropout)
    config = BenchmarkConfig(
        subset_size=args.subset_size, repeats=args.repeats, methods=_methods(args.methods),
        seed=args.seed,
        saliency=SaliencySettings(samples=args.samples, sigma=args.sigma, norm=args.norm,
                                  smooth_noise_samples=args.smooth_noise_samples,
                                  smooth_dropout_samples=args.dropout_samples),
        train=train_cfg, per_molecule=args.per_molecule_average,
    )
    try:
        report = benchmark_run(data, heldout, args.motif, config, workers=args.workers)
    except ValueError as exc:
        raise CLIError(str(exc)) from exc
    base = Path(args.out)
    atomic_write(_with_suffix(base, ".json"), report.to_json() + "\n")
    atomic_write(_with_suffix(base, ".txt"), report.to_table() + "\n")
    if args.csv:
        atomic_write(args.csv, report.to_csv())
    if not args.no_figures:
        from .render.plots import plot_benchmark

        plot_benchmark(report, _with_suffix(base, ".png"), METHOD_LABELS)
    print(report.to_table())
    if len(report.failed) > FAILED_REPEAT_LIMIT * report.repeats:
        print(f"error: {len(report.failed)} of {report.repeats} repeats failed", file=sys.stderr)
        return 2
    return 0


# ---------------------------------------------------------------------------


def _add_train_flags(p, task=True):
    if task:
        p.add_argument("--task", choices=("binary", "regression"), default="binary")
    p.add_argument("--model", choices=("nfp", "ggnn"), default="ggnn")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--rounds", type=int, default=3)
    p.add_argument("--dropout", type=float, default=0.25)


def _add_saliency_flags(p):
    p.add_argument("--samples", type=int, default=100, help="M for smooth and bayes")
    p.add_argument("--sigma", type=float, default=0.15)
    p.add_argument("--norm", choices=NORMS, default="l2")
    p.add_argument("--dropout-samples", type=int, default=10,
                   help="mask draws for bayes-smooth (each with its own noise draws)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphsal", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic smiles,label dataset")
    p.add_argument("--kind", choices=("motif", "solubility"), default="motif")
    p.add_argument("--count", type=int, default=2000)
    p.add_argument("--motif", default="c1ccncc1")
    p.add_argument("--base-rate", type=float, default=0.3)
    p.add_argument("--min-atoms", type=int, default=8)
    p.add_argument("--max-atoms", type=int, default=24)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train a model on a smiles,label CSV")
    p.add_argument("--dataset", required=True)
    p.add_argument("--validation")
    _add_train_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--metrics", help="metrics JSON path (default: <out>.metrics.json)")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("explain", help="saliency map of one molecule as SVG + JSON")
    p.add_argument("--model", required=True)
    p.add_argument("--smiles", required=True)
    p.add_argument("--method", default="bayes")
    p.add_argument("--signed", action="store_true", help="(phi - 0) . gradient per atom")
    _add_saliency_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--show-values", action="store_true")
    p.add_argument("--out", required=True, help="SVG path")
    p.add_argument("--json", help="scores JSON path (default: next to the SVG)")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("eval-saliency", help="PR curves of saliency against a motif")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--motif", default="c1ccncc1")
    p.add_argument("--methods", default=",".join(METHODS))
    _add_saliency_flags(p)
    p.add_argument("--smooth-noise-samples", type=int, default=10)
    p.add_argument("--per-molecule-average", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_eval_saliency)

    p = sub.add_parser("benchmark", help="repeated-subset PRC-AUC benchmark")
    p.add_argument("--dataset", required=True)
    p.add_argument("--heldout")
    p.add_argument("--heldout-fraction", type=float, default=0.2)
    p.add_argument("--motif", default="c1ccncc1")
    p.add_argument("--subset-size", type=int, default=1000)
    p.add_argument("--repeats", type=int, default=30)
    p.add_argument("--methods", default=",".join(METHODS))
    _add_train_flags(p, task=False)
    _add_saliency_flags(p)
    p.add_argument("--smooth-noise-samples", type=int, default=10)
    p.add_argument("--per-molecule-average", action="store_true")
    p.add_argument("--workers", type=int, default=None,
                   help="parallel repeats (default: $GRAPHSAL_THREADS or 1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="write the method x repeat PRC-AUC matrix here")
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    np.seterr(all="raise", under="ignore")
    try:
        return args.func(args)
    except (CLIError, DatasetError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
