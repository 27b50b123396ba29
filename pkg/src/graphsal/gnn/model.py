"""Graph convolution models with dropout on node states.

Two architectures score a molecule with a single raw (pre-sigmoid) value:

* ``nfp`` - neural fingerprint: degree-specific convolutions with a sigmoid,
  softmax readout summed over atoms and layers, linear head.
* ``ggnn`` - gated graph network: bond-type-specific messages, GRU update
  shared across rounds, gated sum readout, linear head.

``linear`` is a transparent surrogate, ``f = sum_i w . phi_i + b``, used to
check attribution methods against closed forms.

Molecules are processed as a disjoint union (:class:`GraphBatch`), so one
taped pass scores any number of molecules.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .. import autodiff as ad
from ..molgraph import AtomVocabulary, MolecularGraph, featurize

MODEL_KINDS = ("nfp", "ggnn", "linear")
BOND_TYPE_INDEX = {"single": 0, "double": 1, "triple": 2, "aromatic": 3}
MAX_DEGREE = 4
FORMAT_VERSION = "1.0"


@dataclass
class ModelParams:
    kind: str
    vocab: AtomVocabulary
    hidden: int = 32
    rounds: int = 3
    fingerprint: int = 32
    dropout: float = 0.25
    task: str = "binary"
    tensors: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout rate must lie in [0, 1)")
        for name, t in self.tensors.items():
            if not np.all(np.isfinite(t)):
                raise ValueError(f"tensor {name} holds non-finite values")

    def copy(self) -> "ModelParams":
        return ModelParams(
            self.kind, self.vocab, self.hidden, self.rounds, self.fingerprint,
            self.dropout, self.task, {k: v.copy() for k, v in self.tensors.items()},
        )


def _lecun(rng, fan_in, fan_out):
    return rng.standard_normal((fan_in, fan_out)) / np.sqrt(fan_in)


def init_params(
    kind: str,
    vocab: AtomVocabulary,
    *,
    hidden: int = 32,
    rounds: int = 3,
    fingerprint: int = 32,
    dropout: float = 0.25,
    task: str = "binary",
    seed: int = 0,
) -> ModelParams:
    rng = np.random.default_rng(seed)
    d, F = hidden, fingerprint
    t: dict[str, np.ndarray] = {"embedding": rng.standard_normal((vocab.size, d))}
    if kind == "nfp":
        for l in range(rounds):
            for k in range(1, MAX_DEGREE + 1):
                t[f"conv{l}.deg{k}.weight"] = _lecun(rng, d, d)
                t[f"conv{l}.deg{k}.bias"] = np.zeros(d)
            t[f"readout{l}.weight"] = _lecun(rng, d, F)
            t[f"readout{l}.bias"] = np.zeros(F)
    elif kind == "ggnn":
        for bt in BOND_TYPE_INDEX:
            t[f"message.{bt}"] = _lecun(rng, d, d)
        for gate in ("z", "r", "h"):
            t[f"gru.w{gate}"] = _lecun(rng, d, d)
            t[f"gru.u{gate}"] = _lecun(rng, d, d)
            t[f"gru.b{gate}"] = np.zeros(d)
        t["readout.gate_h"] = _lecun(rng, d, F)
        t["readout.gate_x"] = _lecun(rng, d, F)
        t["readout.gate_b"] = np.zeros(F)
        t["readout.value_w"] = _lecun(rng, d, F)
        t["readout.value_b"] = np.zeros(F)
    elif kind == "linear":
        F = d
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    t["head.weight"] = _lecun(rng, F, 1)
    t["head.bias"] = np.zeros(1)
    return ModelParams(kind, vocab, hidden, rounds, fingerprint, dropout, task, t)


# ---------------------------------------------------------------------------
# batching


@dataclass
class GraphBatch:
    n_atoms: int
    n_mols: int
    features: np.ndarray
    mol_index: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    edge_type: np.ndarray
    degree_groups: list[np.ndarray]
    type_groups: list[tuple[np.ndarray, np.ndarray]]
    offsets: np.ndarray


@dataclass(frozen=True)
class EncodedGraph:
    features: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    edge_type: np.ndarray
    degree: np.ndarray


def encode(graph: MolecularGraph, vocab: AtomVocabulary) -> EncodedGraph:
    src, dst, et = [], [], []
    for b in graph.bonds:
        k = BOND_TYPE_INDEX[b.order]
        src += [b.i, b.j]
        dst += [b.j, b.i]
        et += [k, k]
    deg = np.clip(np.asarray(graph.degrees, dtype=np.int64), 1, MAX_DEGREE)
    return EncodedGraph(
        np.asarray(featurize(graph, vocab), dtype=np.int64),
        np.asarray(src, dtype=np.int64),
        np.asarray(dst, dtype=np.int64),
        np.asarray(et, dtype=np.int64),
        deg,
    )


def make_batch(encoded: list[EncodedGraph]) -> GraphBatch:
    sizes = np.array([len(e.features) for e in encoded], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    features = np.concatenate([e.features for e in encoded])
    mol_index = np.repeat(np.arange(len(encoded)), sizes)
    src = np.concatenate([e.src + o for e, o in zip(encoded, offsets)])
    dst = np.concatenate([e.dst + o for e, o in zip(encoded, offsets)])
    edge_type = np.concatenate([e.edge_type for e in encoded])
    degree = np.concatenate([e.degree for e in encoded])
    degree_groups = [np.flatnonzero(degree == k) for k in range(1, MAX_DEGREE + 1)]
    type_groups = [
        (src[edge_type == k], dst[edge_type == k]) for k in range(len(BOND_TYPE_INDEX))
    ]
    return GraphBatch(
        int(offsets[-1]), len(encoded), features, mol_index, src.astype(np.int64),
        dst.astype(np.int64), edge_type, degree_groups, type_groups, offsets,
    )


def batch_graphs(graphs: list[MolecularGraph], vocab: AtomVocabulary) -> GraphBatch:
    return make_batch([encode(g, vocab) for g in graphs])


# ---------------------------------------------------------------------------
# dropout masks


@dataclass(frozen=True)
class DropoutMaskSet:
    """One 0/1 mask per convolution round, plus the inverted-dropout scale.

    A set of all-ones masks with ``scale == 1`` is the identity.
    """

    masks: tuple[np.ndarray, ...]
    scale: float = 1.0

    @classmethod
    def ones(cls, rounds: int, n_atoms: int, hidden: int) -> "DropoutMaskSet":
        return cls(tuple(np.ones((n_atoms, hidden)) for _ in range(rounds)), 1.0)

    @classmethod
    def concat(cls, sets: list["DropoutMaskSet"]) -> "DropoutMaskSet":
        scales = {s.scale for s in sets}
        if len(scales) != 1:
            raise ValueError("cannot concatenate mask sets with different scales")
        rounds = len(sets[0].masks)
        return cls(
            tuple(np.concatenate([s.masks[r] for s in sets]) for r in range(rounds)),
            sets[0].scale,
        )


def sample_masks(params: ModelParams, n_atoms: int, rng: np.random.Generator) -> DropoutMaskSet:
    p = params.dropout
    rounds = params.rounds if params.kind != "linear" else 0
    masks = tuple(
        (rng.random((n_atoms, params.hidden)) >= p).astype(np.float64) for _ in range(rounds)
    )
    return DropoutMaskSet(masks, 1.0 / (1.0 - p))


# ---------------------------------------------------------------------------
# forward


def bind(tape: ad.Tape, params: ModelParams, trainable: bool = False) -> dict[str, ad.Var]:
    make = tape.leaf if trainable else tape.constant
    return {k: make(v) for k, v in params.tensors.items()}


def embed(tape: ad.Tape, features, params: ModelParams) -> ad.Var:
    """Node embedding matrix registered as a gradient leaf."""
    idx = np.asarray(features, dtype=np.int64)
    return tape.leaf(params.tensors["embedding"][idx])


def _check_masks(params, batch, masks):
    if masks is None:
        return
    rounds = 0 if params.kind == "linear" else params.rounds
    if len(masks.masks) != rounds:
        raise ValueError(f"expected {rounds} dropout masks, got {len(masks.masks)}")
    for m in masks.masks:
        if m.shape != (batch.n_atoms, params.hidden):
            raise ValueError(
                f"mask shape {m.shape} does not match ({batch.n_atoms}, {params.hidden})"
            )


def _nfp(tape, batch, phi, w, params, masks):
    n = batch.n_atoms
    h = phi
    fp = None
    for l in range(params.rounds):
        agg = h
        if batch.src.size:
            agg = ad.add(h, ad.scatter_add_rows(ad.gather_rows(h, batch.src), batch.dst, n))
        out = None
        for k, idx in enumerate(batch.degree_groups, start=1):
            if idx.size == 0:
                continue
            z = ad.add(ad.matmul(ad.gather_rows(agg, idx), w[f"conv{l}.deg{k}.weight"]),
                       w[f"conv{l}.deg{k}.bias"])
            part = ad.scatter_add_rows(z, idx, n)
            out = part if out is None else ad.add(out, part)
        h = ad.sigmoid(out)
        if masks is not None:
            h = ad.apply_mask(h, masks.masks[l], masks.scale)
        r = ad.row_softmax(ad.add(ad.matmul(h, w[f"readout{l}.weight"]), w[f"readout{l}.bias"]))
        pooled = ad.scatter_add_rows(r, batch.mol_index, batch.n_mols)
        fp = pooled if fp is None else ad.add(fp, pooled)
    return fp


def _ggnn(tape, batch, phi, w, params, masks):
    n = batch.n_atoms
    h = phi
    for l in range(params.rounds):
        m = None
        for bt, (src, dst) in zip(BOND_TYPE_INDEX, batch.type_groups):
            if src.size == 0:
                continue
            msg = ad.scatter_add_rows(ad.matmul(ad.gather_rows(h, src), w[f"message.{bt}"]), dst, n)
            m = msg if m is None else ad.add(m, msg)
        if m is None:
            m = tape.constant(np.zeros((n, params.hidden)))
        z = ad.sigmoid(ad.add(ad.add(ad.matmul(m, w["gru.wz"]), ad.matmul(h, w["gru.uz"])), w["gru.bz"]))
        r = ad.sigmoid(ad.add(ad.add(ad.matmul(m, w["gru.wr"]), ad.matmul(h, w["gru.ur"])), w["gru.br"]))
        cand = ad.tanh(ad.add(ad.add(ad.matmul(m, w["gru.wh"]), ad.matmul(ad.mul(r, h), w["gru.uh"])),
                              w["gru.bh"]))
        h = ad.add(h, ad.mul(z, ad.sub(cand, h)))
        if masks is not None:
            h = ad.apply_mask(h, masks.masks[l], masks.scale)
    gate = ad.sigmoid(ad.add(ad.add(ad.matmul(h, w["readout.gate_h"]), ad.matmul(phi, w["readout.gate_x"])),
                             w["readout.gate_b"]))
    value = ad.add(ad.matmul(h, w["readout.value_w"]), w["readout.value_b"])
    return ad.scatter_add_rows(ad.mul(gate, value), batch.mol_index, batch.n_mols)


def forward(
    tape: ad.Tape,
    batch: GraphBatch,
    phi: ad.Var,
    params: ModelParams,
    masks: DropoutMaskSet | None = None,
    weights: dict[str, ad.Var] | None = None,
) -> ad.Var:
    """Raw scores, shape ``(n_mols, 1)``.  ``masks=None`` disables dropout."""
    if phi.shape != (batch.n_atoms, params.hidden):
        raise ValueError(f"phi shape {phi.shape} does not match ({batch.n_atoms}, {params.hidden})")
    _check_masks(params, batch, masks)
    w = weights if weights is not None else bind(tape, params)
    if params.kind == "nfp":
        pooled = _nfp(tape, batch, phi, w, params, masks)
    elif params.kind == "ggnn":
        pooled = _ggnn(tape, batch, phi, w, params, masks)
    else:
        pooled = ad.scatter_add_rows(phi, batch.mol_index, batch.n_mols)
    return ad.add(ad.matmul(pooled, w["head.weight"]), w["head.bias"])


def score(graph: MolecularGraph, params: ModelParams, masks: DropoutMaskSet | None = None) -> float:
    """Raw score of one molecule."""
    tape = ad.Tape()
    batch = batch_graphs([graph], params.vocab)
    phi = embed(tape, batch.features, params)
    return float(forward(tape, batch, phi, params, masks).value[0, 0])


# ---------------------------------------------------------------------------
# persistence


def params_to_json(params: ModelParams) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "model_kind": params.kind,
        "task": params.task,
        "vocab": [[e, a] for e, a in params.vocab.entries],
        "dims": {
            "hidden": params.hidden,
            "rounds": params.rounds,
            "fingerprint": params.fingerprint,
            "max_degree": MAX_DEGREE,
        },
        "dropout_rate": params.dropout,
        # json writes floats with repr(), which round-trips float64 exactly
        "tensors": {
            k: {"shape": list(v.shape), "data": v.ravel().tolist()}
            for k, v in sorted(params.tensors.items())
        },
    }
    return json.dumps(doc, indent=1)


def check_version(found: str, supported: str = FORMAT_VERSION, what: str = "file"):
    major = int(str(found).split(".")[0])
    if major > int(supported.split(".")[0]):
        raise ValueError(f"{what} format version {found} is newer than supported {supported}")


def params_from_json(text: str) -> ModelParams:
    doc = json.loads(text)
    check_version(doc["format_version"], what="model")
    dims = doc["dims"]
    tensors = {
        k: np.asarray(v["data"], dtype=np.float64).reshape(v["shape"])
        for k, v in doc["tensors"].items()
    }
    return ModelParams(
        doc["model_kind"],
        AtomVocabulary(tuple((e, a) for e, a in doc["vocab"])),
        dims["hidden"],
        dims["rounds"],
        dims["fingerprint"],
        doc["dropout_rate"],
        doc.get("task", "binary"),
        tensors,
    )
