"""Dense reverse-mode automatic differentiation on a linear tape.

Values are float64 numpy arrays.  Every primitive appends one record to the
tape; :func:`backward` walks the records once in reverse order and returns the
gradient of a scalar output with respect to every registered leaf.

Randomness never lives inside a primitive.  Dropout masks are sampled by the
caller and applied with :func:`apply_mask`, so a taped forward pass is a pure
function of its inputs and can be checked against finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class ShapeError(ValueError):
    pass


class NonFiniteError(FloatingPointError):
    pass


@dataclass(frozen=True)
class Record:
    op: str
    inputs: tuple[int, ...]
    output: int
    saved: tuple


class Var:
    """Handle to one value stored on a tape."""

    __slots__ = ("tape", "id")

    def __init__(self, tape: "Tape", id: int):
        self.tape = tape
        self.id = id

    @property
    def value(self) -> np.ndarray:
        return self.tape.values[self.id]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.tape.values[self.id].shape

    def __repr__(self):
        return f"Var(id={self.id}, shape={self.shape})"


class Tape:
    def __init__(self):
        self.values: list[np.ndarray] = []
        self.records: list[Record] = []
        self.leaves: list[int] = []

    def _store(self, array: np.ndarray, op: str) -> int:
        if not np.all(np.isfinite(array)):
            raise NonFiniteError(f"{op}: produced a non-finite value")
        self.values.append(array)
        return len(self.values) - 1

    def leaf(self, array) -> Var:
        """Register a differentiable input."""
        arr = np.array(array, dtype=np.float64)
        idx = self._store(arr, "leaf")
        self.leaves.append(idx)
        return Var(self, idx)

    def constant(self, array) -> Var:
        arr = np.asarray(array, dtype=np.float64)
        return Var(self, self._store(arr, "constant"))

    def push(self, op: str, inputs: tuple[Var, ...], out: np.ndarray, saved: tuple = ()) -> Var:
        for v in inputs:
            if v.tape is not self:
                raise ValueError(f"{op}: input belongs to another tape")
        idx = self._store(out, op)
        self.records.append(Record(op, tuple(v.id for v in inputs), idx, saved))
        return Var(self, idx)


def _shape_error(op: str, a, b) -> ShapeError:
    return ShapeError(f"{op}: incompatible shapes {tuple(a)} and {tuple(b)}")


# ---------------------------------------------------------------------------
# primitives


def matmul(a: Var, b: Var) -> Var:
    if a.value.ndim != 2 or b.value.ndim != 2 or a.shape[1] != b.shape[0]:
        raise _shape_error("matmul", a.shape, b.shape)
    return a.tape.push("matmul", (a, b), a.value @ b.value)


def _row_broadcastable(a: np.ndarray, b: np.ndarray) -> bool:
    if a.shape == b.shape:
        return True
    # bias rows: (n, m) with (m,) or (1, m)
    return a.ndim == 2 and b.shape in ((a.shape[1],), (1, a.shape[1]))


def add(a: Var, b: Var) -> Var:
    if not _row_broadcastable(a.value, b.value):
        raise _shape_error("add", a.shape, b.shape)
    return a.tape.push("add", (a, b), a.value + b.value)


def sub(a: Var, b: Var) -> Var:
    if not _row_broadcastable(a.value, b.value):
        raise _shape_error("sub", a.shape, b.shape)
    return a.tape.push("sub", (a, b), a.value - b.value)


def mul(a: Var, b: Var) -> Var:
    if a.shape != b.shape:
        raise _shape_error("mul", a.shape, b.shape)
    return a.tape.push("mul", (a, b), a.value * b.value)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(x: Var) -> Var:
    return x.tape.push("sigmoid", (x,), _sigmoid(x.value))


def tanh(x: Var) -> Var:
    return x.tape.push("tanh", (x,), np.tanh(x.value))


def relu(x: Var) -> Var:
    return x.tape.push("relu", (x,), np.maximum(x.value, 0.0))


def row_softmax(x: Var) -> Var:
    if x.value.ndim != 2:
        raise ShapeError(f"row_softmax: expected a matrix, got shape {x.shape}")
    z = x.value - x.value.max(axis=1, keepdims=True)
    e = np.exp(z)
    return x.tape.push("row_softmax", (x,), e / e.sum(axis=1, keepdims=True))


def sum_all(x: Var) -> Var:
    return x.tape.push("sum_all", (x,), np.array(x.value.sum()))


def gather_rows(x: Var, index) -> Var:
    idx = np.asarray(index, dtype=np.int64)
    n = x.shape[0]
    if idx.ndim != 1 or (idx.size and (idx.min() < 0 or idx.max() >= n)):
        raise ShapeError(f"gather_rows: index out of range for {n} rows")
    return x.tape.push("gather_rows", (x,), x.value[idx], (idx, n))


def scatter_add_rows(x: Var, index, n_out: int) -> Var:
    """Row ``k`` of ``x`` is added into output row ``index[k]``."""
    idx = np.asarray(index, dtype=np.int64)
    if idx.shape != (x.shape[0],):
        raise _shape_error("scatter_add_rows", x.shape, idx.shape)
    if idx.size and (idx.min() < 0 or idx.max() >= n_out):
        raise ShapeError(f"scatter_add_rows: index out of range for {n_out} rows")
    out = np.zeros((n_out,) + x.shape[1:])
    np.add.at(out, idx, x.value)
    return x.tape.push("scatter_add_rows", (x,), out, (idx,))


def apply_mask(x: Var, mask, scale: float = 1.0) -> Var:
    """Elementwise ``x * mask * scale`` with a constant 0/1 mask."""
    m = np.asarray(mask, dtype=np.float64)
    if m.shape != x.shape:
        raise _shape_error("apply_mask", x.shape, m.shape)
    if not np.all((m == 0.0) | (m == 1.0)):
        raise ValueError("apply_mask: mask entries must be 0.0 or 1.0")
    factor = m * scale
    return x.tape.push("apply_mask", (x,), x.value * factor, (factor,))


# ---------------------------------------------------------------------------
# vector-Jacobian products: (grad_out, saved, input values, output value) -> input grads


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if g.shape == shape:
        return g
    return g.sum(axis=0).reshape(shape)


def _vjp_matmul(g, saved, ins, out):
    a, b = ins
    return g @ b.T, a.T @ g


def _vjp_add(g, saved, ins, out):
    return g, _unbroadcast(g, ins[1].shape)


def _vjp_sub(g, saved, ins, out):
    return g, -_unbroadcast(g, ins[1].shape)


def _vjp_mul(g, saved, ins, out):
    a, b = ins
    return g * b, g * a


def _vjp_sigmoid(g, saved, ins, out):
    return (g * out * (1.0 - out),)


def _vjp_tanh(g, saved, ins, out):
    return (g * (1.0 - out * out),)


def _vjp_relu(g, saved, ins, out):
    return (g * (ins[0] > 0.0),)


def _vjp_row_softmax(g, saved, ins, out):
    inner = (g * out).sum(axis=1, keepdims=True)
    return (out * (g - inner),)


def _vjp_sum_all(g, saved, ins, out):
    return (np.full(ins[0].shape, float(g)),)


def _vjp_gather_rows(g, saved, ins, out):
    idx, n = saved
    dx = np.zeros((n,) + g.shape[1:])
    np.add.at(dx, idx, g)
    return (dx,)


def _vjp_scatter_add_rows(g, saved, ins, out):
    (idx,) = saved
    return (g[idx],)


def _vjp_apply_mask(g, saved, ins, out):
    (factor,) = saved
    return (g * factor,)


VJP: dict[str, Callable] = {
    "matmul": _vjp_matmul,
    "add": _vjp_add,
    "sub": _vjp_sub,
    "mul": _vjp_mul,
    "sigmoid": _vjp_sigmoid,
    "tanh": _vjp_tanh,
    "relu": _vjp_relu,
    "row_softmax": _vjp_row_softmax,
    "sum_all": _vjp_sum_all,
    "gather_rows": _vjp_gather_rows,
    "scatter_add_rows": _vjp_scatter_add_rows,
    "apply_mask": _vjp_apply_mask,
}


def backward(tape: Tape, output: Var) -> dict[int, np.ndarray]:
    """Gradient of a scalar ``output`` with respect to every leaf of ``tape``.

    Returns a mapping leaf id -> gradient array of the leaf's shape.  Leaves
    that do not influence the output get a zero array.
    """
    if output.tape is not tape:
        raise ValueError("backward: output belongs to another tape")
    if output.value.size != 1:
        raise ShapeError(f"backward: output must be scalar, got shape {output.shape}")

    grads: list[np.ndarray | None] = [None] * len(tape.values)
    grads[output.id] = np.ones_like(tape.values[output.id])
    for rec in reversed(tape.records):
        if rec.output > output.id:
            continue
        g = grads[rec.output]
        if g is None:
            continue
        ins = tuple(tape.values[i] for i in rec.inputs)
        for i, gi in zip(rec.inputs, VJP[rec.op](g, rec.saved, ins, tape.values[rec.output])):
            grads[i] = gi if grads[i] is None else grads[i] + gi

    return {
        leaf: grads[leaf] if grads[leaf] is not None else np.zeros_like(tape.values[leaf])
        for leaf in tape.leaves
    }


def _central_differences(forward, batch_forward, x, coords, eps, dtype):
    n = len(coords)
    steps = np.repeat(x.astype(dtype)[None], 2 * n, axis=0)
    flat = steps.reshape(2 * n, x.size)
    rows = np.arange(n)
    flat[rows, coords] += eps
    flat[n + rows, coords] -= eps
    if batch_forward is not None:
        vals = np.asarray(batch_forward(steps)).reshape(2 * n)
    else:
        vals = np.empty(2 * n)
        for k in range(2 * n):
            t = Tape()
            vals[k] = float(forward(t, t.leaf(steps[k])).value)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteError("grad_check: forward value is not finite")
    return ((vals[:n] - vals[n:]) / (2 * np.asarray(eps, dtype=vals.dtype))).astype(np.float64)


def _relative_error(a, b):
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-12)


def grad_check(
    forward,
    x,
    eps: float = 1e-5,
    batch_forward=None,
    refine_forward=None,
    refine_dtype=np.longdouble,
    refine_above: float = 1e-7,
) -> float:
    """Max relative error between the taped gradient and central differences.

    The error per coordinate is ``|analytic - fd| / max(|analytic|, |fd|, 1e-12)``.

    ``forward(tape, x_var)`` must return a scalar Var and be deterministic.
    ``batch_forward(stack)``, if given, maps an array of shape ``(k, *x.shape)``
    to ``k`` scalar values and evaluates the perturbed points in one call.

    ``refine_forward`` is a batch evaluator of the same function that accepts
    ``refine_dtype`` input.  Coordinates whose float64 difference disagrees by
    more than ``refine_above`` are differenced again at that precision, which
    removes float64 roundoff from small gradient entries; a genuinely wrong
    analytic gradient disagrees at any precision.
    """
    x = np.asarray(x, dtype=np.float64)
    tape = Tape()
    leaf = tape.leaf(x)
    out = forward(tape, leaf)
    if not np.isfinite(out.value).all():
        raise NonFiniteError("grad_check: forward value is not finite")
    if x.size == 0:
        return 0.0
    analytic = backward(tape, out)[leaf.id].ravel()

    coords = np.arange(x.size)
    fd = _central_differences(forward, batch_forward, x, coords, eps, np.float64)
    err = _relative_error(analytic, fd)
    if refine_forward is not None:
        redo = coords[err > refine_above]
        if redo.size:
            fd[redo] = _central_differences(None, refine_forward, x, redo, eps, refine_dtype)
            err = _relative_error(analytic, fd)
    return float(err.max())
