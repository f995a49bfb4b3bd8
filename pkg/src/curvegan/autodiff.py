"""Minimal reverse-mode automatic differentiation over dense float64 arrays.

Graphs are built symbolically from named inputs and constants, then evaluated
against a bindings map.  Every primitive carries an analytic adjoint, so
``gradient`` returns exact derivatives of a scalar output with respect to any
requested inputs.  New primitives (e.g. the rational Bezier layer) can be
added through ``register_primitive``.
"""

from __future__ import annotations

import itertools

import numpy as np

Tensor = np.ndarray

# Arguments of log and denominators are clamped at this magnitude.
STABILITY_EPS = 1e-12


class AutodiffError(Exception):
    """Base class for graph construction/evaluation failures."""


class ShapeMismatchError(AutodiffError):
    pass


class UnboundInputError(AutodiffError):
    pass


class NonScalarOutputError(AutodiffError):
    pass


def as_tensor(value) -> Tensor:
    return np.asarray(value, dtype=np.float64)


class Node:
    """One vertex of the computation DAG.

    Immutable after construction; evaluation caches live outside the node so
    a graph can be reused with fresh bindings.
    """

    __slots__ = ("op", "inputs", "attrs", "name", "uid")
    _ids = itertools.count()

    def __init__(self, op: str, inputs: tuple = (), name: str | None = None, **attrs):
        self.op = op
        self.inputs = tuple(inputs)
        self.attrs = attrs
        self.uid = next(Node._ids)
        self.name = name if name is not None else f"{op}#{self.uid}"

    def __repr__(self):
        return f"Node({self.name})"

    # Operator sugar; scalars/arrays are promoted to constants.
    def __add__(self, other):
        return add(self, _wrap(other))

    def __radd__(self, other):
        return add(_wrap(other), self)

    def __sub__(self, other):
        return subtract(self, _wrap(other))

    def __rsub__(self, other):
        return subtract(_wrap(other), self)

    def __mul__(self, other):
        return multiply(self, _wrap(other))

    def __rmul__(self, other):
        return multiply(_wrap(other), self)

    def __truediv__(self, other):
        return divide(self, _wrap(other))

    def __rtruediv__(self, other):
        return divide(_wrap(other), self)

    def __matmul__(self, other):
        return matmul(self, _wrap(other))

    def __neg__(self):
        return multiply(constant(-1.0), self)


def _wrap(x) -> Node:
    return x if isinstance(x, Node) else constant(x)


def input_node(name: str) -> Node:
    return Node("input", (), name=name)


def constant(value) -> Node:
    return Node("const", (), value=as_tensor(value))


# ---------------------------------------------------------------------------
# Primitive registry

_FORWARD = {}
_BACKWARD = {}


def register_primitive(op: str, forward, backward):
    """Register forward(node, xs) -> array and backward(node, xs, y, g) -> grads.

    ``grads`` must align with ``node.inputs``; entries may be None for inputs
    that do not receive gradient.
    """
    if op in _FORWARD:
        raise ValueError(f"primitive {op!r} already registered")
    _FORWARD[op] = forward
    _BACKWARD[op] = backward


def _primitive(op):
    def decorate(pair_fn):
        fwd, bwd = pair_fn()
        register_primitive(op, fwd, bwd)
        return pair_fn

    return decorate


def _unbroadcast(grad: Tensor, shape: tuple) -> Tensor:
    """Sum gradient over axes that numpy broadcasting expanded."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _check(cond, node, msg):
    if not cond:
        raise ShapeMismatchError(f"node {node.name}: {msg}")


# --- elementwise arithmetic -------------------------------------------------


@_primitive("add")
def _op_add():
    def fwd(node, xs):
        a, b = xs
        try:
            return a + b
        except ValueError as exc:
            raise ShapeMismatchError(f"node {node.name}: {exc}") from None

    def bwd(node, xs, y, g):
        return [_unbroadcast(g, xs[0].shape), _unbroadcast(g, xs[1].shape)]

    return fwd, bwd


@_primitive("subtract")
def _op_subtract():
    def fwd(node, xs):
        return xs[0] - xs[1]

    def bwd(node, xs, y, g):
        return [_unbroadcast(g, xs[0].shape), _unbroadcast(-g, xs[1].shape)]

    return fwd, bwd


@_primitive("multiply")
def _op_multiply():
    def fwd(node, xs):
        return xs[0] * xs[1]

    def bwd(node, xs, y, g):
        a, b = xs
        return [_unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape)]

    return fwd, bwd


def _clamp_denominator(d: Tensor) -> Tensor:
    # Preserve sign; zero denominators count as positive.
    sign = np.where(d < 0, -1.0, 1.0)
    return sign * np.maximum(np.abs(d), STABILITY_EPS)


@_primitive("divide")
def _op_divide():
    def fwd(node, xs):
        return xs[0] / _clamp_denominator(xs[1])

    def bwd(node, xs, y, g):
        a, b = xs
        bc = _clamp_denominator(b)
        return [_unbroadcast(g / bc, a.shape), _unbroadcast(-g * a / (bc * bc), b.shape)]

    return fwd, bwd


@_primitive("power")
def _op_power():
    # Exponent is a constant attribute; gradient flows to the base only.
    def fwd(node, xs):
        return np.power(xs[0], node.attrs["exponent"])

    def bwd(node, xs, y, g):
        p = node.attrs["exponent"]
        base = xs[0]
        if p < 1:
            base = np.where(np.abs(base) < STABILITY_EPS, STABILITY_EPS, base)
        return [g * p * np.power(base, p - 1.0)]

    return fwd, bwd


@_primitive("sqrt")
def _op_sqrt():
    def fwd(node, xs):
        return np.sqrt(xs[0])

    def bwd(node, xs, y, g):
        return [g / (2.0 * np.maximum(y, STABILITY_EPS))]

    return fwd, bwd


@_primitive("absolute")
def _op_absolute():
    def fwd(node, xs):
        return np.abs(xs[0])

    def bwd(node, xs, y, g):
        return [g * np.sign(xs[0])]

    return fwd, bwd


@_primitive("exp")
def _op_exp():
    def fwd(node, xs):
        return np.exp(xs[0])

    def bwd(node, xs, y, g):
        return [g * y]

    return fwd, bwd


@_primitive("log")
def _op_log():
    def fwd(node, xs):
        return np.log(np.maximum(xs[0], STABILITY_EPS))

    def bwd(node, xs, y, g):
        return [g / np.maximum(xs[0], STABILITY_EPS)]

    return fwd, bwd


# --- activations ------------------------------------------------------------


def _sigmoid(x: Tensor) -> Tensor:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@_primitive("sigmoid")
def _op_sigmoid():
    def fwd(node, xs):
        return _sigmoid(xs[0])

    def bwd(node, xs, y, g):
        return [g * y * (1.0 - y)]

    return fwd, bwd


@_primitive("tanh")
def _op_tanh():
    def fwd(node, xs):
        return np.tanh(xs[0])

    def bwd(node, xs, y, g):
        return [g * (1.0 - y * y)]

    return fwd, bwd


@_primitive("softplus")
def _op_softplus():
    def fwd(node, xs):
        return np.logaddexp(0.0, xs[0])

    def bwd(node, xs, y, g):
        return [g * _sigmoid(xs[0])]

    return fwd, bwd


@_primitive("leaky_relu")
def _op_leaky_relu():
    def fwd(node, xs):
        alpha = node.attrs["alpha"]
        x = xs[0]
        return np.where(x >= 0, x, alpha * x)

    def bwd(node, xs, y, g):
        alpha = node.attrs["alpha"]
        return [g * np.where(xs[0] >= 0, 1.0, alpha)]

    return fwd, bwd


@_primitive("softmax")
def _op_softmax():
    def fwd(node, xs):
        axis = node.attrs["axis"]
        shifted = xs[0] - xs[0].max(axis=axis, keepdims=True)
        e = np.exp(shifted)
        return e / e.sum(axis=axis, keepdims=True)

    def bwd(node, xs, y, g):
        axis = node.attrs["axis"]
        dot = (g * y).sum(axis=axis, keepdims=True)
        return [y * (g - dot)]

    return fwd, bwd


# --- linear algebra / structure ----------------------------------------------


@_primitive("matmul")
def _op_matmul():
    def fwd(node, xs):
        a, b = xs
        _check(a.ndim >= 2 and b.ndim >= 2, node, f"matmul needs 2-D+ operands, got {a.shape} @ {b.shape}")
        _check(a.shape[-1] == b.shape[-2], node, f"inner dims differ: {a.shape} @ {b.shape}")
        return np.matmul(a, b)

    def bwd(node, xs, y, g):
        a, b = xs
        ga = np.matmul(g, np.swapaxes(b, -1, -2))
        gb = np.matmul(np.swapaxes(a, -1, -2), g)
        return [_unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)]

    return fwd, bwd


@_primitive("reshape")
def _op_reshape():
    def fwd(node, xs):
        try:
            return xs[0].reshape(node.attrs["shape"])
        except ValueError as exc:
            raise ShapeMismatchError(f"node {node.name}: {exc}") from None

    def bwd(node, xs, y, g):
        return [g.reshape(xs[0].shape)]

    return fwd, bwd


@_primitive("concatenate")
def _op_concatenate():
    def fwd(node, xs):
        try:
            return np.concatenate(xs, axis=node.attrs["axis"])
        except ValueError as exc:
            raise ShapeMismatchError(f"node {node.name}: {exc}") from None

    def bwd(node, xs, y, g):
        axis = node.attrs["axis"]
        sizes = [x.shape[axis] for x in xs]
        return list(np.split(g, np.cumsum(sizes)[:-1], axis=axis))

    return fwd, bwd


@_primitive("narrow")
def _op_narrow():
    def fwd(node, xs):
        axis, start, length = node.attrs["axis"], node.attrs["start"], node.attrs["length"]
        x = xs[0]
        _check(0 <= start and start + length <= x.shape[axis], node,
               f"narrow [{start}:{start + length}) outside axis {axis} of {x.shape}")
        idx = [slice(None)] * x.ndim
        idx[axis] = slice(start, start + length)
        return x[tuple(idx)]

    def bwd(node, xs, y, g):
        axis, start = node.attrs["axis"], node.attrs["start"]
        gx = np.zeros_like(xs[0])
        idx = [slice(None)] * gx.ndim
        idx[axis] = slice(start, start + g.shape[axis])
        gx[tuple(idx)] = g
        return [gx]

    return fwd, bwd


# --- reductions ---------------------------------------------------------------


@_primitive("sum")
def _op_sum():
    def fwd(node, xs):
        return np.sum(xs[0], axis=node.attrs["axis"], keepdims=node.attrs["keepdims"])

    def bwd(node, xs, y, g):
        return [_spread(g, xs[0].shape, node.attrs["axis"], node.attrs["keepdims"])]

    return fwd, bwd


@_primitive("mean")
def _op_mean():
    def fwd(node, xs):
        return np.mean(xs[0], axis=node.attrs["axis"], keepdims=node.attrs["keepdims"])

    def bwd(node, xs, y, g):
        axis = node.attrs["axis"]
        x = xs[0]
        count = x.size if axis is None else x.shape[axis]
        return [_spread(g, x.shape, axis, node.attrs["keepdims"]) / count]

    return fwd, bwd


@_primitive("max_reduce")
def _op_max_reduce():
    def fwd(node, xs):
        return np.max(xs[0], axis=node.attrs["axis"], keepdims=node.attrs["keepdims"])

    def bwd(node, xs, y, g):
        axis, keepdims = node.attrs["axis"], node.attrs["keepdims"]
        x = xs[0]
        yk = y if (keepdims or axis is None) else np.expand_dims(y, axis)
        gk = g if (keepdims or axis is None) else np.expand_dims(g, axis)
        mask = (x == yk).astype(np.float64)
        # Ties share the gradient equally (valid subgradient).
        mask /= mask.sum(axis=axis, keepdims=True) if axis is not None else mask.sum()
        return [mask * gk]

    return fwd, bwd


def _spread(g: Tensor, shape: tuple, axis, keepdims: bool) -> Tensor:
    if axis is None:
        return np.broadcast_to(g, shape).copy() if np.ndim(g) == 0 else np.full(shape, g)
    if not keepdims:
        g = np.expand_dims(g, axis)
    return np.broadcast_to(g, shape).copy()


# --- 1-D convolutions ----------------------------------------------------------


def _conv_geometry(length: int, kernel: int, stride: int):
    out_len = -(-length // stride)
    pad_total = max((out_len - 1) * stride + kernel - length, 0)
    pad_left = pad_total - pad_total // 2
    return out_len, pad_left, pad_total - pad_left


def _to_batched(x: Tensor):
    """View [L, C] input as [1, L, C]; pass [B, L, C] through."""
    if x.ndim == 2:
        return x[None], True
    if x.ndim == 3:
        return x, False
    raise ShapeMismatchError(f"conv input must be 2-D or 3-D, got shape {x.shape}")


def _gather_windows(xp: Tensor, out_len: int, kernel: int, stride: int) -> Tensor:
    # xp: [B, Lp, C] -> windows [B, out_len, K, C]
    idx = np.arange(out_len)[:, None] * stride + np.arange(kernel)[None, :]
    return xp[:, idx, :]


@_primitive("conv1d")
def _op_conv1d():
    def fwd(node, xs):
        x, k = xs
        xb, squeeze = _to_batched(x)
        _check(k.ndim == 3, node, f"kernel must be [k, in, out], got {k.shape}")
        _check(k.shape[0] % 2 == 1, node, "kernel size must be odd")
        _check(xb.shape[2] == k.shape[1], node,
               f"channel mismatch: input {xb.shape[2]} vs kernel {k.shape[1]}")
        _check(xb.shape[1] >= k.shape[0], node, "input shorter than kernel")
        stride = node.attrs["stride"]
        out_len, pl, pr = _conv_geometry(xb.shape[1], k.shape[0], stride)
        xp = np.pad(xb, ((0, 0), (pl, pr), (0, 0)))
        win = _gather_windows(xp, out_len, k.shape[0], stride)
        y = np.einsum("botc,tcd->bod", win, k)
        return y[0] if squeeze else y

    def bwd(node, xs, y, g):
        x, k = xs
        xb, squeeze = _to_batched(x)
        gb = g[None] if squeeze else g
        stride = node.attrs["stride"]
        ksz = k.shape[0]
        out_len, pl, pr = _conv_geometry(xb.shape[1], ksz, stride)
        xp = np.pad(xb, ((0, 0), (pl, pr), (0, 0)))
        win = _gather_windows(xp, out_len, ksz, stride)
        gk = np.einsum("botc,bod->tcd", win, gb)
        gwin = np.einsum("bod,tcd->botc", gb, k)
        gxp = np.zeros_like(xp)
        last = (out_len - 1) * stride
        for t in range(ksz):
            gxp[:, t:t + last + 1:stride, :] += gwin[:, :, t, :]
        gx = gxp[:, pl:pl + xb.shape[1], :]
        return [gx[0] if squeeze else gx, gk]

    return fwd, bwd


@_primitive("conv1d_transpose")
def _op_conv1d_transpose():
    # Exact adjoint of conv1d mapping length L*stride -> L; forward here
    # therefore maps L -> L*stride.
    def fwd(node, xs):
        x, k = xs
        xb, squeeze = _to_batched(x)
        _check(k.ndim == 3, node, f"kernel must be [k, in, out], got {k.shape}")
        _check(xb.shape[2] == k.shape[1], node,
               f"channel mismatch: input {xb.shape[2]} vs kernel {k.shape[1]}")
        stride = node.attrs["stride"]
        in_len = xb.shape[1]
        full_len = in_len * stride
        ksz = k.shape[0]
        _, pl, pr = _conv_geometry(full_len, ksz, stride)
        contrib = np.einsum("boc,ctd->botd", xb, k.transpose(1, 0, 2))
        yp = np.zeros((xb.shape[0], full_len + pl + pr, k.shape[2]))
        last = (in_len - 1) * stride
        for t in range(ksz):
            yp[:, t:t + last + 1:stride, :] += contrib[:, :, t, :]
        y = yp[:, pl:pl + full_len, :]
        return y[0] if squeeze else y

    def bwd(node, xs, y, g):
        x, k = xs
        xb, squeeze = _to_batched(x)
        gb = g[None] if squeeze else g
        stride = node.attrs["stride"]
        in_len = xb.shape[1]
        full_len = in_len * stride
        ksz = k.shape[0]
        _, pl, pr = _conv_geometry(full_len, ksz, stride)
        gp = np.pad(gb, ((0, 0), (pl, pr), (0, 0)))
        win = _gather_windows(gp, in_len, ksz, stride)
        gx = np.einsum("botd,tcd->boc", win, k)
        gk = np.einsum("botd,boc->tcd", win, xb)
        return [gx[0] if squeeze else gx, gk]

    return fwd, bwd


# ---------------------------------------------------------------------------
# Graph construction helpers


def add(a: Node, b: Node) -> Node:
    return Node("add", (a, b))


def subtract(a: Node, b: Node) -> Node:
    return Node("subtract", (a, b))


def multiply(a: Node, b: Node) -> Node:
    return Node("multiply", (a, b))


def divide(a: Node, b: Node) -> Node:
    return Node("divide", (a, b))


def power(x: Node, exponent: float) -> Node:
    return Node("power", (x,), exponent=float(exponent))


def sqrt(x: Node) -> Node:
    return Node("sqrt", (x,))


def absolute(x: Node) -> Node:
    return Node("absolute", (x,))


def exp(x: Node) -> Node:
    return Node("exp", (x,))


def log(x: Node) -> Node:
    return Node("log", (x,))


def sigmoid(x: Node) -> Node:
    return Node("sigmoid", (x,))


def tanh(x: Node) -> Node:
    return Node("tanh", (x,))


def softplus(x: Node) -> Node:
    return Node("softplus", (x,))


def leaky_relu(x: Node, alpha: float = 0.2) -> Node:
    return Node("leaky_relu", (x,), alpha=float(alpha))


def softmax(x: Node, axis: int = -1) -> Node:
    return Node("softmax", (x,), axis=axis)


def matmul(a: Node, b: Node) -> Node:
    return Node("matmul", (a, b))


def reshape(x: Node, shape) -> Node:
    return Node("reshape", (x,), shape=tuple(shape))


def concatenate(xs, axis: int = 0) -> Node:
    return Node("concatenate", tuple(xs), axis=axis)


def narrow(x: Node, axis: int, start: int, length: int) -> Node:
    return Node("narrow", (x,), axis=axis, start=start, length=length)


def sum_(x: Node, axis=None, keepdims: bool = False) -> Node:
    return Node("sum", (x,), axis=axis, keepdims=keepdims)


def mean(x: Node, axis=None, keepdims: bool = False) -> Node:
    return Node("mean", (x,), axis=axis, keepdims=keepdims)


def max_reduce(x: Node, axis=None, keepdims: bool = False) -> Node:
    return Node("max_reduce", (x,), axis=axis, keepdims=keepdims)


def conv1d(x: Node, kernels: Node, stride: int = 1) -> Node:
    return Node("conv1d", (x, kernels), stride=int(stride))


def conv1d_transpose(x: Node, kernels: Node, stride: int = 1) -> Node:
    return Node("conv1d_transpose", (x, kernels), stride=int(stride))


# ---------------------------------------------------------------------------
# Evaluation


def _topo_order(roots) -> list[Node]:
    order, seen = [], set()
    stack = [(r, False) for r in reversed(roots)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if node.uid in seen:
            continue
        seen.add(node.uid)
        stack.append((node, True))
        for inp in reversed(node.inputs):
            stack.append((inp, False))
    return order


def _forward(order: list[Node], bindings: dict) -> dict:
    values: dict[int, Tensor] = {}
    for node in order:
        if node.op == "input":
            if node.name not in bindings:
                raise UnboundInputError(f"input {node.name!r} is not bound")
            values[node.uid] = as_tensor(bindings[node.name])
        elif node.op == "const":
            values[node.uid] = node.attrs["value"]
        else:
            xs = [values[i.uid] for i in node.inputs]
            values[node.uid] = _FORWARD[node.op](node, xs)
    return values


def evaluate(graph: Node, bindings: dict) -> Tensor:
    """Forward-evaluate one root node against named input bindings."""
    return evaluate_many([graph], bindings)[0]


def evaluate_many(roots, bindings: dict) -> list[Tensor]:
    """Evaluate several roots sharing one forward pass and cache."""
    order = _topo_order(list(roots))
    values = _forward(order, bindings)
    return [values[r.uid] for r in roots]


def gradient(graph: Node, bindings: dict, wrt) -> dict[str, Tensor]:
    """Derivatives of the scalar ``graph`` output w.r.t. the named inputs."""
    _, grads, _ = value_and_grad(graph, bindings, wrt)
    return grads


def value_and_grad(graph: Node, bindings: dict, wrt, aux=()):
    """Evaluate a scalar root, its gradients, and auxiliary roots in one pass.

    Returns (value, {name: grad}, [aux values]).
    """
    wrt = list(wrt)
    roots = [graph, *aux]
    order = _topo_order(roots)
    input_names = {n.name for n in order if n.op == "input"}
    for name in wrt:
        if name not in input_names:
            raise AutodiffError(f"gradient requested for input {name!r} not present in graph")
    values = _forward(order, bindings)
    out = values[graph.uid]
    if out.ndim != 0 and out.size != 1:
        raise NonScalarOutputError(f"gradient requires a scalar output, got shape {out.shape}")

    adjoints: dict[int, Tensor] = {graph.uid: np.ones_like(out)}
    grads = {name: None for name in wrt}
    wanted = set(wrt)
    for node in reversed(order):
        g = adjoints.pop(node.uid, None)
        if g is None:
            continue
        if node.op == "input":
            if node.name in wanted:
                prev = grads[node.name]
                grads[node.name] = g if prev is None else prev + g
            continue
        if node.op == "const":
            continue
        xs = [values[i.uid] for i in node.inputs]
        partials = _BACKWARD[node.op](node, xs, values[node.uid], g)
        for inp, part in zip(node.inputs, partials):
            if part is None:
                continue
            if inp.uid in adjoints:
                adjoints[inp.uid] = adjoints[inp.uid] + part
            else:
                adjoints[inp.uid] = part
    for name in wrt:
        if grads[name] is None:
            grads[name] = np.zeros_like(as_tensor(bindings[name]))
    return out, grads, [values[a.uid] for a in aux]
