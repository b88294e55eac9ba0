"""Dense tensors with tape-based reverse-mode differentiation.

The op catalog is deliberately small: matmul, elementwise add/sub/mul,
tanh, sigmoid, concat, row lookup (embedding), softmax, fused
cross-entropy-from-logits and sum/mean reductions.  Every op records a
backward closure; ``Tensor.backward`` walks the tape in reverse
topological order.  There is no broadcasting beyond what numpy already
does; gradients of broadcast operands are summed back to their shape.
"""

from __future__ import annotations

import math

import numpy as np

# float32 keeps training fast; gradient checks switch to float64.
DEFAULT_DTYPE = np.float32

_FLOAT_DTYPES = (np.float32, np.float64)


def _as_array(data, dtype=None):
    arr = np.asarray(data)
    if dtype is not None:
        return arr.astype(dtype, copy=False)
    if arr.dtype in _FLOAT_DTYPES:
        return arr
    return arr.astype(DEFAULT_DTYPE)


class Tensor:
    """A numpy array plus the tape hooks needed for reverse mode.

    Tensors are treated as immutable once built; parameter updates
    replace ``data`` wholesale between steps.
    """

    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, name=None, dtype=None,
                 _parents=(), _backward=None):
        self.data = _as_array(data, dtype)
        self.grad = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self):
        tag = self.name or "tensor"
        return f"Tensor({tag}, shape={self.data.shape}, dtype={self.data.dtype})"

    def _label(self):
        return self.name if self.name else f"<{self.data.shape}>"

    # -- operator sugar -------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return mul(self, -1.0)

    def tanh(self):
        return tanh(self)

    def sigmoid(self):
        return sigmoid(self)

    def sum(self, axis=None):
        return tensor_sum(self, axis)

    def mean(self, axis=None):
        return tensor_mean(self, axis)

    def reshape(self, shape):
        return reshape(self, shape)

    # -- reverse pass ----------------------------------------------------

    def backward(self):
        """Accumulate gradients of this scalar into every reachable node."""
        if self.data.size != 1:
            raise ValueError(
                f"backward() needs a scalar loss, got shape {self.data.shape}")
        topo = _toposort(self)
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def detach(self):
        return Tensor(self.data, requires_grad=False, name=self.name)


def _toposort(root):
    """Iterative post-order over the tape (graphs are too deep to recurse)."""
    order = []
    seen = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in seen:
                stack.append((parent, False))
    return order


def _accum(node, g):
    if node.grad is None:
        node.grad = np.array(g, dtype=node.data.dtype, copy=True)
    else:
        node.grad += g


def _unbroadcast(grad, shape):
    """Sum a broadcast gradient back down to the operand's shape."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _coerce(x, like):
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=like.data.dtype))


# -- elementwise ops ------------------------------------------------------

def _pair(a, b):
    if isinstance(a, Tensor):
        return a, _coerce(b, a)
    return _coerce(a, b), b


def add(a, b):
    a, b = _pair(a, b)
    try:
        out_data = a.data + b.data
    except ValueError:
        raise ValueError(
            f"add: shapes {a.data.shape} and {b.data.shape} do not align "
            f"({a._label()} + {b._label()})") from None

    def backward(g):
        _accum(a, _unbroadcast(g, a.data.shape))
        _accum(b, _unbroadcast(g, b.data.shape))

    return Tensor(out_data, _parents=(a, b), _backward=backward)


def sub(a, b):
    a, b = _pair(a, b)
    try:
        out_data = a.data - b.data
    except ValueError:
        raise ValueError(
            f"sub: shapes {a.data.shape} and {b.data.shape} do not align "
            f"({a._label()} - {b._label()})") from None

    def backward(g):
        _accum(a, _unbroadcast(g, a.data.shape))
        _accum(b, _unbroadcast(-g, b.data.shape))

    return Tensor(out_data, _parents=(a, b), _backward=backward)


def mul(a, b):
    a, b = _pair(a, b)
    try:
        out_data = a.data * b.data
    except ValueError:
        raise ValueError(
            f"mul: shapes {a.data.shape} and {b.data.shape} do not align "
            f"({a._label()} * {b._label()})") from None

    def backward(g):
        _accum(a, _unbroadcast(g * b.data, a.data.shape))
        _accum(b, _unbroadcast(g * a.data, b.data.shape))

    return Tensor(out_data, _parents=(a, b), _backward=backward)


def tanh(x):
    y = np.tanh(x.data)

    def backward(g):
        _accum(x, g * (1.0 - y * y))

    return Tensor(y, _parents=(x,), _backward=backward)


def sigmoid(x):
    # Stable on both tails.
    d = x.data
    y = np.empty_like(d)
    pos = d >= 0
    y[pos] = 1.0 / (1.0 + np.exp(-d[pos]))
    ex = np.exp(d[~pos])
    y[~pos] = ex / (1.0 + ex)

    def backward(g):
        _accum(x, g * y * (1.0 - y))

    return Tensor(y, _parents=(x,), _backward=backward)


# -- linear algebra -------------------------------------------------------

def matmul(a, b):
    """Matrix product for rank <= 2 operands (vectors are promoted)."""
    if a.data.ndim > 2 or b.data.ndim > 2:
        raise ValueError(
            f"matmul: rank > 2 not supported ({a._label()} @ {b._label()})")
    a2 = a.data if a.data.ndim == 2 else a.data.reshape(1, -1)
    b2 = b.data if b.data.ndim == 2 else b.data.reshape(-1, 1)
    if a2.shape[1] != b2.shape[0]:
        raise ValueError(
            f"matmul: inner dims {a.data.shape} @ {b.data.shape} do not align "
            f"({a._label()} @ {b._label()})")
    out2 = a2 @ b2
    out_shape = []
    if a.data.ndim == 2:
        out_shape.append(out2.shape[0])
    if b.data.ndim == 2:
        out_shape.append(out2.shape[1])
    out_data = out2.reshape(tuple(out_shape))

    def backward(g):
        g2 = g.reshape(out2.shape)
        _accum(a, (g2 @ b2.T).reshape(a.data.shape))
        _accum(b, (a2.T @ g2).reshape(b.data.shape))

    return Tensor(out_data, _parents=(a, b), _backward=backward)


def concat(tensors, axis=-1):
    tensors = list(tensors)
    if not tensors:
        raise ValueError("concat: empty input")
    try:
        out_data = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        shapes = [t.data.shape for t in tensors]
        raise ValueError(f"concat: incompatible shapes {shapes}") from None
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        for t, piece in zip(tensors, np.split(g, splits, axis=axis)):
            _accum(t, piece)

    return Tensor(out_data, _parents=tuple(tensors), _backward=backward)


def lookup(table, ids):
    """Row lookup (embedding): ids of any shape index rows of a 2-D table."""
    if table.data.ndim != 2:
        raise ValueError(f"lookup: table must be 2-D ({table._label()})")
    idx = np.asarray(ids)
    if idx.size and (idx.min() < 0 or idx.max() >= table.data.shape[0]):
        raise ValueError(
            f"lookup: id out of range for table {table._label()} "
            f"with {table.data.shape[0]} rows")
    out_data = table.data[idx]

    def backward(g):
        dt = np.zeros_like(table.data)
        np.add.at(dt, idx, g)
        _accum(table, dt)

    return Tensor(out_data, _parents=(table,), _backward=backward)


# -- softmax family -------------------------------------------------------

def softmax(x, axis=-1, mask=None):
    """Max-shifted softmax; with ``mask`` (0/1 array) masked slots get 0."""
    d = x.data
    if mask is not None:
        m = np.asarray(mask, dtype=d.dtype)
        neg = np.where(m > 0, d.dtype.type(0), d.dtype.type(-np.inf))
        shifted = d + neg
        mx = shifted.max(axis=axis, keepdims=True)
        mx = np.where(np.isfinite(mx), mx, 0.0)
        e = np.exp(shifted - mx)
        e = np.where(m > 0, e, 0.0)
    else:
        mx = d.max(axis=axis, keepdims=True)
        e = np.exp(d - mx)
    denom = e.sum(axis=axis, keepdims=True)
    y = e / denom

    def backward(g):
        inner = (g * y).sum(axis=axis, keepdims=True)
        _accum(x, (g - inner) * y)

    return Tensor(y, _parents=(x,), _backward=backward)


def cross_entropy_logits(logits, targets):
    """Per-row -log softmax(logits)[target]; fused for stability.

    logits: (N, V); targets: int array (N,).  Returns shape (N,).
    """
    if logits.data.ndim != 2:
        raise ValueError(f"cross_entropy_logits: logits must be 2-D "
                         f"({logits._label()})")
    t = np.asarray(targets)
    n, v = logits.data.shape
    if t.shape != (n,):
        raise ValueError(
            f"cross_entropy_logits: targets shape {t.shape} does not match "
            f"logits rows {n}")
    if t.size and (t.min() < 0 or t.max() >= v):
        raise ValueError("cross_entropy_logits: target id out of range")
    d = logits.data
    mx = d.max(axis=1, keepdims=True)
    e = np.exp(d - mx)
    z = e.sum(axis=1, keepdims=True)
    logz = np.log(z) + mx
    rows = np.arange(n)
    losses = logz[:, 0] - d[rows, t]
    probs = e / z

    def backward(g):
        dlogits = probs * g[:, None]
        dlogits[rows, t] -= g
        _accum(logits, dlogits)

    return Tensor(losses, _parents=(logits,), _backward=backward)


# -- reductions / reshaping ------------------------------------------------

def tensor_sum(x, axis=None):
    out_data = x.data.sum(axis=axis)

    def backward(g):
        if axis is None:
            _accum(x, np.full_like(x.data, g))
        else:
            _accum(x, np.broadcast_to(np.expand_dims(g, axis), x.data.shape))

    return Tensor(np.asarray(out_data, dtype=x.data.dtype),
                  _parents=(x,), _backward=backward)


def tensor_mean(x, axis=None):
    count = x.data.size if axis is None else x.data.shape[axis]
    return mul(tensor_sum(x, axis), 1.0 / count)


def reshape(x, shape):
    out_data = x.data.reshape(shape)

    def backward(g):
        _accum(x, g.reshape(x.data.shape))

    return Tensor(out_data, _parents=(x,), _backward=backward)


# -- initialization ---------------------------------------------------------

def xavier_init(shape, seed, dtype=None):
    """Uniform init on [-sqrt(6/(fan_in+fan_out)), +...], seeded.

    Fans come from the last two dims; 1-D shapes use fan_in = fan_out =
    length.  ``seed`` may be an int or a numpy Generator.
    """
    shape = tuple(int(s) for s in shape)
    if len(shape) == 0:
        raise ValueError("xavier_init: shape must have at least one dimension")
    if any(s < 1 for s in shape):
        raise ValueError(f"xavier_init: non-positive dimension in {shape}")
    if len(shape) == 1:
        fan_in = fan_out = shape[0]
    else:
        fan_in, fan_out = shape[-2], shape[-1]
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    rng = seed if isinstance(seed, np.random.Generator) \
        else np.random.default_rng(seed)
    data = rng.uniform(-bound, bound, size=shape)
    return Tensor(data.astype(dtype or DEFAULT_DTYPE), requires_grad=True)
