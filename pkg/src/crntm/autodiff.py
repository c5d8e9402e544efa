"""Small define-by-run reverse-mode differentiation over numpy arrays.

Only the operations the topic model needs are provided. Every operation
on a taped tensor appends one node to the tape holding its parent node ids
and a vector-Jacobian closure; :func:`backward` walks the tape once in
reverse.

Broadcasting is deliberately narrow: operands must have equal shapes, or
one of them is a 0-d scalar, or both have the same rank and differ only in
axes where one side has size 1 (row/column vectors against matrices).
"""
from dataclasses import dataclass, field

import numpy as np

from . import specfun
from .errors import DomainError, ShapeError


class Tape:
    """Record of one forward pass."""

    def __init__(self):
        self.parents = []
        self.vjps = []
        self.params = {}
        self.shapes = {}

    def __len__(self):
        return len(self.parents)

    def _push(self, parents, vjp):
        node = len(self.parents)
        assert all(p is None or p < node for p in parents), "tape must stay topologically ordered"
        self.parents.append(parents)
        self.vjps.append(vjp)
        return node

    def param(self, name, value):
        """Register a named leaf whose gradient :func:`backward` reports."""
        if name in self.params:
            raise KeyError(f"parameter {name!r} already on tape")
        t = Tensor(np.asarray(value, dtype=np.float64))
        t.tape = self
        t.node = self._push((), None)
        self.params[name] = t.node
        self.shapes[name] = t.shape
        return t

    def leaf(self, value):
        """An anonymous differentiable leaf (not reported by backward)."""
        t = Tensor(np.asarray(value, dtype=np.float64))
        t.tape = self
        t.node = self._push((), None)
        return t


class Tensor:
    __slots__ = ("data", "tape", "node")
    __array_priority__ = 100

    def __init__(self, data):
        self.data = np.asarray(data, dtype=np.float64)
        self.tape = None
        self.node = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def T(self):
        return transpose(self)

    def item(self):
        return float(self.data)

    def numpy(self):
        return self.data

    def __repr__(self):
        tag = "" if self.tape is None else f", node={self.node}"
        return f"Tensor(shape={self.shape}{tag})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def constant(x):
    """Detached copy: same values, no tape."""
    return Tensor(as_tensor(x).data.copy())


def _tape_of(inputs):
    tape = None
    for t in inputs:
        if t.tape is not None:
            if tape is not None and t.tape is not tape:
                raise ValueError("operands live on different tapes")
            tape = t.tape
    return tape


def record(data, inputs, vjp):
    """Create the output tensor of an operation and put it on the tape.

    ``vjp(g)`` must return one gradient (or None) per input.
    """
    out = Tensor(data)
    tape = _tape_of(inputs)
    if tape is not None:
        parents = tuple(t.node if t.tape is tape else None for t in inputs)
        out.tape = tape
        out.node = tape._push(parents, vjp)
    return out


# ----------------------------------------------------------------- broadcasting

def _check_broadcast(sa, sb):
    if sa == sb or len(sa) == 0 or len(sb) == 0:
        return
    if len(sa) != len(sb):
        raise ShapeError(f"cannot broadcast {sa} with {sb}: ranks differ")
    for da, db in zip(sa, sb):
        if da != db and da != 1 and db != 1:
            raise ShapeError(f"cannot broadcast {sa} with {sb}")


def _unbroadcast(g, shape):
    if g.shape == shape:
        return g
    if len(shape) == 0:
        return np.asarray(g.sum())
    axes = tuple(i for i, (dg, ds) in enumerate(zip(g.shape, shape)) if ds == 1 and dg != 1)
    return g.sum(axis=axes, keepdims=True)


def _binary(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a.shape, b.shape)
    return a, b


# --------------------------------------------------------------- elementwise

def add(a, b):
    a, b = _binary(a, b)
    sa, sb = a.shape, b.shape
    return record(a.data + b.data, (a, b),
                  lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def sub(a, b):
    a, b = _binary(a, b)
    sa, sb = a.shape, b.shape
    return record(a.data - b.data, (a, b),
                  lambda g: (_unbroadcast(g, sa), _unbroadcast(-g, sb)))


def mul(a, b):
    a, b = _binary(a, b)
    ad, bd = a.data, b.data
    return record(ad * bd, (a, b),
                  lambda g: (_unbroadcast(g * bd, ad.shape), _unbroadcast(g * ad, bd.shape)))


def div(a, b):
    a, b = _binary(a, b)
    ad, bd = a.data, b.data
    if np.any(bd == 0.0):
        raise ZeroDivisionError("division by zero in tensor div")
    out = ad / bd

    def vjp(g):
        gb = g / bd
        return _unbroadcast(gb, ad.shape), _unbroadcast(-gb * out, bd.shape)

    return record(out, (a, b), vjp)


def neg(a):
    a = as_tensor(a)
    return record(-a.data, (a,), lambda g: (-g,))


def scale(a, c):
    a = as_tensor(a)
    c = float(c)
    return record(a.data * c, (a,), lambda g: (g * c,))


def exp(a):
    a = as_tensor(a)
    out = np.exp(a.data)
    return record(out, (a,), lambda g: (g * out,))


def log(a):
    a = as_tensor(a)
    x = a.data
    if np.any(~(x > 0.0)):
        raise DomainError("log of a non-positive value")
    return record(np.log(x), (a,), lambda g: (g / x,))


def square(a):
    a = as_tensor(a)
    x = a.data
    return record(x * x, (a,), lambda g: (2.0 * g * x,))


def reciprocal(a):
    a = as_tensor(a)
    x = a.data
    if np.any(x == 0.0):
        raise ZeroDivisionError("reciprocal of zero")
    out = 1.0 / x
    return record(out, (a,), lambda g: (-g * out * out,))


def softplus(a):
    a = as_tensor(a)
    x = a.data
    out = np.logaddexp(0.0, x)
    return record(out, (a,), lambda g: (g * np.exp(x - out),))


def clip(a, lo=None, hi=None):
    """Clamp values; gradient is zero where the clamp is active."""
    a = as_tensor(a)
    x = a.data
    lo_ = -np.inf if lo is None else lo
    hi_ = np.inf if hi is None else hi
    out = np.clip(x, lo_, hi_)
    keep = (x >= lo_) & (x <= hi_)
    return record(out, (a,), lambda g: (np.where(keep, g, 0.0),))


def lgamma(a):
    a = as_tensor(a)
    x = a.data
    return record(specfun.log_gamma(x), (a,), lambda g: (g * specfun.digamma(x),))


def digamma(a):
    a = as_tensor(a)
    x = a.data
    return record(specfun.digamma(x), (a,), lambda g: (g * specfun.trigamma(x),))


# ------------------------------------------------------------ linear algebra

def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
    ad, bd = a.data, b.data
    return record(ad @ bd, (a, b), lambda g: (g @ bd.T, ad.T @ g))


def transpose(a):
    a = as_tensor(a)
    if a.ndim != 2:
        raise ShapeError("transpose expects a matrix")
    return record(a.data.T, (a,), lambda g: (g.T,))


def reshape(a, shape):
    a = as_tensor(a)
    old = a.shape
    return record(a.data.reshape(shape), (a,), lambda g: (g.reshape(old),))


# ----------------------------------------------------------------- reductions

def _norm_axis(axis, ndim):
    if axis is None:
        return None
    if not -ndim <= axis < ndim:
        raise ShapeError(f"axis {axis} out of range for rank {ndim}")
    return axis % ndim


def reduce_sum(a, axis=None, keepdims=False):
    a = as_tensor(a)
    axis = _norm_axis(axis, a.ndim)
    shape = a.shape

    def vjp(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, shape).copy(),)

    return record(a.data.sum(axis=axis, keepdims=keepdims), (a,), vjp)


def mean(a, axis=None, keepdims=False):
    a = as_tensor(a)
    n = a.data.size if axis is None else a.shape[_norm_axis(axis, a.ndim)]
    return scale(reduce_sum(a, axis, keepdims), 1.0 / n)


def _lse(x, axis):
    m = np.max(x, axis=axis, keepdims=True)
    return m + np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True))


def logsumexp(a, axis=-1, keepdims=False):
    a = as_tensor(a)
    axis = _norm_axis(axis, a.ndim)
    x = a.data
    lse = _lse(x, axis)
    w = np.exp(x - lse)

    def vjp(g):
        if not keepdims:
            g = np.expand_dims(g, axis)
        return (g * w,)

    out = lse if keepdims else np.squeeze(lse, axis=axis)
    return record(out, (a,), vjp)


def softmax(a, axis=-1):
    a = as_tensor(a)
    axis = _norm_axis(axis, a.ndim)
    x = a.data
    if np.isnan(x).any():
        raise DomainError("softmax received NaN input")
    e = np.exp(x - np.max(x, axis=axis, keepdims=True))
    out = e / e.sum(axis=axis, keepdims=True)
    return record(out, (a,),
                  lambda g: (out * (g - np.sum(g * out, axis=axis, keepdims=True)),))


def log_softmax(a, axis=-1):
    a = as_tensor(a)
    axis = _norm_axis(axis, a.ndim)
    x = a.data
    out = x - _lse(x, axis)
    p = np.exp(out)
    return record(out, (a,), lambda g: (g - p * np.sum(g, axis=axis, keepdims=True),))


# ------------------------------------------------------------------ backward

def backward(tape, loss):
    """Gradients of a scalar ``loss`` for every named parameter on ``tape``.

    Parameters the loss does not depend on get zero arrays.
    """
    if loss.tape is not tape:
        raise ValueError("loss was not recorded on this tape")
    if loss.data.size != 1:
        raise ShapeError(f"loss must be scalar, got shape {loss.shape}")
    grads = [None] * (loss.node + 1)
    grads[loss.node] = np.ones_like(loss.data)
    param_nodes = set(tape.params.values())
    for node in range(loss.node, -1, -1):
        g = grads[node]
        vjp = tape.vjps[node]
        if g is None or vjp is None:
            continue
        if node not in param_nodes:
            grads[node] = None
        for parent, gp in zip(tape.parents[node], vjp(g)):
            if parent is None or gp is None:
                continue
            if grads[parent] is None:
                grads[parent] = np.array(gp, dtype=np.float64)
            else:
                grads[parent] = grads[parent] + gp
    out = {}
    for name, node in tape.params.items():
        g = grads[node] if node < len(grads) else None
        shape = tape.shapes[name]
        out[name] = np.zeros(shape) if g is None else g.reshape(shape)
    return out


# ---------------------------------------------------------------------- Adam

@dataclass
class AdamState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: int = 0

    @classmethod
    def zeros_like(cls, params):
        return cls({k: np.zeros_like(p) for k, p in params.items()},
                   {k: np.zeros_like(p) for k, p in params.items()}, 0)


def adam_step(params, grads, state, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """One bias-corrected Adam update, applied in place.

    Returns ``(params, state)`` for convenience.
    """
    if not state.m:
        fresh = AdamState.zeros_like(params)
        state.m, state.v = fresh.m, fresh.v
    state.t += 1
    c1 = 1.0 - beta1 ** state.t
    c2 = 1.0 - beta2 ** state.t
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape or state.m[name].shape != p.shape:
            raise ShapeError(f"Adam shape mismatch for {name!r}: param {p.shape}, grad {g.shape}")
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        if lr != 0.0:
            p -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    return params, state
