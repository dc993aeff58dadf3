"""Reverse-mode tape over numpy arrays plus second-order coordinate jets.

Spatial derivatives are pushed forward through :class:`CoordJet` objects whose
five components are themselves tape nodes; parameter gradients of anything
built from them (including second spatial derivatives) are then obtained by a
single reverse sweep over the tape.

Nodes that do not depend on any parameter slot are recorded without a
backward rule, so constant subgraphs cost nothing in the reverse sweep.
"""
from __future__ import annotations

import contextlib
from typing import Callable, Iterator

import numpy as np

__all__ = [
    "Node",
    "Tape",
    "CoordJet",
    "active_tape",
    "constant",
    "seed_coordinate",
    "jet_arith",
    "jet_unary",
    "backward",
    "sin",
    "cos",
    "sigmoid",
    "tanh",
    "square",
    "cube",
    "recip",
    "concat",
    "mean",
    "sum",
    "jet_stack",
    "jet_unstack",
    "stacked_dense",
    "stacked_activation",
]


class Tape:
    """Ordered record of elementary operations.

    Nodes created while the tape is active are appended in creation order;
    parameter leaves are additionally registered under a slot name.
    """

    def __init__(self):
        self.nodes: list[Node] = []
        self.slots: dict[str, Node] = {}

    def __len__(self):
        return len(self.nodes)

    def __enter__(self):
        _STACK.append(self)
        return self

    def __exit__(self, *exc):
        _STACK.pop()
        return False

    def param(self, name: str, value) -> "Node":
        if name in self.slots:
            raise ValueError(f"parameter slot {name!r} already registered")
        node = Node(np.array(value, dtype=np.float64), tape=self)
        node.req = True
        self.slots[name] = node
        return node

    def clear(self):
        for node in self.nodes:
            node._parents = ()
            node._vjp = None
        self.nodes = []
        self.slots = {}


_STACK: list[Tape] = [Tape()]


def active_tape() -> Tape:
    return _STACK[-1]


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Node:
    """A value on the tape.

    ``_vjp`` maps the adjoint of this node to a tuple of adjoint
    contributions, one per parent (``None`` where a parent needs none).
    ``req`` is true when the node depends on a parameter slot.
    """

    __slots__ = ("value", "_parents", "_vjp", "tape", "req")
    __array_ufunc__ = None

    def __init__(self, value, parents=(), vjp: Callable | None = None, tape: Tape | None = None):
        self.value = value
        self.req = any(p.req for p in parents)
        if self.req:
            self._parents, self._vjp = parents, vjp
        else:
            self._parents, self._vjp = (), None
        self.tape = tape if tape is not None else active_tape()
        self.tape.nodes.append(self)

    @property
    def shape(self):
        return np.shape(self.value)

    def __repr__(self):
        return f"Node(shape={self.shape}, req={self.req})"

    def __add__(self, other):
        return _add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return _sub(self, other)

    def __rsub__(self, other):
        return _sub(other, self)

    def __mul__(self, other):
        return _mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return _mul(self, recip(other))

    def __rtruediv__(self, other):
        return _mul(recip(self), other)

    def __neg__(self):
        return _neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    def __getitem__(self, index):
        return take(self, index)


def constant(value) -> Node:
    return Node(np.asarray(value, dtype=np.float64))


def _lift(x) -> Node:
    return x if isinstance(x, Node) else constant(x)


def _val(x):
    return x.value if isinstance(x, Node) else np.asarray(x, dtype=np.float64)


def _add(a, b) -> Node:
    a, b = _lift(a), _lift(b)
    sa, sb = np.shape(a.value), np.shape(b.value)
    return Node(a.value + b.value, (a, b), lambda g: (
        _unbroadcast(g, sa) if a.req else None,
        _unbroadcast(g, sb) if b.req else None))


def _sub(a, b) -> Node:
    a, b = _lift(a), _lift(b)
    sa, sb = np.shape(a.value), np.shape(b.value)
    return Node(a.value - b.value, (a, b), lambda g: (
        _unbroadcast(g, sa) if a.req else None,
        -_unbroadcast(g, sb) if b.req else None))


def _neg(a) -> Node:
    a = _lift(a)
    return Node(-a.value, (a,), lambda g: (-g,))


def _mul(a, b) -> Node:
    a, b = _lift(a), _lift(b)
    av, bv = a.value, b.value
    sa, sb = np.shape(av), np.shape(bv)
    return Node(av * bv, (a, b), lambda g: (
        _unbroadcast(g * bv, sa) if a.req else None,
        _unbroadcast(g * av, sb) if b.req else None))


def matmul(a, b) -> Node:
    a, b = _lift(a), _lift(b)
    av, bv = a.value, b.value
    if av.ndim == 2 and bv.ndim == 2:
        ga, gb = (lambda g: g @ bv.T), (lambda g: av.T @ g)
    elif av.ndim == 2 and bv.ndim == 1:
        ga, gb = (lambda g: np.outer(g, bv)), (lambda g: av.T @ g)
    elif av.ndim == 1 and bv.ndim == 2:
        ga, gb = (lambda g: bv @ g), (lambda g: np.outer(av, g))
    else:
        ga, gb = (lambda g: g * bv), (lambda g: g * av)
    return Node(av @ bv, (a, b), lambda g: (ga(g) if a.req else None, gb(g) if b.req else None))


def take(a: Node, index) -> Node:
    a = _lift(a)
    shape = a.shape

    basic = isinstance(index, (slice, int)) or (
        isinstance(index, tuple) and all(isinstance(i, (slice, int)) for i in index))

    def vjp(g):
        out = np.zeros(shape)
        if basic:
            out[index] = g
        else:
            np.add.at(out, index, g)
        return (out,)

    return Node(a.value[index], (a,), vjp)


def transpose(a: Node) -> Node:
    return Node(a.value.T, (a,), lambda g: (g.T,))


def reshape(a: Node, shape) -> Node:
    old = a.shape
    return Node(np.reshape(a.value, shape), (a,), lambda g: (np.reshape(g, old),))


def sin(a) -> Node:
    a = _lift(a)
    c = np.cos(a.value)
    return Node(np.sin(a.value), (a,), lambda g: (g * c,))


def cos(a) -> Node:
    a = _lift(a)
    s = np.sin(a.value)
    return Node(np.cos(a.value), (a,), lambda g: (-g * s,))


def _sigmoid(v):
    return 0.5 * (1.0 + np.tanh(0.5 * v))


def sigmoid(a) -> Node:
    a = _lift(a)
    s = _sigmoid(a.value)
    d = s * (1.0 - s)
    return Node(s, (a,), lambda g: (g * d,))


def tanh(a) -> Node:
    a = _lift(a)
    t = np.tanh(a.value)
    d = 1.0 - t * t
    return Node(t, (a,), lambda g: (g * d,))


def square(a) -> Node:
    a = _lift(a)
    v = a.value
    return Node(v * v, (a,), lambda g: (2.0 * g * v,))


def cube(a) -> Node:
    a = _lift(a)
    v = a.value
    return Node(v * v * v, (a,), lambda g: (3.0 * g * v * v,))


def recip(a) -> Node:
    a = _lift(a)
    v = a.value
    if np.any(v == 0):
        raise ZeroDivisionError("reciprocal of zero")
    r = 1.0 / v
    return Node(r, (a,), lambda g: (-g * r * r,))


def power(a, p: float) -> Node:
    a = _lift(a)
    v = a.value
    return Node(v ** p, (a,), lambda g: (g * p * v ** (p - 1.0),))


def concat(parts, axis: int = 0) -> Node:
    parts = [_lift(p) for p in parts]
    sizes = [np.shape(p.value)[axis] for p in parts]
    cuts = np.cumsum(sizes)[:-1]

    def vjp(g):
        pieces = np.split(g, cuts, axis=axis)
        return tuple(pc if p.req else None for p, pc in zip(parts, pieces))

    return Node(np.concatenate([p.value for p in parts], axis=axis), tuple(parts), vjp)


def stack(parts) -> Node:
    """Stack along a new leading axis, broadcasting the parts to a common shape."""
    parts = [_lift(p) for p in parts]
    shape = np.broadcast_shapes(*(p.shape for p in parts))

    def vjp(g):
        return tuple(_unbroadcast(g[i], p.shape) if p.req else None for i, p in enumerate(parts))

    return Node(np.stack([np.broadcast_to(p.value, shape) for p in parts]), tuple(parts), vjp)


def sum(a, axis=None) -> Node:  # noqa: A001
    a = _lift(a)
    shape = a.shape
    if axis is None:
        return Node(np.sum(a.value), (a,), lambda g: (np.broadcast_to(g, shape).copy(),))
    return Node(np.sum(a.value, axis=axis), (a,),
                lambda g: (np.broadcast_to(np.expand_dims(g, axis), shape).copy(),))


def mean(a) -> Node:
    a = _lift(a)
    n = a.value.size
    shape = a.shape
    return Node(np.mean(a.value), (a,), lambda g: (np.full(shape, g / n),))


def backward(loss: Node) -> dict[str, np.ndarray]:
    """Reverse sweep from a scalar node.

    Returns one gradient per registered parameter slot of the loss's tape;
    slots the loss does not depend on get zeros.
    """
    if not isinstance(loss, Node):
        raise TypeError("backward expects a tape node")
    tape = loss.tape
    if not tape.nodes or not any(n is loss for n in reversed(tape.nodes)):
        raise ValueError("loss node is not on its tape (was the tape cleared?)")
    if np.size(loss.value) != 1:
        raise ValueError("backward needs a scalar loss")
    adj: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.value)}
    for node in reversed(tape.nodes):
        if node._vjp is None:
            continue
        g = adj.pop(id(node), None)
        if g is None:
            continue
        for parent, pg in zip(node._parents, node._vjp(g)):
            if pg is None:
                continue
            key = id(parent)
            if key in adj:
                adj[key] = adj[key] + pg
            else:
                adj[key] = pg
    return {name: np.asarray(adj.get(id(p), np.zeros_like(p.value)), dtype=np.float64).reshape(np.shape(p.value))
            for name, p in tape.slots.items()}


@contextlib.contextmanager
def recording() -> Iterator[Tape]:
    tape = Tape()
    with tape:
        yield tape
    tape.clear()


# --------------------------------------------------------------------------
# coordinate jets

X, Y = "X", "Y"


class CoordJet:
    """Value with d/dX, d/dY, d2/dX2, d2/dY2 (no mixed term)."""

    __slots__ = ("v", "dx", "dy", "dxx", "dyy")

    def __init__(self, v, dx, dy, dxx, dyy):
        self.v, self.dx, self.dy, self.dxx, self.dyy = (_lift(c) for c in (v, dx, dy, dxx, dyy))

    @classmethod
    def const(cls, value):
        value = np.asarray(value, dtype=np.float64)
        z = np.zeros_like(value)
        return cls(value, z, z, z, z)

    @property
    def components(self):
        return self.v, self.dx, self.dy, self.dxx, self.dyy

    def values(self) -> dict[str, np.ndarray]:
        return {k: getattr(self, k).value for k in self.__slots__}

    def map(self, fn) -> "CoordJet":
        return CoordJet(*(fn(c) for c in self.components))

    def __add__(self, other):
        return jet_arith(self, other, "add")

    def __radd__(self, other):
        return jet_arith(_as_jet(other), self, "add")

    def __sub__(self, other):
        return jet_arith(self, other, "sub")

    def __rsub__(self, other):
        return jet_arith(_as_jet(other), self, "sub")

    def __mul__(self, other):
        return jet_arith(self, other, "mul")

    def __rmul__(self, other):
        return jet_arith(_as_jet(other), self, "mul")

    def __truediv__(self, other):
        return jet_arith(self, other, "div")

    def __rtruediv__(self, other):
        return jet_arith(_as_jet(other), self, "div")

    def __neg__(self):
        return self.map(_neg)

    def __repr__(self):
        vals = ", ".join(f"{k}={np.round(getattr(self, k).value, 6)}" for k in self.__slots__)
        return f"CoordJet({vals})"


def _as_jet(x) -> CoordJet:
    if isinstance(x, CoordJet):
        return x
    if isinstance(x, Node):
        z = np.zeros_like(x.value)
        return CoordJet(x, z, z, z, z)
    return CoordJet.const(x)


def seed_coordinate(x, axis: str) -> CoordJet:
    """Independent coordinate: value ``x`` with unit first derivative along ``axis``."""
    if axis not in (X, Y):
        raise ValueError(f"axis must be 'X' or 'Y', got {axis!r}")
    x = np.asarray(x, dtype=np.float64)
    one, zero = np.ones_like(x), np.zeros_like(x)
    if axis == X:
        return CoordJet(x, one, zero, zero, zero)
    return CoordJet(x, zero, one, zero, zero)


def _scale(jet: CoordJet, c) -> CoordJet:
    """Multiply every component by something constant in space."""
    return jet.map(lambda comp: comp * c)


def jet_arith(a, b, op: str) -> CoordJet:
    # scalars and plain nodes are spatial constants
    if not isinstance(b, CoordJet):
        if op == "add":
            return CoordJet(a.v + b, a.dx, a.dy, a.dxx, a.dyy)
        if op == "sub":
            return CoordJet(a.v - b, a.dx, a.dy, a.dxx, a.dyy)
        if op == "mul":
            return _scale(a, b)
        if op == "div":
            if np.any(_val(b) == 0):
                raise ZeroDivisionError("jet division by a zero value")
            return _scale(a, recip(b))
    a = _as_jet(a)
    if op == "add":
        return CoordJet(*(p + q for p, q in zip(a.components, b.components)))
    if op == "sub":
        return CoordJet(*(p - q for p, q in zip(a.components, b.components)))
    if op == "mul":
        return CoordJet(
            a.v * b.v,
            a.dx * b.v + a.v * b.dx,
            a.dy * b.v + a.v * b.dy,
            a.dxx * b.v + 2.0 * (a.dx * b.dx) + a.v * b.dxx,
            a.dyy * b.v + 2.0 * (a.dy * b.dy) + a.v * b.dyy,
        )
    if op == "div":
        if np.any(b.v.value == 0):
            raise ZeroDivisionError("jet division by a zero value")
        return jet_arith(a, jet_unary(b, "recip"), "mul")
    raise ValueError(f"unknown jet op {op!r}")


def _chain(a: CoordJet, f0, f1, f2) -> CoordJet:
    return CoordJet(
        f0,
        f1 * a.dx,
        f1 * a.dy,
        f2 * square(a.dx) + f1 * a.dxx,
        f2 * square(a.dy) + f1 * a.dyy,
    )


def jet_unary(a: CoordJet, fn: str) -> CoordJet:
    """Apply an elementwise function through the chain rule."""
    if fn == "sin":
        s, c = sin(a.v), cos(a.v)
        return _chain(a, s, c, -s)
    if fn == "cos":
        s, c = sin(a.v), cos(a.v)
        return _chain(a, c, -s, -c)
    if fn == "sigmoid":
        s = sigmoid(a.v)
        d1 = s * (1.0 - s)
        d2 = d1 * (1.0 - 2.0 * s)
        return _chain(a, s, d1, d2)
    if fn == "tanh":
        t = tanh(a.v)
        d1 = 1.0 - square(t)
        d2 = -2.0 * (t * d1)
        return _chain(a, t, d1, d2)
    if fn == "cube":
        sq = square(a.v)
        return _chain(a, sq * a.v, 3.0 * sq, 6.0 * a.v)
    if fn == "recip":
        r = recip(a.v)
        r2 = square(r)
        return _chain(a, r, -r2, 2.0 * r2 * r)
    raise ValueError(f"unknown jet function {fn!r}")


def jet_concat(jets, axis: int = -1) -> CoordJet:
    return CoordJet(*(concat([getattr(j, k) for j in jets], axis=axis) for k in CoordJet.__slots__))


# --------------------------------------------------------------------------
# stacked jets: the five components in one (5, ...) array.  The hidden layers
# use these so each layer is two tape nodes instead of a few dozen.

def jet_stack(a: CoordJet) -> Node:
    return stack(a.components)


def jet_unstack(s: Node) -> CoordJet:
    return CoordJet(*(take(s, i) for i in range(5)))


def stacked_dense(s: Node, w: Node, b: Node) -> Node:
    """Affine map of a stacked jet; the bias only enters the value slice."""
    s, w, b = _lift(s), _lift(w), _lift(b)
    sv, wv = s.value, w.value
    lead = sv.shape[:-1]
    flat = sv.reshape(-1, sv.shape[-1])
    out = (flat @ wv).reshape(lead + (wv.shape[1],))
    out[0] += b.value

    def vjp(g):
        g2 = g.reshape(-1, g.shape[-1])
        gs = (g2 @ wv.T).reshape(sv.shape) if s.req else None
        gw = flat.T @ g2 if w.req else None
        gb = _unbroadcast(g[0], b.shape) if b.req else None
        return gs, gw, gb

    return Node(out, (s, w, b), vjp)


def _act_derivs(fn: str, v):
    """f and its first three derivatives at ``v``."""
    if fn == "sigmoid":
        f = _sigmoid(v)
        d1 = f * (1.0 - f)
        t = 1.0 - 2.0 * f
        d2 = d1 * t
        d3 = d2 * t - 2.0 * d1 * d1
        return f, d1, d2, d3
    if fn == "tanh":
        f = np.tanh(v)
        d1 = 1.0 - f * f
        d2 = -2.0 * f * d1
        d3 = -2.0 * d1 * d1 - 2.0 * f * d2
        return f, d1, d2, d3
    raise ValueError(f"unknown activation {fn!r}")


def stacked_activation(s: Node, fn: str = "sigmoid") -> Node:
    """Elementwise activation of a stacked jet with a hand-written reverse rule."""
    s = _lift(s)
    v, dx, dy, dxx, dyy = s.value
    f0, f1, f2, f3 = _act_derivs(fn, v)
    out = np.stack([f0, f1 * dx, f1 * dy, f2 * dx * dx + f1 * dxx, f2 * dy * dy + f1 * dyy])

    def vjp(g):
        gv, gdx, gdy, gdxx, gdyy = g
        in_v = (gv * f1 + f2 * (gdx * dx + gdy * dy)
                + gdxx * (f3 * dx * dx + f2 * dxx) + gdyy * (f3 * dy * dy + f2 * dyy))
        in_dx = gdx * f1 + 2.0 * f2 * gdxx * dx
        in_dy = gdy * f1 + 2.0 * f2 * gdyy * dy
        return (np.stack([in_v, in_dx, in_dy, gdxx * f1, gdyy * f1]),)

    return Node(out, (s,), vjp)
