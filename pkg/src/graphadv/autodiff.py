"""Reverse-mode differentiation over dense matrices.

A :class:`Tape` records every primitive operation as it executes, so the
list of recorded nodes is already a topological order of the computation.
:meth:`Tape.backward` walks that list in reverse, accumulating
vector-Jacobian products into gradients for the leaves of interest, and
:meth:`Tape.replay` recomputes all forward values from the leaves (the
record is a complete, deterministic description of the computation).

All values are float64: matrices are 2-d arrays, row vectors 1-d, scalars
0-d.  Probabilities are clamped to ``[PROB_EPS, 1]`` before any logarithm;
clamped entries pass no gradient.
"""

from __future__ import annotations

import numpy as np

from .sparse import SparseMatrix

PROB_EPS = 1e-12

# forward/backward pass counters, for cost instrumentation in tests;
# "forward" is incremented by the model's forward routine
pass_counts = {"forward": 0, "backward": 0}


def reset_pass_counts():
    pass_counts["forward"] = 0
    pass_counts["backward"] = 0


class Node:
    """One recorded value: a leaf or the output of a primitive op."""

    __slots__ = ("tape", "value", "parents", "requires_grad", "op", "_vjp", "_forward")

    def __init__(self, tape, value, parents=(), vjp=None, forward=None, op="leaf"):
        self.tape = tape
        self.value = value
        self.parents = parents
        self.requires_grad = bool(parents) and any(p.requires_grad for p in parents)
        self.op = op
        self._vjp = vjp
        self._forward = forward

    @property
    def shape(self):
        return self.value.shape


class Tape:
    """An ordered record of primitive operations and their data flow."""

    def __init__(self):
        self.nodes: list[Node] = []

    def leaf(self, value, requires_grad=False) -> Node:
        node = Node(self, np.asarray(value, dtype=np.float64))
        node.requires_grad = requires_grad
        self.nodes.append(node)
        return node

    def constant(self, value) -> Node:
        return self.leaf(value, requires_grad=False)

    def _record(self, value, parents, vjp, forward, op) -> Node:
        for p in parents:
            if p.tape is not self:
                raise ValueError("cannot mix nodes from different tapes")
        node = Node(self, value, tuple(parents), vjp, forward, op)
        self.nodes.append(node)
        return node

    def backward(self, target: Node, leaves) -> list[np.ndarray]:
        """Gradients of a scalar target with respect to each leaf.

        Leaves that no differentiable path reaches get zero gradients of
        their own shape.
        """
        if target.tape is not self:
            raise ValueError("target was not recorded on this tape")
        if target.value.shape != ():
            raise ValueError(f"backward target must be scalar, got shape {target.shape}")
        leaves = list(leaves)
        for leaf in leaves:
            if not leaf.requires_grad or leaf.parents:
                raise ValueError("gradients are only defined for differentiable leaf nodes")

        pass_counts["backward"] += 1
        grads: dict[int, np.ndarray] = {id(target): np.ones(())}
        for node in reversed(self.nodes):
            if node._vjp is None:
                continue  # leaves keep their accumulated gradients
            grad = grads.pop(id(node), None)
            if grad is None:
                continue
            for parent, pgrad in zip(node.parents, node._vjp(grad)):
                if pgrad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in grads:
                    grads[key] = grads[key] + pgrad
                else:
                    grads[key] = pgrad
        return [grads.get(id(leaf), np.zeros_like(leaf.value)) for leaf in leaves]

    def replay(self) -> list[np.ndarray]:
        """Recompute every recorded value from the leaves, in record order."""
        values: dict[int, np.ndarray] = {}
        out = []
        for node in self.nodes:
            if node._forward is None:
                val = node.value
            else:
                val = node._forward(*(values[id(p)] for p in node.parents))
            values[id(node)] = val
            out.append(val)
        return out


def _as_node(tape: Tape, x) -> Node:
    if isinstance(x, Node):
        if x.tape is not tape:
            raise ValueError("cannot mix nodes from different tapes")
        return x
    return tape.constant(x)


# ----------------------------------------------------------------------
# primitive operations


def matmul(a: Node, b) -> Node:
    b = _as_node(a.tape, b)
    def fwd(av, bv):
        return av @ bv
    def vjp(g):
        return g @ b.value.T, a.value.T @ g
    return a.tape._record(fwd(a.value, b.value), (a, b), vjp, fwd, "matmul")


def spmm(s: SparseMatrix, b: Node) -> Node:
    """Sparse @ dense; the sparse factor is a non-differentiable constant."""
    cache = []
    def fwd(bv):
        return s.matmul_dense(bv)
    def vjp(g):
        if not cache:
            cache.append(s.transpose())
        return (cache[0].matmul_dense(g),)
    return b.tape._record(fwd(b.value), (b,), vjp, fwd, "spmm")


def add_bias(a: Node, bias) -> Node:
    """Add a row vector to every row of a matrix."""
    bias = _as_node(a.tape, bias)
    def fwd(av, bv):
        return av + bv[None, :]
    def vjp(g):
        return g, g.sum(axis=0)
    return a.tape._record(fwd(a.value, bias.value), (a, bias), vjp, fwd, "add_bias")


def add(a: Node, b) -> Node:
    """Elementwise sum of two same-shape values."""
    b = _as_node(a.tape, b)
    if a.value.shape != b.value.shape:
        raise ValueError(f"shape mismatch in add: {a.shape} vs {b.value.shape}")
    def fwd(av, bv):
        return av + bv
    def vjp(g):
        return g, g
    return a.tape._record(fwd(a.value, b.value), (a, b), vjp, fwd, "add")


def mul(a: Node, b) -> Node:
    """Elementwise product (used for dropout masks, among others)."""
    b = _as_node(a.tape, b)
    if a.value.shape != b.value.shape:
        raise ValueError(f"shape mismatch in mul: {a.shape} vs {b.value.shape}")
    def fwd(av, bv):
        return av * bv
    def vjp(g):
        return g * b.value, g * a.value
    return a.tape._record(fwd(a.value, b.value), (a, b), vjp, fwd, "mul")


def scale(a: Node, c: float) -> Node:
    c = float(c)
    def fwd(av):
        return c * av
    def vjp(g):
        return (c * g,)
    return a.tape._record(fwd(a.value), (a,), vjp, fwd, "scale")


def relu(a: Node) -> Node:
    # subgradient at 0 is taken as 0
    def fwd(av):
        return np.maximum(av, 0.0)
    def vjp(g):
        return (g * (a.value > 0),)
    return a.tape._record(fwd(a.value), (a,), vjp, fwd, "relu")


def sum_all(a: Node) -> Node:
    def fwd(av):
        return np.asarray(av.sum())
    def vjp(g):
        return (g * np.ones_like(a.value),)
    return a.tape._record(fwd(a.value), (a,), vjp, fwd, "sum_all")


def frobenius_norm_sq(a: Node) -> Node:
    def fwd(av):
        return np.asarray((av * av).sum())
    def vjp(g):
        return (2.0 * g * a.value,)
    return a.tape._record(fwd(a.value), (a,), vjp, fwd, "frobenius_norm_sq")


def softmax_rows(a: Node) -> Node:
    def fwd(av):
        shifted = av - av.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        return e / e.sum(axis=1, keepdims=True)
    probs = fwd(a.value)
    def vjp(g):
        inner = (g * probs).sum(axis=1, keepdims=True)
        return (probs * (g - inner),)
    return a.tape._record(probs, (a,), vjp, fwd, "softmax_rows")


def masked_cross_entropy(probs: Node, labels, node_set) -> Node:
    """Mean negative log-probability of the true class over a node set."""
    labels = np.asarray(labels, dtype=np.int64)
    node_set = np.asarray(node_set, dtype=np.int64)
    if len(node_set) == 0:
        raise ValueError("masked_cross_entropy needs a non-empty node set")
    def fwd(pv):
        picked = pv[node_set, labels[node_set]]
        return np.asarray(-np.mean(np.log(np.clip(picked, PROB_EPS, 1.0))))
    def vjp(g):
        picked = probs.value[node_set, labels[node_set]]
        out = np.zeros_like(probs.value)
        live = picked > PROB_EPS
        rows = node_set[live]
        contrib = -float(g) / (len(node_set) * picked[live])
        np.add.at(out, (rows, labels[rows]), contrib)
        return (out,)
    return probs.tape._record(fwd(probs.value), (probs,), vjp, fwd, "masked_cross_entropy")


def kl_rows(p: Node, q_const) -> Node:
    """Per-row divergence of a constant target q from predictions p.

    Row i is ``sum_c q_ic * (log q_ic - log p_ic)``, the classic
    nonnegative divergence with q as the reference; gradients flow only
    through p.  Zero q entries contribute exactly zero.
    """
    q = q_const.value if isinstance(q_const, Node) else np.asarray(q_const, dtype=np.float64)
    if p.value.shape != q.shape:
        raise ValueError(f"shape mismatch in kl_rows: {p.shape} vs {q.shape}")
    def fwd(pv):
        log_ratio = np.log(np.clip(q, PROB_EPS, 1.0)) - np.log(np.clip(pv, PROB_EPS, 1.0))
        # round-off can push a mathematically nonnegative row slightly below zero
        return np.maximum((q * log_ratio).sum(axis=1), 0.0)
    def vjp(g):
        grad = -q / np.clip(p.value, PROB_EPS, 1.0)
        grad[p.value <= PROB_EPS] = 0.0
        return (g[:, None] * grad,)
    return p.tape._record(fwd(p.value), (p,), vjp, fwd, "kl_rows")
