# FILE: autodiff/graph.py
# ============================================================
"""
Reverse-mode automatic differentiation over dense float64 tensors

A Graph is an append-only list of nodes. A node id is the node's position
in that list, so operands always precede their consumers and id order is
a topological order. Values are plain C-contiguous float64 ndarrays.

Gradient flow:
- backward() walks node ids in reverse and pushes gradients only along
  differentiable edges
- a stop-gradient node has no differentiable edge, so nothing behind it
  receives a contribution through it
- nodes that receive no contribution are absent from the GradientMap
  (no zero-filled entries, no `+ 0.0` writes)
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from HeteroLab.exceptions import DomainError, GraphError, NonFiniteError, ShapeError

logger = logging.getLogger(__name__)


def as_tensor(value):
    """Coerce a value to a contiguous float64 ndarray"""
    return np.ascontiguousarray(value, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class Node:
    id: int
    op: str
    operands: tuple
    attrs: dict = field(default_factory=dict)
    name: str = None


def _unbroadcast(grad, shape):
    """Sum a gradient back down to the shape of the operand it belongs to"""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _expand_reduced(grad, shape, axis):
    if axis is not None:
        grad = np.expand_dims(grad, axis)
    return np.broadcast_to(grad, shape).copy()


def _matmul_forward(values, attrs):
    a, b = values
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f'cannot multiply {a.shape} by {b.shape}')
    return a @ b


def _elementwise(fn):
    def forward(values, attrs):
        a, b = values
        if attrs.get('strict') and a.shape != b.shape:
            raise ValueError(f'operand shapes differ: {a.shape} vs {b.shape}')
        return fn(a, b)
    return forward


def _log_forward(values, attrs):
    (a,) = values
    if np.any(a <= 0.0):
        raise DomainError('log of nonpositive value (nonpositive variance or scale?)')
    return np.log(a)


def _reduce_count(shape, axis):
    if axis is None:
        return int(np.prod(shape, dtype=np.int64))
    return shape[axis]


@dataclass(frozen=True)
class Primitive:
    forward: object
    backward: object
    # Operand positions that gradients flow into
    grad_operands: tuple = (0,)


PRIMITIVES = {
    'matmul': Primitive(
        _matmul_forward,
        lambda g, out, v, attrs: (g @ v[1].T, v[0].T @ g),
        (0, 1),
    ),
    'add': Primitive(
        _elementwise(lambda a, b: a + b),
        lambda g, out, v, attrs: (g, g),
        (0, 1),
    ),
    'sub': Primitive(
        _elementwise(lambda a, b: a - b),
        lambda g, out, v, attrs: (g, -g),
        (0, 1),
    ),
    'mul': Primitive(
        _elementwise(lambda a, b: a * b),
        lambda g, out, v, attrs: (g * v[1], g * v[0]),
        (0, 1),
    ),
    'div': Primitive(
        _elementwise(lambda a, b: a / b),
        lambda g, out, v, attrs: (g / v[1], -g * v[0] / (v[1] * v[1])),
        (0, 1),
    ),
    'neg': Primitive(
        lambda v, attrs: -v[0],
        lambda g, out, v, attrs: (-g,),
    ),
    'square': Primitive(
        lambda v, attrs: v[0] * v[0],
        lambda g, out, v, attrs: (2.0 * v[0] * g,),
    ),
    # Subgradient 0 at the kink
    'abs': Primitive(
        lambda v, attrs: np.abs(v[0]),
        lambda g, out, v, attrs: (np.sign(v[0]) * g,),
    ),
    'log': Primitive(
        _log_forward,
        lambda g, out, v, attrs: (g / v[0],),
    ),
    'exp': Primitive(
        lambda v, attrs: np.exp(v[0]),
        lambda g, out, v, attrs: (g * out,),
    ),
    # alpha = 1
    'elu': Primitive(
        lambda v, attrs: np.where(v[0] > 0.0, v[0], np.expm1(v[0])),
        lambda g, out, v, attrs: (np.where(v[0] > 0.0, g, g * np.exp(v[0])),),
    ),
    'softplus': Primitive(
        lambda v, attrs: np.logaddexp(0.0, v[0]),
        lambda g, out, v, attrs: (g * special.expit(v[0]),),
    ),
    'relu': Primitive(
        lambda v, attrs: np.maximum(v[0], 0.0),
        lambda g, out, v, attrs: (np.where(v[0] > 0.0, g, 0.0),),
    ),
    'lgamma': Primitive(
        lambda v, attrs: special.gammaln(v[0]),
        lambda g, out, v, attrs: (g * special.digamma(v[0]),),
    ),
    'clamp-min': Primitive(
        lambda v, attrs: np.maximum(v[0], attrs['floor']),
        lambda g, out, v, attrs: (np.where(v[0] > attrs['floor'], g, 0.0),),
    ),
    'reduce-sum': Primitive(
        lambda v, attrs: np.asarray(np.sum(v[0], axis=attrs['axis'])),
        lambda g, out, v, attrs: (_expand_reduced(g, v[0].shape, attrs['axis']),),
    ),
    'reduce-mean': Primitive(
        lambda v, attrs: np.asarray(np.mean(v[0], axis=attrs['axis'])),
        lambda g, out, v, attrs: (
            _expand_reduced(g / _reduce_count(v[0].shape, attrs['axis']), v[0].shape, attrs['axis']),
        ),
    ),
    # Second operand only supplies the target shape
    'broadcast': Primitive(
        lambda v, attrs: np.broadcast_to(v[0], v[1].shape).copy(),
        lambda g, out, v, attrs: (g,),
    ),
    'stop-gradient': Primitive(
        lambda v, attrs: v[0],
        lambda g, out, v, attrs: (),
        (),
    ),
    # The mask is an input tensor generated outside the graph
    'dropout-mask-apply': Primitive(
        lambda v, attrs: v[0] * v[1],
        lambda g, out, v, attrs: (g * v[1],),
    ),
}

OP_KINDS = ('input', 'constant') + tuple(PRIMITIVES)


class GradientMap(dict):
    """
    Node id -> gradient of the loss w.r.t. that node's value

    Only nodes that a differentiable path connects to the loss appear.
    """

    def named(self, graph):
        """Gradients of bound inputs keyed by input name"""
        return {
            name: self[node_id]
            for name, node_id in graph.input_ids.items()
            if node_id in self
        }


class Graph:
    """
    Append-only compute DAG

    Usage:
        g = Graph()
        x = g.input('x')
        loss = g.reduce_sum(g.square(x))
        g.forward({'x': [1.0, 2.0]})
        grads = g.backward(loss)        # grads[x] == [2.0, 4.0]
    """

    def __init__(self):
        self.nodes = []
        self.input_ids = {}
        self._values = None
        self._evaluated = 0

    def __len__(self):
        return len(self.nodes)

    # ================================================================
    # CONSTRUCTION
    # ================================================================

    def _append(self, op, operands=(), attrs=None, name=None):
        for operand in operands:
            if not 0 <= operand < len(self.nodes):
                raise GraphError(f'operand {operand} does not precede the new {op} node')
        node = Node(len(self.nodes), op, tuple(operands), attrs or {}, name)
        self.nodes.append(node)
        return node.id

    def input(self, name):
        """Declare a named input; bound at every forward()"""
        if name in self.input_ids:
            raise GraphError(f'input {name!r} declared twice')
        node_id = self._append('input', name=name)
        self.input_ids[name] = node_id
        return node_id

    def constant(self, value):
        value = as_tensor(value)
        if not np.all(np.isfinite(value)):
            raise NonFiniteError(len(self.nodes), 'constant')
        return self._append('constant', attrs={'value': value})

    def matmul(self, a, b):
        return self._append('matmul', (a, b))

    # strict=True rejects broadcasting between the two operands
    def add(self, a, b, strict=False):
        return self._append('add', (a, b), {'strict': strict})

    def sub(self, a, b, strict=False):
        return self._append('sub', (a, b), {'strict': strict})

    def mul(self, a, b, strict=False):
        return self._append('mul', (a, b), {'strict': strict})

    def div(self, a, b, strict=False):
        return self._append('div', (a, b), {'strict': strict})

    def neg(self, a):
        return self._append('neg', (a,))

    def square(self, a):
        return self._append('square', (a,))

    def abs(self, a):
        return self._append('abs', (a,))

    def log(self, a):
        return self._append('log', (a,))

    def exp(self, a):
        return self._append('exp', (a,))

    def elu(self, a):
        return self._append('elu', (a,))

    def softplus(self, a):
        return self._append('softplus', (a,))

    def relu(self, a):
        return self._append('relu', (a,))

    def lgamma(self, a):
        return self._append('lgamma', (a,))

    def clamp_min(self, a, floor):
        return self._append('clamp-min', (a,), {'floor': float(floor)})

    def reduce_sum(self, a, axis=None):
        return self._append('reduce-sum', (a,), {'axis': axis})

    def reduce_mean(self, a, axis=None):
        return self._append('reduce-mean', (a,), {'axis': axis})

    def broadcast(self, a, like):
        """Broadcast `a` to the shape of node `like`"""
        return self._append('broadcast', (a, like))

    def stop_gradient(self, a):
        """Identity forward, blocks every gradient backward"""
        return self._append('stop-gradient', (a,))

    def dropout(self, a, mask):
        return self._append('dropout-mask-apply', (a, mask))

    def scale(self, a, factor):
        """Multiply by a scalar constant"""
        return self.mul(a, self.constant(factor))

    def shift(self, a, offset):
        """Add a scalar constant"""
        return self.add(a, self.constant(offset))

    # ================================================================
    # EVALUATION
    # ================================================================

    def forward(self, bindings):
        """
        Evaluate every node in id order

        bindings maps input names (or input node ids) to array-likes.
        Returns the value map node id -> ndarray.
        """
        bound = {}
        for key, value in bindings.items():
            node_id = self.input_ids.get(key, key)
            if not isinstance(node_id, int) or not 0 <= node_id < len(self.nodes) \
                    or self.nodes[node_id].op != 'input':
                raise GraphError(f'{key!r} is not an input of this graph')
            bound[node_id] = value

        values = [None] * len(self.nodes)
        for node in self.nodes:
            if node.op == 'input':
                if node.id not in bound:
                    raise GraphError(f'input {node.name!r} is not bound')
                value = as_tensor(bound[node.id])
            elif node.op == 'constant':
                value = node.attrs['value']
            else:
                operands = [values[i] for i in node.operands]
                try:
                    with np.errstate(all='ignore'):
                        value = PRIMITIVES[node.op].forward(operands, node.attrs)
                except DomainError as exc:
                    raise DomainError(f'node {node.id} ({node.op}): {exc}', node.id) from exc
                except ValueError as exc:
                    shapes = [operand.shape for operand in operands]
                    raise ShapeError(f'node {node.id} ({node.op}): shapes {shapes}: {exc}', node.id) from exc
            if not np.all(np.isfinite(value)):
                raise NonFiniteError(node.id, node.op)
            values[node.id] = value

        self._values = values
        self._evaluated = len(self.nodes)
        return dict(enumerate(values))

    def _require_fresh(self):
        if self._values is None or self._evaluated != len(self.nodes):
            raise GraphError('forward values are stale; run forward() first')

    def value(self, node_id):
        self._require_fresh()
        return self._values[node_id]

    def differentiable_operands(self, node_id):
        node = self.nodes[node_id]
        primitive = PRIMITIVES.get(node.op)
        if primitive is None:
            return ()
        return tuple(node.operands[pos] for pos in primitive.grad_operands)

    def live_ancestors(self, node_id):
        """Nodes connected to `node_id` by a path of differentiable edges (itself included)"""
        seen = {node_id}
        stack = [node_id]
        while stack:
            for operand in self.differentiable_operands(stack.pop()):
                if operand not in seen:
                    seen.add(operand)
                    stack.append(operand)
        return seen

    def backward(self, loss):
        """
        Gradients of a scalar loss node

        Contributions are accumulated in reverse id order, operands in
        operand order, so the result never depends on data or hashing.
        """
        self._require_fresh()
        if self._values[loss].shape != ():
            raise GraphError(f'loss node {loss} is not scalar: shape {self._values[loss].shape}')

        grads = GradientMap({loss: np.ones((), dtype=np.float64)})
        for node in reversed(self.nodes[:loss + 1]):
            if node.id not in grads:
                continue
            primitive = PRIMITIVES.get(node.op)
            if primitive is None or not primitive.grad_operands:
                continue
            operands = [self._values[i] for i in node.operands]
            with np.errstate(all='ignore'):
                contributions = primitive.backward(
                    grads[node.id], self._values[node.id], operands, node.attrs)
            for pos, contribution in zip(primitive.grad_operands, contributions):
                target = node.operands[pos]
                if self.nodes[target].op == 'constant':
                    continue
                contribution = _unbroadcast(contribution, operands[pos].shape)
                if target in grads:
                    grads[target] = grads[target] + contribution
                else:
                    grads[target] = contribution
        return grads


# ============================================================
# FUNCTIONAL ALIASES
# ============================================================

def forward(graph, bindings):
    return graph.forward(bindings)


def backward(graph, loss):
    return graph.backward(loss)


def stop_gradient(graph, node_id):
    return graph.stop_gradient(node_id)
