# FILE: networks/partitioned.py
# ============================================================
"""
Partitioned heteroscedastic networks

Parameters live in four partitions:
- z:     shared trunk
- mu:    mean head
- sigma: scale head
- nu:    degrees-of-freedom head (Student models only)

mean_only_projection() returns the subnetwork made of every computation
that is an ancestor of the mean output. It shares the z and mu arrays
with the full model, so an in-place update through either is seen by both.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from autodiff.graph import Graph
from HeteroLab.constants import (
    DOF, DOF_SHIFT, MEAN, MEAN_ONLY_PARTITIONS, PARTITIONS, SCALE, SCALE_FLOOR,
    TRUNK, VARIANCE_FLOOR,
)
from HeteroLab.exceptions import ArchitectureError
from HeteroLab.utils import counter_rng

logger = logging.getLogger(__name__)

HEAD_PARTITIONS = {'mean': MEAN, 'scale': SCALE, 'dof': DOF}


@dataclass(frozen=True)
class ModelNodes:
    """Node ids of one model instance inside a Graph"""
    x: int
    z: int
    head_input: int
    mean: int
    scale: int = None
    variance: int = None
    dof: int = None
    params: dict = None
    masks: dict = None


@dataclass(frozen=True)
class Moments:
    mean: np.ndarray
    variance: np.ndarray = None
    scale: np.ndarray = None
    dof: np.ndarray = None


def _glorot_uniform(rng, fan_in, fan_out):
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class PartitionedModel:
    """
    A network split into trunk / mean / scale / dof partitions

    `partitions` maps a partition key to an ordered {parameter name: array}
    dict. Partition key sets are disjoint by construction: every parameter
    name starts with its layer prefix (trunk., mean., scale., dof.).
    """

    def __init__(self, spec, seed, partitions):
        self.spec = spec
        self.seed = seed
        self.partitions = partitions

    def __repr__(self):
        sizes = {key: self.parameter_count((key,)) for key in self.partitions}
        return f'PartitionedModel(seed={self.seed}, partitions={sizes})'

    # ================================================================
    # PARAMETERS
    # ================================================================

    @property
    def parameters(self):
        """Flat name -> array view over every partition, in partition order"""
        flat = {}
        for key in PARTITIONS:
            flat.update(self.partitions.get(key, {}))
        return flat

    def partition_of(self, name):
        for key, params in self.partitions.items():
            if name in params:
                return key
        raise KeyError(name)

    def parameter_count(self, keys=None):
        keys = PARTITIONS if keys is None else keys
        return sum(
            array.size
            for key in keys
            for array in self.partitions.get(key, {}).values()
        )

    def copy(self):
        """Deep copy: fresh arrays, same spec and seed"""
        return PartitionedModel(
            self.spec,
            self.seed,
            {key: {name: array.copy() for name, array in params.items()}
             for key, params in self.partitions.items()},
        )

    def load_state(self, state):
        """Overwrite parameters in place from a name -> array mapping"""
        for params in self.partitions.values():
            for name, array in params.items():
                array[...] = state[name]

    def state(self):
        """Snapshot of every parameter (copies)"""
        return {name: array.copy() for name, array in self.parameters.items()}

    def mean_only_projection(self):
        """Exactly the (z, mu) subnetwork, sharing storage with this model"""
        return PartitionedModel(
            self.spec.mean_only(),
            self.seed,
            {key: self.partitions[key] for key in MEAN_ONLY_PARTITIONS},
        )

    @property
    def is_mean_only(self):
        return not self.spec.scale_head

    # ================================================================
    # GRAPH CONSTRUCTION
    # ================================================================

    def _linear(self, graph, source, prefix, param_ids):
        weight = graph.input(f'{prefix}.weight')
        bias = graph.input(f'{prefix}.bias')
        param_ids[f'{prefix}.weight'] = weight
        param_ids[f'{prefix}.bias'] = bias
        return graph.add(graph.matmul(source, weight), bias)

    def build(self, graph, x=None, shield_trunk=False, dropout=False):
        """
        Append this model's forward computation to `graph`

        shield_trunk: scale and dof heads read stop_gradient(z), so their
            gradients never reach the trunk
        dropout: declare one mask input per trunk layer ('mask.<i>')
        """
        if x is None:
            x = graph.input('x')
        param_ids = {}
        mask_ids = {}

        h = x
        for index, layer in enumerate(self.spec.trunk):
            h = self._linear(graph, h, f'trunk.{index}', param_ids)
            if layer.activation != 'linear':
                h = getattr(graph, layer.activation)(h)
            if dropout:
                mask_ids[f'mask.{index}'] = graph.input(f'mask.{index}')
                h = graph.dropout(h, mask_ids[f'mask.{index}'])
        z = h

        head_input = z
        if shield_trunk and self.spec.scale_head:
            head_input = graph.stop_gradient(z)

        mean = self._linear(graph, z, 'mean', param_ids)
        scale = variance = dof = None
        if self.spec.scale_head:
            sigma = graph.softplus(self._linear(graph, head_input, 'scale', param_ids))
            scale = graph.clamp_min(sigma, SCALE_FLOOR)
            variance = graph.clamp_min(graph.square(sigma), VARIANCE_FLOOR)
        if self.spec.dof_head:
            dof = graph.shift(graph.softplus(self._linear(graph, head_input, 'dof', param_ids)), DOF_SHIFT)

        return ModelNodes(
            x=x, z=z, head_input=head_input, mean=mean, scale=scale,
            variance=variance, dof=dof, params=param_ids, masks=mask_ids,
        )

    def bindings(self, nodes):
        """Parameter node id -> current array"""
        parameters = self.parameters
        return {node_id: parameters[name] for name, node_id in nodes.params.items()}

    def dropout_masks(self, n_rows, seed, *labels):
        """
        Inverted-dropout masks for each trunk layer

        Masks are keyed by (seed, labels, layer) so a model and its
        mean-only projection draw identical masks.
        """
        rate = self.spec.dropout_rate
        masks = {}
        for index, layer in enumerate(self.spec.trunk):
            rng = counter_rng(seed, *labels, 'mask', index)
            keep = rng.random((n_rows, layer.width)) >= rate
            masks[f'mask.{index}'] = keep / (1.0 - rate)
        return masks


# ============================================================
# OPERATIONS
# ============================================================

def build_model(spec, seed):
    """
    Initialize a PartitionedModel

    Weights: uniform on +-sqrt(6 / (fan_in + fan_out)); biases: zero.
    Each layer draws from its own counter-based stream keyed by
    (seed, layer name), so heads never perturb each other's draws.
    """
    spec.validate()
    partitions = {TRUNK: {}, MEAN: {}}

    fan_in = spec.input_dim
    for index, layer in enumerate(spec.trunk):
        rng = counter_rng(seed, 'trunk', index)
        partitions[TRUNK][f'trunk.{index}.weight'] = _glorot_uniform(rng, fan_in, layer.width)
        partitions[TRUNK][f'trunk.{index}.bias'] = np.zeros(layer.width)
        fan_in = layer.width

    heads = ['mean']
    if spec.scale_head:
        heads.append('scale')
    if spec.dof_head:
        heads.append('dof')
    for head in heads:
        key = HEAD_PARTITIONS[head]
        rng = counter_rng(seed, head)
        partitions.setdefault(key, {})
        partitions[key][f'{head}.weight'] = _glorot_uniform(rng, fan_in, spec.output_dim)
        partitions[key][f'{head}.bias'] = np.zeros(spec.output_dim)

    model = PartitionedModel(spec, seed, partitions)
    logger.debug('Built %r', model)
    return model


def predict_moments(model, x, mode='deterministic', mask_seed=None):
    """
    Forward pass returning the predictive moments

    mode: 'deterministic' or 'dropout' (requires mask_seed)
    Mean-only models return variance/scale/dof as None.
    """
    if mode not in ('deterministic', 'dropout'):
        raise ArchitectureError(f'unknown prediction mode {mode!r}')
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.spec.input_dim:
        raise ArchitectureError(
            f'expected x with {model.spec.input_dim} columns, got shape {x.shape}')

    use_masks = mode == 'dropout'
    if use_masks and mask_seed is None:
        raise ArchitectureError('dropout mode needs a mask seed')

    graph = Graph()
    nodes = model.build(graph, dropout=use_masks)
    bindings = {nodes.x: x, **model.bindings(nodes)}
    if use_masks:
        for name, mask in model.dropout_masks(x.shape[0], mask_seed, 'predict').items():
            bindings[nodes.masks[name]] = mask
    values = graph.forward(bindings)

    def pick(node_id):
        return None if node_id is None else values[node_id]

    return Moments(
        mean=values[nodes.mean],
        variance=pick(nodes.variance),
        scale=pick(nodes.scale),
        dof=pick(nodes.dof),
    )


def mean_only_projection(model):
    return model.mean_only_projection()
