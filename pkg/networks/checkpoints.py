"""
Model checkpoint files

A checkpoint is a versioned JSON document:
    {"format_version": 1, "spec": {...}, "seed": 7,
     "partitions": {"z": {"trunk.0.weight": [[...]], ...}, ...}}
"""

from pathlib import Path

import numpy as np
from rest_framework import serializers
from rest_framework.parsers import JSONParser
from rest_framework.renderers import JSONRenderer

from HeteroLab.constants import PARTITIONS
from HeteroLab.exceptions import ArchitectureError, CheckpointError

from .architecture import ArchitectureSpec
from .partitioned import PartitionedModel

FORMAT_VERSION = 1


class CheckpointSerializer(serializers.Serializer):
    """
    Validates a checkpoint document

    Validates:
    - Supported format version
    - Known partition keys
    - Architecture spec is constructible
    """
    format_version = serializers.IntegerField()
    spec = serializers.DictField()
    seed = serializers.IntegerField()
    partitions = serializers.DictField(child=serializers.DictField(child=serializers.JSONField()))

    def validate_format_version(self, value):
        if value != FORMAT_VERSION:
            raise serializers.ValidationError(f'unsupported checkpoint format {value}')
        return value

    def validate_partitions(self, value):
        unknown = set(value) - set(PARTITIONS)
        if unknown:
            raise serializers.ValidationError(f'unknown partitions {sorted(unknown)}')
        return value

    def validate_spec(self, value):
        try:
            return ArchitectureSpec.from_dict(value)
        except (KeyError, TypeError, ValueError, ArchitectureError) as exc:
            raise serializers.ValidationError(f'invalid architecture: {exc}')


def checkpoint_document(model):
    return {
        'format_version': FORMAT_VERSION,
        'spec': model.spec.to_dict(),
        'seed': int(model.seed),
        'partitions': {
            key: {name: array.tolist() for name, array in params.items()}
            for key, params in model.partitions.items()
        },
    }


def save_checkpoint(model, path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(JSONRenderer().render(checkpoint_document(model)))
    except OSError as exc:
        raise CheckpointError(f'cannot write checkpoint {path}: {exc}') from exc
    return path


def load_checkpoint(path):
    path = Path(path)
    try:
        with path.open('rb') as stream:
            document = JSONParser().parse(stream)
    except Exception as exc:
        raise CheckpointError(f'cannot read checkpoint {path}: {exc}') from exc

    serializer = CheckpointSerializer(data=document)
    if not serializer.is_valid():
        raise CheckpointError(f'invalid checkpoint {path}: {serializer.errors}')
    data = serializer.validated_data

    partitions = {
        key: {name: np.ascontiguousarray(values, dtype=np.float64) for name, values in params.items()}
        for key, params in data['partitions'].items()
    }
    return PartitionedModel(data['spec'], data['seed'], partitions)
