# FILE: experiments/serializers.py
# ============================================================
"""
Serializers for stored experiment runs

- ExperimentRunListSerializer: summary for list views
- ExperimentRunDetailSerializer: full report
- ReplaySerializer: tallies recomputed from the stored score vectors
"""

from rest_framework import serializers

from .models import ExperimentRun


class ExperimentRunListSerializer(serializers.ModelSerializer):
    """
    Used in: GET /api/v1/runs/
    """
    rows = serializers.IntegerField(source='row_count', read_only=True)

    class Meta:
        model = ExperimentRun
        fields = ('id', 'experiment', 'family', 'seeds', 'passed', 'rows', 'created_at')
        read_only_fields = fields


class ExperimentRunDetailSerializer(serializers.ModelSerializer):
    """
    Used in: GET /api/v1/runs/{id}/
    """
    tallies = serializers.JSONField(read_only=True)

    class Meta:
        model = ExperimentRun
        fields = ('id', 'experiment', 'family', 'seeds', 'passed', 'output_dir',
                  'tallies', 'results', 'created_at')
        read_only_fields = fields


class ReplaySerializer(serializers.Serializer):
    """
    Used in: GET /api/v1/runs/{id}/replay/
    """
    run = serializers.IntegerField()
    rows = serializers.ListField(child=serializers.DictField())
    tallies = serializers.DictField()
    matches_stored = serializers.BooleanField()
