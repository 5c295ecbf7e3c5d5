# FILE: experiments/views.py
# ============================================================
"""
Views for Experiments App

ExperimentRunViewSet is read-only:
- list / retrieve stored runs
- replay: recompute strike-outs, win/tie flags and tallies from the
  stored score vectors, without retraining
"""

import logging

from rest_framework import status, viewsets
from rest_framework.decorators import action
from rest_framework.response import Response

from HeteroLab.exceptions import HeteroLabError

from .judging import replay_report
from .models import ExperimentRun
from .serializers import ExperimentRunDetailSerializer, ExperimentRunListSerializer, ReplaySerializer

logger = logging.getLogger(__name__)


class ExperimentRunViewSet(viewsets.ReadOnlyModelViewSet):
    """
    Endpoints created:
    - GET /api/v1/runs/               → List runs (?experiment=, ?family=, ?passed=, ?search=, ?ordering=)
    - GET /api/v1/runs/{id}/          → Full report
    - GET /api/v1/runs/{id}/replay/   → Tallies replayed from score vectors
    """

    queryset = ExperimentRun.objects.all()
    filterset_fields = ('experiment', 'family', 'passed')
    search_fields = ('experiment', 'output_dir')
    ordering_fields = ('created_at', 'experiment')

    def get_serializer_class(self):
        if self.action == 'list':
            return ExperimentRunListSerializer
        if self.action == 'replay':
            return ReplaySerializer
        return ExperimentRunDetailSerializer

    @action(detail=True, methods=['get'])
    def replay(self, request, pk=None):
        run = self.get_object()
        results = run.results
        if not results.get('scores'):
            return Response(
                {'detail': f'{run.experiment} run #{run.pk} stores no score vectors to replay'},
                status=status.HTTP_400_BAD_REQUEST,
            )
        try:
            replayed = replay_report(results)
        except (HeteroLabError, KeyError) as exc:
            logger.warning('replay of run %s failed: %s', run.pk, exc)
            return Response({'detail': f'cannot replay run #{run.pk}: {exc}'},
                            status=status.HTTP_400_BAD_REQUEST)

        stored = [(row['dataset'], row['model'], row['struck'], row['wins']) for row in results['rows']]
        recomputed = [(row['dataset'], row['model'], row['struck'], row['wins']) for row in replayed['rows']]
        serializer = self.get_serializer({
            'run': run.pk,
            'rows': replayed['rows'],
            'tallies': replayed['tallies'],
            'matches_stored': stored == recomputed and replayed['tallies'] == results.get('tallies'),
        })
        return Response(serializer.data)
