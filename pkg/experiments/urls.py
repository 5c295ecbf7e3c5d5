# FILE: experiments/urls.py
# ============================================================
"""
URL Routing for Experiments App
"""

from django.urls import include, path
from rest_framework.routers import DefaultRouter

from .views import ExperimentRunViewSet

router = DefaultRouter()
router.register(r'runs', ExperimentRunViewSet, basename='run')

urlpatterns = [
    path('', include(router.urls)),
]

# Included in HeteroLab/urls.py as path('api/v1/', include('experiments.urls')):
#   GET /api/v1/runs/
#   GET /api/v1/runs/{id}/
#   GET /api/v1/runs/{id}/replay/
