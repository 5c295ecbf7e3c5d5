# FILE: HeteroLab/urls.py (main project URLs)
# ============================================================
"""
Main URL Configuration for HeteroLab

API Structure:
- /api/v1/runs/ - Recorded experiment runs (read-only)
- /api/v1/runs/{id}/replay/ - Recompute strike-outs and tallies from stored scores
- /admin/ - Django admin panel
"""

from django.contrib import admin
from django.urls import path, include

urlpatterns = [
    path('admin/', admin.site.urls),
    path('api/v1/', include('experiments.urls')),
]
