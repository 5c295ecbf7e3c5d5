from django.contrib import admin
from django.utils.translation import gettext_lazy as _

from .models import ExperimentRun


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    """
    Stored experiment runs (read-only reports)
    """

    list_display = (
        'id',
        'experiment',
        'family',
        'seeds',
        'passed',
        'row_count',
        'created_at',
    )

    list_filter = (
        'experiment',
        'family',
        'passed',
        'created_at',
    )

    search_fields = (
        'seeds',
        'output_dir',
    )

    ordering = ('-created_at',)

    readonly_fields = ('created_at', 'results')

    fieldsets = (
        (_('Run'), {
            'fields': ('experiment', 'family', 'seeds', 'passed', 'output_dir'),
        }),
        (_('Report'), {
            'classes': ('collapse',),
            'fields': ('results', 'created_at'),
        }),
    )
