# FILE: experiments/reporting.py
# ============================================================
"""
Experiment reports and their files

emit_report() writes, under one directory:
- results.json   {experiment, config, environment, rows, tallies, scores,
                  summary, certificate, failures}
- results.csv    one row per (dataset, model)
- curves/*.csv   convergence / decomposition curves
- plots/*.svg    polyline plots of the curves

Every file is a deterministic function of the report.
"""

import logging
import math
import platform
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import django
import numpy as np
import pandas as pd
from rest_framework.renderers import JSONRenderer

from HeteroLab.exceptions import ReportError

logger = logging.getLogger(__name__)

PALETTE = ('#1f77b4', '#d62728', '#2ca02c', '#ff7f0e', '#9467bd', '#8c564b', '#e377c2', '#7f7f7f')


def environment_stamp(config):
    return {
        'python': platform.python_version(),
        'numpy': np.__version__,
        'django': django.get_version(),
        'seeds': list(config.seeds),
        'ece_bins': config.ece_bins,
        'g_test': '2xm contingency against the best non-struck ECE histogram',
        'ks_test': 'one-sided asymptotic, p = exp(-2 D+^2 nm / (n + m))',
        'noise_mode': config.noise_mode,
        'standardization': config.standardization,
    }


@dataclass(frozen=True)
class PlotSpec:
    name: str
    curve: str
    x: str
    series: tuple
    title: str = ''


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    environment: dict
    rows: list = field(default_factory=list)
    tallies: dict = field(default_factory=dict)
    scores: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    certificate: dict = None
    failures: list = field(default_factory=list)
    curves: dict = field(default_factory=dict)
    plots: list = field(default_factory=list)

    @classmethod
    def start(cls, config):
        return cls(config.experiment, config.to_dict(), environment_stamp(config))

    def record_failure(self, dataset, model, seed, exc):
        logger.warning('%s / %s (seed %s) failed: %s', dataset, model, seed, exc)
        self.failures.append({'dataset': dataset, 'model': model, 'seed': seed, 'error': str(exc)})

    def add_curve(self, name, frame, plot=None):
        self.curves[name] = frame
        if plot is not None:
            self.plots.append(plot)

    @property
    def passed(self):
        return None if self.certificate is None else bool(self.certificate['passed'])

    def to_dict(self):
        return json_safe({
            'experiment': self.experiment,
            'config': self.config,
            'environment': self.environment,
            'rows': self.rows,
            'tallies': self.tallies,
            'scores': self.scores,
            'summary': self.summary,
            'certificate': self.certificate,
            'failures': self.failures,
        })


def json_safe(value):
    """Numpy scalars and arrays to plain Python; NaN and infinities to None"""
    if isinstance(value, dict):
        return {str(key): json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(item) for item in value]
    if isinstance(value, np.ndarray):
        return json_safe(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


# ============================================================
# SVG
# ============================================================

def render_svg(frame, x, series, title='', width=640, height=400):
    """Self-contained SVG line plot of frame[x] against each frame[name] in series"""
    left, right, top, bottom = 60, 150, 30, 40
    plot_w, plot_h = width - left - right, height - top - bottom

    xs = frame[x].to_numpy(dtype=np.float64)
    columns = [frame[name].to_numpy(dtype=np.float64) for name in series]
    finite = np.concatenate([c[np.isfinite(c)] for c in columns]) if columns else np.array([])
    x_lo, x_hi = float(np.min(xs)), float(np.max(xs))
    y_lo, y_hi = (float(np.min(finite)), float(np.max(finite))) if finite.size else (0.0, 1.0)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    def px(value):
        return left + (value - x_lo) / (x_hi - x_lo) * plot_w

    def py(value):
        return top + (y_hi - value) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left}" y="18" font-size="13">{escape(title)}</text>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" y2="{top + plot_h}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>',
        f'<text x="{left}" y="{height - 10}">{x_lo:.3g}</text>',
        f'<text x="{left + plot_w}" y="{height - 10}" text-anchor="end">{x_hi:.3g}</text>',
        f'<text x="{left - 5}" y="{top + plot_h}" text-anchor="end">{y_lo:.3g}</text>',
        f'<text x="{left - 5}" y="{top + 10}" text-anchor="end">{y_hi:.3g}</text>',
    ]
    for index, (name, values) in enumerate(zip(series, columns)):
        color = PALETTE[index % len(PALETTE)]
        keep = np.isfinite(values)
        points = ' '.join(f'{px(a):.2f},{py(b):.2f}' for a, b in zip(xs[keep], values[keep]))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>')
        legend_y = top + 14 * (index + 1)
        parts.append(f'<line x1="{width - right + 10}" y1="{legend_y - 4}" x2="{width - right + 30}" '
                     f'y2="{legend_y - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{width - right + 35}" y="{legend_y}">{escape(str(name))}</text>')
    parts.append('</svg>')
    return '\n'.join(parts) + '\n'


# ============================================================
# EMIT
# ============================================================

def results_frame(rows):
    columns = ['dataset', 'model', 'label', 'rmse', 'ece', 'll', 'struck',
               'win_rmse', 'win_ece', 'win_ll', 'error']
    flat = [
        {
            **{key: row.get(key) for key in ('dataset', 'model', 'label', 'rmse', 'ece', 'll', 'struck', 'error')},
            **{f'win_{metric}': bool(row.get('wins', {}).get(metric, False)) for metric in ('rmse', 'ece', 'll')},
        }
        for row in rows
    ]
    return pd.DataFrame(flat, columns=columns)


def emit_report(report, directory):
    """Write every report file; returns the paths written"""
    directory = Path(directory)
    written = []
    try:
        directory.mkdir(parents=True, exist_ok=True)

        path = directory / 'results.json'
        path.write_bytes(JSONRenderer().render(report.to_dict(), renderer_context={'indent': 2}))
        written.append(path)

        path = directory / 'results.csv'
        results_frame(report.rows).to_csv(path, index=False)
        written.append(path)

        if report.curves:
            (directory / 'curves').mkdir(exist_ok=True)
        for name in sorted(report.curves):
            path = directory / 'curves' / f'{name}.csv'
            report.curves[name].to_csv(path, index=False)
            written.append(path)

        if report.plots:
            (directory / 'plots').mkdir(exist_ok=True)
        for plot in report.plots:
            path = directory / 'plots' / f'{plot.name}.svg'
            path.write_text(render_svg(report.curves[plot.curve], plot.x, plot.series, plot.title), encoding='utf-8')
            written.append(path)
    except OSError as exc:
        raise ReportError(f'cannot write report to {directory}: {exc}') from exc

    logger.info('wrote %d report files to %s', len(written), directory)
    return written
