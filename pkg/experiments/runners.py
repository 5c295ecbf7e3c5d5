# FILE: experiments/runners.py
# ============================================================
"""
Experiment runners

- run_convergence: sine task, predictive curves every `snapshot_every` epochs
- run_tabular: k-fold cross-validation with strike-outs and win/tie tallies
- run_decompose: noise variance recovered as var_noisy(x) - var_clean(x)
- verify_faithfulness: lockstep training of a model and its mean-only twin
- run_family: deep-ensemble / MC-dropout wrappers on the sine task

Each runner returns an ExperimentReport; emit_report() writes it.
"""

import logging

import numpy as np
import pandas as pd

from datasets.io import load_csv_dataset
from datasets.preprocessing import Standardization
from datasets.synthetic import (
    ISOLATED_POINTS, generate_decomposition_pair, generate_sine_dataset, sine_noise_law,
)
from HeteroLab.constants import FAITHFUL, MEAN_ONLY_PARTITIONS
from HeteroLab.exceptions import ConfigurationError, HeteroLabError, VerificationError
from HeteroLab.utils import bitwise_equal, derive_seed, max_ulp_distance
from losses.objectives import LossSpec
from metrics.scores import ModelScore, score_model
from networks.partitioned import build_model
from optim.training import TrainSchedule, Trainer

from .jobs import fit_family, member_seeds, tabular_sources
from .judging import judge_dataset, tally
from .reporting import ExperimentReport, PlotSpec
from .roster import resolve_loss, roster_variant

logger = logging.getLogger(__name__)

SINE_GRID = np.linspace(0.0, 10.0, 201)
DECOMPOSE_GRID = np.linspace(2.5, 7.5, 101)
INTERIOR = (3.0, 7.0)
FAR_POINT = 10.0
CENTER_POINT = 5.0


def snapshot_epochs(config):
    total = config.total_epochs
    epochs = list(range(config.snapshot_every, total + 1, config.snapshot_every))
    if total not in epochs:
        epochs.append(total)
    return tuple(epochs)


def fitted_transform(dataset, config):
    if config.standardization == 'none':
        return Standardization.identity(dataset.input_dim, dataset.output_dim)
    return Standardization.fit(dataset)


def raw_distribution(outcome, transform, x, epoch=None):
    x = np.asarray(x, dtype=np.float64).reshape(-1, 1)
    return transform.to_raw(outcome.distribution(transform.transform_features(x), epoch))


def interior_relative_error(grid, predicted, truth):
    inside = (grid >= INTERIOR[0]) & (grid <= INTERIOR[1])
    return float(np.mean(np.abs(predicted[inside] - truth[inside]) / truth[inside]))


# ============================================================
# SINE TASK (convergence and family runs)
# ============================================================

def _run_sine(config, snapshots):
    report = ExperimentReport.start(config)
    spec = config.architecture_spec(1, 1)

    for seed in config.seeds:
        dataset_name = f'sine-{seed}'
        task = generate_sine_dataset(seed, config.noise_mode)
        test = generate_sine_dataset(derive_seed(seed, 'test'), config.noise_mode).dataset
        transform = fitted_transform(task.dataset, config)
        train_set = transform.apply(task.dataset)
        true_mean = task.mean_fn(SINE_GRID)
        true_variance = task.noise_variance(SINE_GRID)

        scores, errors, extras = {}, {}, {}
        for variant in config.variants():
            try:
                outcome = fit_family(variant, config, spec, train_set, seed, snapshots=snapshots)
            except HeteroLabError as exc:
                report.record_failure(dataset_name, variant.key, seed, exc)
                errors[variant.key] = str(exc)
                continue

            curve = {'x': SINE_GRID, 'true_mean': true_mean, 'true_variance': true_variance}
            trajectory = []
            for epoch in snapshots:
                mean, variance = raw_distribution(outcome, transform, SINE_GRID, epoch).moments()
                curve[f'mean_{epoch}'] = mean[:, 0]
                curve[f'variance_{epoch}'] = variance[:, 0]
                isolated, _ = raw_distribution(outcome, transform, ISOLATED_POINTS, epoch).moments()
                errors_at = np.abs(isolated[:, 0] - task.mean_fn(np.asarray(ISOLATED_POINTS)))
                trajectory.append({
                    'epoch': epoch,
                    **{f'isolated_error_{x:g}': float(e) for x, e in zip(ISOLATED_POINTS, errors_at)},
                    'variance_relative_error': interior_relative_error(SINE_GRID, variance[:, 0], true_variance),
                })

            name = f'{config.experiment}-{variant.key}-{seed}'
            final = snapshots[-1]
            report.add_curve(name, pd.DataFrame(curve), PlotSpec(
                f'{name}-mean', name, 'x', ('true_mean', *[f'mean_{e}' for e in snapshots]),
                f'{variant.label}: predictive mean'))
            report.plots.append(PlotSpec(
                f'{name}-variance', name, 'x', ('true_variance', *[f'variance_{e}' for e in snapshots]),
                f'{variant.label}: predictive variance'))

            _, spread = raw_distribution(outcome, transform, [CENTER_POINT, FAR_POINT]).moments()
            extras[variant.key] = {
                'snapshots': trajectory,
                **{key: value for key, value in trajectory[-1].items() if key != 'epoch'},
                'variance_at_5': float(spread[0, 0]),
                'variance_at_10': float(spread[1, 0]),
                'members_trained': len(outcome.results),
                'member_failures': outcome.failures,
                'final_epoch': final,
            }
            scores[variant.key] = score_model(
                raw_distribution(outcome, transform, test.X), test.Y, config.ece_bins)
            logger.info('%s %s: isolated errors %s', dataset_name, variant.key,
                        [round(v, 4) for k, v in trajectory[-1].items() if k.startswith('isolated')])

        rows = judge_dataset(dataset_name, scores, config.significance_level, errors, order=config.models)
        for row in rows:
            row.update(extras.get(row['model'], {}))
        report.rows.extend(rows)
        report.scores[dataset_name] = {key: score.to_dict() for key, score in scores.items()}

    report.tallies = tally(report.rows, config.models)
    return report


def run_convergence(config):
    report = _run_sine(config, snapshot_epochs(config))
    report.summary = {
        f"{row['dataset']}/{row['model']}": {
            key: row.get(key) for key in ('isolated_error_0.5', 'isolated_error_9.5', 'variance_relative_error')
        }
        for row in report.rows if row['error'] is None
    }
    return report


def run_family(config):
    """
    Deep-ensemble / MC-dropout (or plain) models on the sine task, or on
    CSV data through the cross-validation protocol when data is given
    """
    if config.members < 1:
        raise ConfigurationError('a model family needs at least one member')
    if config.data:
        return run_tabular(config)
    report = _run_sine(config, (config.total_epochs,))
    report.summary = {
        f"{row['dataset']}/{row['model']}": {
            'variance_at_5': row.get('variance_at_5'),
            'variance_at_10': row.get('variance_at_10'),
            'members_trained': row.get('members_trained'),
        }
        for row in report.rows if row['error'] is None
    }
    return report


# ============================================================
# TABULAR CROSS-VALIDATION
# ============================================================

def pool_fold_results(parts, n_rows, output_dim, bins):
    """Place each fold's held-out vectors at their row ids and score the pool"""
    squared = np.empty(n_rows)
    ll = np.empty(n_rows)
    cdf_values = np.empty((n_rows, output_dim))
    for part in parts:
        rows = np.asarray(part['rows'], dtype=np.int64)
        squared[rows] = part['squared_errors']
        ll[rows] = part['ll_values']
        cdf_values[rows] = np.asarray(part['cdf_values']).reshape(len(rows), output_dim)
    return ModelScore.from_vectors(squared, cdf_values, ll, output_dim, bins)


def run_tabular(config, dataset_paths=None):
    from .tasks import dispatch

    report = ExperimentReport.start(config)
    payload_config = config.to_dict()
    names, payloads = [], []
    for name, source, seeds in tabular_sources(config, dataset_paths):
        for seed in seeds:
            dataset_name = name if len(seeds) == 1 else f'{name}@{seed}'
            names.append(dataset_name)
            for fold in range(config.folds):
                for key in config.models:
                    payloads.append({
                        'config': payload_config, 'dataset': dataset_name, 'source': source,
                        'seed': seed, 'fold': fold, 'model': key,
                    })

    logger.info('tabular run: %d datasets, %d models, %d folds', len(names), len(config.models), config.folds)
    grouped = {}
    for result in dispatch(payloads):
        grouped.setdefault(result['dataset'], {}).setdefault(result['model'], []).append(result)

    for dataset_name in names:
        scores, errors = {}, {}
        for key in config.models:
            parts = sorted(grouped[dataset_name][key], key=lambda part: part['fold'])
            failed = [part for part in parts if part['error']]
            if failed:
                errors[key] = f"fold {failed[0]['fold']}: {failed[0]['error']}"
                report.record_failure(dataset_name, key, failed[0]['seed'], errors[key])
                continue
            n_rows = sum(len(part['rows']) for part in parts)
            scores[key] = pool_fold_results(parts, n_rows, parts[0]['output_dim'], config.ece_bins)

        report.rows.extend(judge_dataset(
            dataset_name, scores, config.significance_level, errors, order=config.models))
        report.scores[dataset_name] = {key: score.to_dict() for key, score in scores.items()}

    report.tallies = tally(report.rows, config.models)
    report.summary = {'tallies': report.tallies}
    return report


# ============================================================
# DECOMPOSITION
# ============================================================

def _zero_noise(x):
    return np.zeros_like(np.asarray(x, dtype=np.float64))


def run_decompose(config):
    """
    Train the faithful model on clean and noisy targets from identical seeds

    On the sine task the truth is the generator's noise variance; on CSV
    data with replicate groups the clean targets are group means and the
    truth is the within-group variance.
    """
    report = ExperimentReport.start(config)
    variant = roster_variant(FAITHFUL, config.family)

    for seed in config.seeds:
        if config.data:
            name, grid, truth, clean, noisy = _replicate_pair(config)
        else:
            noise_law = _zero_noise if config.decompose_noise == 'zero' else sine_noise_law(config.noise_mode)
            pair = generate_decomposition_pair(seed, noise_law)
            name, clean, noisy = f'decompose-{config.decompose_noise}', pair.clean, pair.noisy
            grid = DECOMPOSE_GRID[:, None]
            truth = noise_law(DECOMPOSE_GRID) ** 2

        transform = fitted_transform(noisy, config)
        spec = config.architecture_spec(noisy.input_dim, noisy.output_dim)
        try:
            clean_fit = fit_family(variant, config, spec, transform.apply(clean), seed)
            noisy_fit = fit_family(variant, config, spec, transform.apply(noisy), seed)
        except HeteroLabError as exc:
            report.record_failure(name, variant.key, seed, exc)
            continue

        features = transform.transform_features(grid)
        _, clean_var = transform.to_raw(clean_fit.distribution(features)).moments()
        _, noisy_var = transform.to_raw(noisy_fit.distribution(features)).moments()
        clean_var, noisy_var = clean_var[:, 0], noisy_var[:, 0]
        recovered = noisy_var - clean_var
        unit = float(transform.y_scale[0] ** 2)

        x = grid[:, 0]
        inside = (x >= INTERIOR[0]) & (x <= INTERIOR[1]) if not config.data else np.ones(x.shape, bool)
        tolerance = 0.05 * unit
        summary = {
            'mean_recovered_variance': float(np.mean(recovered[inside])),
            'max_abs_recovered_standardized': float(np.max(np.abs(recovered[inside])) / unit),
            'clean_below_noisy_fraction': float(np.mean(clean_var[inside] <= noisy_var[inside] + tolerance)),
        }
        if np.any(truth[inside] > 0.0):
            positive = inside & (truth > 0.0)
            summary['relative_error'] = float(
                np.mean(np.abs(recovered[positive] - truth[positive]) / truth[positive]))
        report.summary[f'{name}-{seed}'] = summary
        logger.info('%s seed %s: %s', name, seed, summary)

        curve = f'{name}-{seed}'
        order = np.argsort(x)
        report.add_curve(curve, pd.DataFrame({
            'x': x[order],
            'clean_variance': clean_var[order],
            'noisy_variance': noisy_var[order],
            'recovered_variance': recovered[order],
            'true_noise_variance': truth[order],
        }), PlotSpec(curve, curve, 'x', ('recovered_variance', 'true_noise_variance'),
                     'Recovered vs true noise variance'))
    return report


def _replicate_pair(config):
    noisy = load_csv_dataset(config.data[0], config.targets, config.group_column or None)
    if noisy.groups is None:
        raise ConfigurationError('decomposition on CSV data needs --group-column replicate ids')
    clean_means = noisy.group_means()
    expanded = clean_means.Y[np.searchsorted(clean_means.groups, noisy.groups)]
    clean = noisy.with_targets(expanded)
    residual = noisy.Y[:, 0] - expanded[:, 0]
    labels = np.searchsorted(clean_means.groups, noisy.groups)
    truth = np.array([np.mean(residual[labels == g] ** 2) for g in range(clean_means.n_rows)])
    return noisy.provenance, clean_means.X, truth, clean, noisy


# ============================================================
# FAITHFULNESS VERIFICATION
# ============================================================

def _verification_data(config, seed):
    if config.data:
        dataset = load_csv_dataset(config.data[0], config.targets, config.group_column or None)
    else:
        dataset = generate_sine_dataset(seed, config.noise_mode).dataset
    return fitted_transform(dataset, config).apply(dataset)


def _lockstep(full, twin, loss, dataset, schedule):
    """Step both trainers one epoch at a time; returns (epochs checked, first divergence or None)"""
    for name, array in twin.parameters.items():
        if not bitwise_equal(array, full.parameters[name]):
            return 0, {'epoch': 0, 'parameter': name, 'partition': full.partition_of(name),
                       'max_ulp': max_ulp_distance(array, full.parameters[name])}

    model_trainer = Trainer(full, loss, dataset, schedule)
    twin_trainer = Trainer(twin, LossSpec('sse'), dataset, schedule)
    for epoch in range(1, schedule.epochs + 1):
        try:
            model_trainer.run_epoch()
            twin_trainer.run_epoch()
        except HeteroLabError as exc:
            return epoch - 1, {'epoch': epoch, 'parameter': None, 'partition': None, 'error': str(exc)}
        for name, array in twin.parameters.items():
            reference = full.parameters[name]
            if not bitwise_equal(array, reference):
                return epoch - 1, {
                    'epoch': epoch,
                    'parameter': name,
                    'partition': full.partition_of(name),
                    'max_ulp': max_ulp_distance(array, reference),
                }
    return schedule.epochs, None


def verify_faithfulness(config):
    """
    Machine-readable certificate that (z, mu) of the model trained with
    `config.verify_loss` equals, bit for bit, its mean-only twin trained
    with SSE after every epoch
    """
    loss = resolve_loss(config.verify_loss, config.family)
    runs = []
    for seed in config.seeds:
        dataset = _verification_data(config, seed)
        spec = config.architecture_spec(dataset.input_dim, dataset.output_dim)
        if loss.needs_dof:
            spec = spec.with_dof_head()
        elif not loss.needs_scale:
            spec = spec.mean_only()
        if config.family == 'mc-dropout':
            spec = spec.with_dropout(config.dropout_rate)
        seeds = member_seeds(seed, config.members) if config.family == 'deep-ensemble' else [seed]

        for member, member_seed in enumerate(seeds):
            full = build_model(spec, member_seed)
            twin = full.copy().mean_only_projection()
            schedule = TrainSchedule.convergence(
                epochs=config.total_epochs, batch_size=config.batch_size, seed=member_seed, adam=config.adam)
            checked, divergence = _lockstep(full, twin, loss, dataset, schedule)
            runs.append({'seed': seed, 'member': member, 'checked_epochs': checked, 'divergence': divergence})
            if divergence is None:
                logger.info('seed %s member %d: %d epochs bitwise identical', seed, member, checked)
            else:
                logger.warning('seed %s member %d diverged: %s', seed, member, divergence)

    first = next((run for run in runs if run['divergence'] is not None), None)
    return {
        'loss': str(loss),
        'family': config.family,
        'architecture': config.architecture,
        'epochs': config.total_epochs,
        'seeds': list(config.seeds),
        'partitions': list(MEAN_ONLY_PARTITIONS),
        'passed': first is None,
        'divergent_runs': sum(run['divergence'] is not None for run in runs),
        'divergence': None if first is None else {'seed': first['seed'], 'member': first['member'],
                                                  **first['divergence']},
        'runs': runs,
    }


def require_passed(certificate):
    """Raise VerificationError unless every verified run stayed bitwise identical"""
    if not certificate['passed']:
        raise VerificationError(certificate)
    return certificate


def run_verification(config):
    report = ExperimentReport.start(config)
    report.certificate = verify_faithfulness(config)
    report.summary = {'passed': report.certificate['passed']}
    return report


RUNNERS = {
    'convergence': run_convergence,
    'tabular': run_tabular,
    'decompose': run_decompose,
    'verify-faithful': run_verification,
    'family': run_family,
}


def run_experiment(config):
    logger.info('starting %s experiment (family %s, seeds %s)', config.experiment, config.family, config.seeds)
    return RUNNERS[config.experiment](config)
