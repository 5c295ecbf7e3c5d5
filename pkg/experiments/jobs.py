# FILE: experiments/jobs.py
# ============================================================
"""
Training jobs shared by every runner

fit_family() trains one roster variant under a model family:
- normal / student: one model
- deep-ensemble: M members, member 0 on the base seed, the others on
  derived seeds; members that fail are dropped with a warning
- mc-dropout: one model trained with dropout, predicted as a mixture
  over M mask seeds

run_fold_job() is one (dataset, seed, fold, model) cross-validation job.
Its payload and result are JSON-compatible so a worker pool can run it.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path

from datasets.io import load_csv_dataset
from datasets.preprocessing import Standardization, kfold_split
from datasets.synthetic import generate_tabular_dataset
from HeteroLab.exceptions import HeteroLabError, TrainingDivergedError
from HeteroLab.utils import derive_seed
from metrics.scores import example_vectors
from networks.partitioned import build_model, predict_moments
from optim.training import train
from predictive.distributions import UniformMixture

from .config import ExperimentConfig
from .roster import roster_variant

logger = logging.getLogger(__name__)


def member_seeds(seed, members):
    return [seed] + [derive_seed(seed, 'member', index) for index in range(1, members)]


@dataclass
class FitOutcome:
    variant: object
    family: str
    results: list
    mask_seeds: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def models(self, epoch=None):
        if epoch is None:
            return [result.model for result in self.results]
        models = []
        for result in self.results:
            model = result.model.copy()
            model.load_state(result.trace.snapshots[epoch])
            models.append(model)
        return models

    def distribution(self, x, epoch=None):
        """Predictive distribution at x (in the units the models were trained in)"""
        models = self.models(epoch)
        if self.family == 'mc-dropout':
            return UniformMixture([
                self.variant.predictive(predict_moments(models[0], x, 'dropout', mask_seed=mask_seed))
                for mask_seed in self.mask_seeds
            ])
        components = [self.variant.predictive(predict_moments(model, x)) for model in models]
        if self.family == 'deep-ensemble':
            return UniformMixture(components)
        return components[0]

    @property
    def stopped_epoch(self):
        return max(result.trace.stopped_epoch for result in self.results)


def _fit_one(variant, spec, dataset, schedule, seed, validation):
    model = build_model(variant.architecture(spec), seed)
    return train(model, variant.loss, dataset, schedule.with_seed(seed), validation=validation)


def fit_family(variant, config, spec, dataset, seed, validation=None, snapshots=()):
    schedule = config.schedule(seed, snapshots)

    if config.family == 'deep-ensemble':
        results, failures = [], []
        for index, member_seed in enumerate(member_seeds(seed, config.members)):
            try:
                results.append(_fit_one(variant, spec, dataset, schedule, member_seed, validation))
            except HeteroLabError as exc:
                logger.warning('%s ensemble member %d failed: %s', variant.key, index, exc)
                failures.append({'member': index, 'error': str(exc)})
        if not results:
            raise TrainingDivergedError(schedule.epochs, f'every {variant.key} ensemble member failed')
        return FitOutcome(variant, config.family, results, failures=failures)

    if config.family == 'mc-dropout':
        spec = spec.with_dropout(config.dropout_rate)
        result = _fit_one(variant, spec, dataset, schedule, seed, validation)
        masks = [derive_seed(seed, 'mc-dropout', index) for index in range(config.members)]
        return FitOutcome(variant, config.family, [result], mask_seeds=masks)

    return FitOutcome(variant, config.family, [_fit_one(variant, spec, dataset, schedule, seed, validation)])


# ============================================================
# CROSS-VALIDATION JOB
# ============================================================

def load_source(source):
    """Rebuild a dataset from its JSON description"""
    if source['kind'] == 'csv':
        return load_csv_dataset(source['path'], source['targets'], source.get('group_column') or None)
    return generate_tabular_dataset(source['seed'], n=source.get('rows', 500)).dataset


def run_fold_job(payload):
    """
    Train one roster model on one training fold and score its held-out fold

    Early stopping monitors the held-out fold itself. Scores are expressed in globally standardized target units whatever
    the standardization mode used for training.
    """
    config = ExperimentConfig.from_dict(payload['config'])
    seed, fold = payload['seed'], payload['fold']
    header = {'dataset': payload['dataset'], 'seed': seed, 'fold': fold, 'model': payload['model']}

    try:
        variant = roster_variant(payload['model'], config.family)
        dataset = load_source(payload['source'])
        plan = kfold_split(dataset.n_rows, config.folds, seed)
        train_rows, test_rows = plan.train_rows(fold), plan.test_rows(fold)
        train_set, test_set = dataset.subset(train_rows), dataset.subset(test_rows)

        reference = Standardization.fit(dataset)
        if config.standardization == 'fold':
            transform = Standardization.fit(train_set)
        elif config.standardization == 'global':
            transform = reference
        else:
            transform = Standardization.identity(dataset.input_dim, dataset.output_dim)

        spec = config.architecture_spec(dataset.input_dim, dataset.output_dim)
        outcome = fit_family(variant, config, spec, transform.apply(train_set), derive_seed(seed, 'fold', fold),
                             validation=transform.apply(test_set))

        dist = outcome.distribution(transform.transform_features(test_set.X))
        shift, scale = transform.relative_to(reference)
        squared, cdf_values, ll = example_vectors(dist.affine(shift, scale),
                                                  reference.transform_targets(test_set.Y))
    except HeteroLabError as exc:
        logger.warning('fold job %s failed: %s', header, exc)
        return {**header, 'error': str(exc)}

    logger.debug('fold job %s done after %d epochs', header, outcome.stopped_epoch)
    return {
        **header,
        'error': None,
        'rows': test_rows.tolist(),
        'output_dim': dataset.output_dim,
        'squared_errors': squared.tolist(),
        'cdf_values': cdf_values.tolist(),
        'll_values': ll.tolist(),
        'epochs': outcome.stopped_epoch,
        'member_failures': outcome.failures,
    }


def tabular_sources(config, paths=None):
    """(name, source, seeds) triples: CSV files under every seed, or one synthetic table per seed"""
    paths = list(paths or config.data)
    if paths:
        return [
            (Path(path).stem, {
                'kind': 'csv', 'path': str(path), 'targets': list(config.targets),
                'group_column': config.group_column,
            }, list(config.seeds))
            for path in paths
        ]
    return [
        (f'synthetic-tabular-{seed}', {'kind': 'synthetic-tabular', 'seed': seed, 'rows': config.tabular_rows}, [seed])
        for seed in config.seeds
    ]
