# FILE: experiments/config.py
# ============================================================
"""
Experiment configuration

Values are merged in three layers, later layers winning:
1. settings.HETEROLAB (environment / .env via python-decouple)
2. an experiment config file: flat KEY=VALUE lines, keys are the upper-cased
   field names (EXPERIMENT=tabular, SEEDS=0,1,2, MODELS=faithful,conventional)
3. command-line flags

ExperimentConfigSerializer validates the merged mapping and produces the
frozen ExperimentConfig used by every runner.
"""

import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from decouple import Csv, RepositoryEnv
from django.conf import settings
from rest_framework import serializers

from datasets.synthetic import NOISE_MODES
from HeteroLab.constants import EXPERIMENTS, FAMILIES
from HeteroLab.exceptions import ConfigurationError
from networks.architecture import PRESETS
from optim.adam import AdamHyperparameters
from optim.training import TrainSchedule

from .roster import default_roster, resolve_loss, roster_variant

logger = logging.getLogger(__name__)

STANDARDIZATION_MODES = ('fold', 'global', 'none')
DECOMPOSE_NOISE = ('sine', 'zero')

DEFAULT_EPOCHS = {
    'convergence': 20_000,
    'tabular': 60_000,
    'decompose': 20_000,
    'verify-faithful': 2_000,
    'family': 20_000,
}

LIST_FIELDS = ('models', 'seeds', 'data', 'targets')


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    family: str = 'normal'
    models: tuple = ()
    architecture: str = 'convergence'
    epochs: int = None
    batch_size: int = 0
    patience: int = None
    snapshot_every: int = 2000
    seeds: tuple = (0,)
    folds: int = 10
    members: int = 10
    ece_bins: int = 10
    dropout_rate: float = 0.1
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-7
    output_dir: str = 'results'
    noise_mode: str = 'std'
    standardization: str = 'fold'
    significance_level: float = 0.05
    data: tuple = ()
    targets: tuple = ()
    group_column: str = ''
    verify_loss: str = 'faithful'
    decompose_noise: str = 'sine'
    tabular_rows: int = 500
    extra: dict = field(default_factory=dict)

    @property
    def adam(self):
        return AdamHyperparameters(self.learning_rate, self.adam_beta1, self.adam_beta2, self.adam_epsilon)

    @property
    def total_epochs(self):
        return DEFAULT_EPOCHS[self.experiment] if self.epochs is None else self.epochs

    def schedule(self, seed, snapshots=()):
        """Convergence-style full-batch schedule, or the early-stopped tabular schedule"""
        options = {
            'epochs': self.total_epochs,
            'batch_size': self.batch_size,
            'seed': seed,
            'adam': self.adam,
            'snapshot_epochs': tuple(snapshots),
        }
        if self.experiment == 'tabular':
            if self.patience is not None:
                options['patience'] = min(self.patience, options['epochs'])
            else:
                options['patience'] = min(100, options['epochs'])
            return TrainSchedule.uci(**options)
        return TrainSchedule.convergence(**options)

    def architecture_spec(self, input_dim, output_dim=1):
        return PRESETS[self.architecture](input_dim, output_dim)

    def variants(self):
        return [roster_variant(key, self.family) for key in self.models]

    def to_dict(self):
        data = asdict(self)
        for name in LIST_FIELDS:
            data[name] = list(data[name])
        return data

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        values = {key: value for key, value in data.items() if key in known}
        for name in LIST_FIELDS:
            if name in values:
                values[name] = tuple(values[name])
        return cls(**values)


class ExperimentConfigSerializer(serializers.Serializer):
    """
    Validates a merged experiment configuration

    Validates:
    - Experiment, family, architecture and noise choices
    - Every listed model belongs to the family roster
    - Seeds list is nonempty
    - Tabular runs on CSV data name their target columns
    - The verification loss resolves to a loss kind
    """
    experiment = serializers.ChoiceField(choices=EXPERIMENTS)
    family = serializers.ChoiceField(choices=FAMILIES, default='normal')
    models = serializers.ListField(child=serializers.CharField(), required=False)
    architecture = serializers.ChoiceField(choices=tuple(PRESETS), required=False)
    epochs = serializers.IntegerField(min_value=0, required=False, allow_null=True)
    batch_size = serializers.IntegerField(min_value=0, default=0)
    patience = serializers.IntegerField(min_value=0, required=False, allow_null=True)
    snapshot_every = serializers.IntegerField(min_value=1, default=2000)
    seeds = serializers.ListField(child=serializers.IntegerField(min_value=0), min_length=1)
    folds = serializers.IntegerField(min_value=2)
    members = serializers.IntegerField(min_value=1)
    ece_bins = serializers.IntegerField(min_value=2)
    dropout_rate = serializers.FloatField(min_value=0.0, max_value=0.95)
    learning_rate = serializers.FloatField(min_value=0.0)
    adam_beta1 = serializers.FloatField(min_value=0.0, max_value=1.0)
    adam_beta2 = serializers.FloatField(min_value=0.0, max_value=1.0)
    adam_epsilon = serializers.FloatField(min_value=0.0)
    output_dir = serializers.CharField()
    noise_mode = serializers.ChoiceField(choices=NOISE_MODES)
    standardization = serializers.ChoiceField(choices=STANDARDIZATION_MODES)
    significance_level = serializers.FloatField(min_value=0.0, max_value=1.0)
    data = serializers.ListField(child=serializers.CharField(), default=list)
    targets = serializers.ListField(child=serializers.CharField(), default=list)
    group_column = serializers.CharField(allow_blank=True, default='')
    verify_loss = serializers.CharField(default='faithful')
    decompose_noise = serializers.ChoiceField(choices=DECOMPOSE_NOISE, default='sine')
    tabular_rows = serializers.IntegerField(min_value=10, default=500)

    def validate_learning_rate(self, value):
        if value <= 0.0:
            raise serializers.ValidationError('learning rate must be positive')
        return value

    def validate(self, attrs):
        family = attrs.get('family', 'normal')
        models = attrs.get('models') or list(default_roster(family))
        for key in models:
            try:
                roster_variant(key, family)
            except ConfigurationError as exc:
                raise serializers.ValidationError({'models': str(exc)})
        attrs['models'] = models

        if 'architecture' not in attrs:
            attrs['architecture'] = 'uci' if attrs['experiment'] == 'tabular' else 'convergence'

        if attrs.get('data') and not attrs.get('targets'):
            raise serializers.ValidationError({'targets': 'CSV datasets need --targets'})

        try:
            resolve_loss(attrs.get('verify_loss', 'faithful'), family)
        except ConfigurationError as exc:
            raise serializers.ValidationError({'verify_loss': str(exc)})
        return attrs

    def to_config(self):
        return ExperimentConfig.from_dict(self.validated_data)


# ============================================================
# LOADING
# ============================================================

def settings_defaults():
    defaults = settings.HETEROLAB
    return {
        'seeds': list(defaults['SEEDS']),
        'folds': defaults['FOLDS'],
        'members': defaults['MEMBERS'],
        'ece_bins': defaults['ECE_BINS'],
        'dropout_rate': defaults['DROPOUT_RATE'],
        'learning_rate': defaults['LEARNING_RATE'],
        'adam_beta1': defaults['ADAM_BETA1'],
        'adam_beta2': defaults['ADAM_BETA2'],
        'adam_epsilon': defaults['ADAM_EPSILON'],
        'output_dir': str(defaults['OUTPUT_DIR']),
        'noise_mode': defaults['NOISE_MODE'],
        'standardization': defaults['STANDARDIZATION'],
        'significance_level': defaults['SIGNIFICANCE_LEVEL'],
    }


def read_config_file(path):
    """Read KEY=VALUE lines; list-valued keys are comma separated"""
    path = Path(path)
    try:
        repository = RepositoryEnv(str(path))
    except OSError as exc:
        raise ConfigurationError(f'cannot read config file {path}: {exc}') from exc

    values = {}
    entries = repository.data
    for name in ExperimentConfigSerializer().fields:
        key = name.upper()
        if key not in entries:
            continue
        raw = entries[key]
        values[name] = Csv()(raw) if name in LIST_FIELDS else raw
    unknown = set(entries) - {name.upper() for name in ExperimentConfigSerializer().fields}
    if unknown:
        logger.warning('ignoring unknown keys in %s: %s', path, ', '.join(sorted(unknown)))
    return values


def load_experiment_config(path=None, **overrides):
    """
    Merge defaults, an optional config file and overrides into an ExperimentConfig

    Overrides whose value is None are ignored.
    """
    values = settings_defaults()
    if path:
        values.update(read_config_file(path))
    values.update({key: value for key, value in overrides.items() if value is not None})

    serializer = ExperimentConfigSerializer(data=values)
    if not serializer.is_valid():
        raise ConfigurationError(f'invalid experiment configuration: {serializer.errors}')
    config = serializer.to_config()
    logger.debug('experiment config: %s', config)
    return config
