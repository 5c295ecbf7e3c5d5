# FILE: experiments/tests.py
# ============================================================
"""
Tests for Experiments App

These tests cover:
- Config loading from settings, files and overrides
- Roster variants and loss resolution
- Strike-outs, win/tie flags, tallies and replay
- Report files
- Small end-to-end runs of every experiment
- Management commands and their exit codes
- The read-only runs API
"""

import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

import factory
import numpy as np
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, tag
from django.urls import reverse
from rest_framework import status
from rest_framework.test import APITestCase

from HeteroLab.constants import CONVENTIONAL, FAITHFUL, STUDENT_ROSTER, UNIT_VARIANCE
from HeteroLab.exceptions import ConfigurationError, VerificationError
from HeteroLab.utils import bitwise_equal
from datasets.preprocessing import Standardization, kfold_split
from datasets.synthetic import generate_sine_dataset, generate_tabular_dataset
from metrics.scores import ModelScore, score_model
from predictive.distributions import NormalDiag

from .config import load_experiment_config, read_config_file
from .jobs import fit_family, member_seeds, run_fold_job
from .judging import judge_dataset, replay_report, tally
from .models import ExperimentRun
from .reporting import ExperimentReport, emit_report, json_safe, render_svg
from .roster import resolve_loss, roster_variant
from .runners import require_passed, run_experiment, verify_faithfulness
from .tasks import dispatch

CONFIG_DIR = Path(settings.BASE_DIR) / 'configs'


def quick_config(experiment, **overrides):
    """A configuration small enough for unit tests"""
    options = {'epochs': 3, 'seeds': [0], 'output_dir': tempfile.gettempdir()}
    options.update(overrides)
    return load_experiment_config(None, experiment=experiment, **options)


def toy_scores():
    """Three models on 40 rows: a baseline, a near copy and a clearly worse model"""
    x = np.linspace(-1.0, 1.0, 40)
    y = (x + 0.1 * np.sin(7.0 * x))[:, None]
    mean = x[:, None]
    return {
        UNIT_VARIANCE: score_model(NormalDiag.unit_variance(mean), y),
        FAITHFUL: score_model(NormalDiag(mean, np.full_like(mean, 0.01)), y),
        CONVENTIONAL: score_model(NormalDiag(mean + 0.5, np.full_like(mean, 0.3)), y),
    }


def toy_results():
    """results.json content for the toy scores"""
    scores = toy_scores()
    order = [UNIT_VARIANCE, CONVENTIONAL, FAITHFUL]
    rows = judge_dataset('toy', scores, 0.05, order=order)
    return json_safe({
        'experiment': 'tabular',
        'config': {'significance_level': 0.05, 'models': order, 'family': 'normal', 'seeds': [0]},
        'environment': {},
        'rows': rows,
        'tallies': tally(rows, order),
        'scores': {'toy': {key: score.to_dict() for key, score in scores.items()}},
        'summary': {},
        'certificate': None,
        'failures': [],
    })


class ExperimentRunFactory(factory.django.DjangoModelFactory):
    class Meta:
        model = ExperimentRun

    experiment = 'tabular'
    family = 'normal'
    seeds = '0'
    output_dir = factory.Sequence(lambda n: f'results/run-{n}')
    results = factory.LazyFunction(toy_results)


class ExperimentConfigTest(SimpleTestCase):
    """
    Tests for config loading
    """

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write(self, text):
        path = Path(self.tmp.name) / 'experiment.env'
        path.write_text(text, encoding='utf-8')
        return path

    def test_defaults(self):
        """Settings supply the defaults"""
        config = load_experiment_config(None, experiment='convergence')
        self.assertEqual(config.folds, 10)
        self.assertEqual(config.ece_bins, 10)
        self.assertEqual(config.total_epochs, 20_000)
        self.assertEqual(config.architecture, 'convergence')
        self.assertIn(FAITHFUL, config.models)

    def test_config_file(self):
        """KEY=VALUE files set fields; list keys are comma separated"""
        path = self.write('EXPERIMENT=tabular\nSEEDS=0,1,2\nMODELS=unit-variance,faithful\nFOLDS=5\nBOGUS=1\n')
        config = load_experiment_config(path)
        self.assertEqual(config.seeds, (0, 1, 2))
        self.assertEqual(config.models, (UNIT_VARIANCE, FAITHFUL))
        self.assertEqual(config.folds, 5)
        self.assertEqual(config.architecture, 'uci')

    def test_unknown_keys_ignored(self):
        """Unknown keys are dropped from the file values"""
        values = read_config_file(self.write('EXPERIMENT=tabular\nBOGUS=1\n'))
        self.assertEqual(values, {'experiment': 'tabular'})

    def test_overrides_win(self):
        """Overrides beat the file; None overrides are ignored"""
        path = self.write('EXPERIMENT=tabular\nFOLDS=5\n')
        config = load_experiment_config(path, folds=3, ece_bins=None)
        self.assertEqual(config.folds, 3)
        self.assertEqual(config.ece_bins, 10)

    def test_unknown_model(self):
        """Models outside the family roster are rejected"""
        with self.assertRaises(ConfigurationError):
            load_experiment_config(None, experiment='tabular', family='student', models=['beta-nll-0.5'])

    def test_data_needs_targets(self):
        """CSV data without targets is rejected"""
        with self.assertRaises(ConfigurationError):
            load_experiment_config(None, experiment='tabular', data=['table.csv'])

    def test_bad_verify_loss(self):
        """The verification loss must resolve"""
        with self.assertRaises(ConfigurationError):
            load_experiment_config(None, experiment='verify-faithful', verify_loss='huber')

    def test_missing_file(self):
        """Unreadable config files are configuration errors"""
        with self.assertRaises(ConfigurationError):
            load_experiment_config(Path(self.tmp.name) / 'missing.env')

    def test_student_roster(self):
        """The Student family defaults to its own roster"""
        config = load_experiment_config(None, experiment='convergence', family='student')
        self.assertEqual(config.models, STUDENT_ROSTER)

    def test_tabular_schedule(self):
        """Tabular schedules early-stop with patience capped by the epochs"""
        schedule = quick_config('tabular').schedule(0)
        self.assertEqual(schedule.early_stopping, 'validation-rmse')
        self.assertEqual(schedule.patience, 3)
        self.assertTrue(schedule.restore_best)

    def test_dict_round_trip(self):
        """to_dict / from_dict rebuild the config"""
        config = quick_config('tabular', models=[UNIT_VARIANCE, FAITHFUL])
        self.assertEqual(type(config).from_dict(config.to_dict()), config)


class RosterTest(SimpleTestCase):
    """
    Tests for roster variants
    """

    def test_unit_variance_is_mean_only(self):
        """The unit-variance model trains by SSE without a scale head"""
        variant = roster_variant(UNIT_VARIANCE)
        self.assertTrue(variant.mean_only)
        self.assertEqual(variant.loss.kind, 'sse')

    def test_student_faithful(self):
        """The Student faithful model adds a dof head"""
        variant = roster_variant(FAITHFUL, 'student')
        self.assertEqual(variant.loss.kind, 'faithful-student')
        spec = variant.architecture(quick_config('convergence').architecture_spec(1))
        self.assertTrue(spec.dof_head)

    def test_resolve_loss(self):
        """Roster keys and loss kinds both resolve"""
        self.assertEqual(resolve_loss(CONVENTIONAL).kind, 'gaussian-nll')
        self.assertEqual(resolve_loss('beta-nll(1.0)').beta, 1.0)

    def test_wrappers_use_normal_roster(self):
        """Ensembles and MC dropout wrap the Normal roster"""
        self.assertEqual(roster_variant('beta-nll-0.5', 'deep-ensemble').likelihood, 'normal')


class JudgingTest(SimpleTestCase):
    """
    Tests for strike-outs, win/tie flags and tallies
    """

    def setUp(self):
        self.scores = toy_scores()
        self.rows = {row['model']: row for row in judge_dataset('toy', self.scores)}

    def test_baseline_never_struck(self):
        """A model compared against itself is never struck"""
        self.assertFalse(self.rows[UNIT_VARIANCE]['struck'])
        self.assertEqual(self.rows[UNIT_VARIANCE]['strike_p'], 1.0)

    def test_identical_means_not_struck(self):
        """A model with the baseline's mean predictions is not struck"""
        self.assertFalse(self.rows[FAITHFUL]['struck'])

    def test_worse_model_struck(self):
        """Significantly larger squared errors strike a model"""
        self.assertTrue(self.rows[CONVENTIONAL]['struck'])
        self.assertFalse(self.rows[CONVENTIONAL]['wins']['ece'])
        self.assertFalse(self.rows[CONVENTIONAL]['wins']['ll'])

    def test_ll_winner(self):
        """The sharpest well-placed predictive wins on LL"""
        self.assertTrue(self.rows[FAITHFUL]['wins']['ll'])

    def test_failed_models_struck(self):
        """Failed models are struck and win nothing"""
        rows = judge_dataset('toy', self.scores, errors={'beta-nll-0.5': 'diverged'})
        failed = rows[-1]
        self.assertEqual(failed['model'], 'beta-nll-0.5')
        self.assertTrue(failed['struck'])
        self.assertIsNone(failed['rmse'])
        self.assertFalse(any(failed['wins'].values()))

    def test_baseline_wins_nothing(self):
        """The baseline ties the best RMSE but is not a competitor"""
        self.assertEqual(self.rows[UNIT_VARIANCE]['rmse'], self.rows[FAITHFUL]['rmse'])
        self.assertFalse(any(self.rows[UNIT_VARIANCE]['wins'].values()))
        self.assertTrue(self.rows[FAITHFUL]['wins']['rmse'])

    def test_struck_model_wins_no_rmse(self):
        """A struck model with the lowest competitor RMSE does not win RMSE"""
        rows_n = 40
        cdf_values = (np.arange(rows_n) + 0.5) / rows_n
        ll = np.zeros(rows_n)
        noisy = np.where(np.arange(rows_n) % 2 == 0, 0.0, 2.1)
        scores = {
            UNIT_VARIANCE: ModelScore.from_vectors(np.ones(rows_n), cdf_values, ll),
            CONVENTIONAL: ModelScore.from_vectors(np.full(rows_n, 1.01), cdf_values, ll),
            FAITHFUL: ModelScore.from_vectors(noisy, cdf_values, ll),
        }
        rows = {row['model']: row for row in judge_dataset('toy', scores)}
        self.assertTrue(rows[CONVENTIONAL]['struck'])
        self.assertLess(rows[CONVENTIONAL]['rmse'], rows[FAITHFUL]['rmse'])
        self.assertFalse(rows[FAITHFUL]['struck'])
        self.assertFalse(rows[CONVENTIONAL]['wins']['rmse'])
        self.assertTrue(rows[FAITHFUL]['wins']['rmse'])

    def test_tally(self):
        """Tallies count wins or ties per competing model"""
        rows = list(self.rows.values())
        counts = tally(rows, [UNIT_VARIANCE, FAITHFUL, CONVENTIONAL])
        self.assertNotIn(UNIT_VARIANCE, counts)
        for key in (FAITHFUL, CONVENTIONAL):
            self.assertEqual(counts[key]['total'], sum(self.rows[key]['wins'].values()))
        self.assertEqual(counts[FAITHFUL]['total'], 3)
        self.assertEqual(counts[CONVENTIONAL]['total'], 0)

    def test_replay(self):
        """Replaying a serialized report reproduces rows and tallies"""
        results = toy_results()
        replayed = replay_report(results)
        self.assertEqual(replayed['tallies'], results['tallies'])
        self.assertEqual([row['wins'] for row in replayed['rows']], [row['wins'] for row in results['rows']])


class ReportTest(SimpleTestCase):
    """
    Tests for report files
    """

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.directory = Path(self.tmp.name) / 'out'

    def test_empty_report(self):
        """An empty report still writes valid JSON and a CSV header"""
        report = ExperimentReport.start(quick_config('tabular'))
        emit_report(report, self.directory)
        data = json.loads((self.directory / 'results.json').read_text())
        self.assertEqual(data['rows'], [])
        self.assertEqual(data['environment']['ece_bins'], 10)
        header = (self.directory / 'results.csv').read_text().splitlines()[0]
        self.assertTrue(header.startswith('dataset,model,label,rmse,ece,ll,struck'))

    def test_json_safe(self):
        """Numpy values become plain Python, non-finite floats become null"""
        value = json_safe({'a': np.float64(np.nan), 'b': np.arange(2), 'c': np.bool_(True)})
        self.assertEqual(value, {'a': None, 'b': [0, 1], 'c': True})

    def test_svg(self):
        """Plots are standalone SVG polylines"""
        import pandas as pd
        svg = render_svg(pd.DataFrame({'x': [0.0, 1.0], 'y': [1.0, 2.0]}), 'x', ('y',), 'title')
        self.assertTrue(svg.startswith('<svg'))
        self.assertIn('<polyline', svg)


class FamilyTest(SimpleTestCase):
    """
    Tests for deep-ensemble and MC-dropout wrappers
    """

    def setUp(self):
        self.dataset = generate_sine_dataset(0).dataset.subset(np.arange(0, 500, 10))
        self.x = np.linspace(0.0, 10.0, 7).reshape(-1, 1)

    def fit(self, family, members):
        config = quick_config('family', family=family, members=members)
        variant = roster_variant(FAITHFUL, family)
        return fit_family(variant, config, config.architecture_spec(1), self.dataset, seed=5)

    def test_member_seeds(self):
        """Member 0 keeps the base seed; the others are distinct"""
        seeds = member_seeds(5, 4)
        self.assertEqual(seeds[0], 5)
        self.assertEqual(len(set(seeds)), 4)

    def test_single_member_ensemble_is_plain_model(self):
        """A one-member ensemble predicts bit for bit like the plain model"""
        plain = self.fit('normal', 1).distribution(self.x)
        ensemble = self.fit('deep-ensemble', 1).distribution(self.x)
        self.assertTrue(bitwise_equal(ensemble.log_density(np.zeros((7, 1))), plain.log_density(np.zeros((7, 1)))))

    def test_ensemble_members(self):
        """Ensembles train M members and predict their mixture"""
        outcome = self.fit('deep-ensemble', 3)
        self.assertEqual(len(outcome.results), 3)
        self.assertEqual(outcome.distribution(self.x).size, 3)

    def test_mc_dropout(self):
        """MC dropout trains one model and mixes M mask samples"""
        outcome = self.fit('mc-dropout', 4)
        self.assertEqual(len(outcome.results), 1)
        self.assertEqual(len(outcome.mask_seeds), 4)
        self.assertEqual(outcome.distribution(self.x).size, 4)


class RunnerTest(SimpleTestCase):
    """
    Small end-to-end runs
    """

    def test_verify_faithful_passes(self):
        """The faithful loss keeps (z, mu) bitwise identical to its twin"""
        certificate = verify_faithfulness(quick_config('verify-faithful', epochs=4))
        self.assertTrue(certificate['passed'])
        self.assertIsNone(certificate['divergence'])
        self.assertEqual(certificate['runs'][0]['checked_epochs'], 4)

    def test_verify_conventional_fails(self):
        """The conventional NLL diverges from its twin at epoch 1"""
        certificate = verify_faithfulness(quick_config('verify-faithful', verify_loss=CONVENTIONAL))
        self.assertFalse(certificate['passed'])
        self.assertEqual(certificate['divergence']['epoch'], 1)
        self.assertIn(certificate['divergence']['partition'], ('z', 'mu'))

    def test_require_passed(self):
        """A failed certificate raises VerificationError carrying the certificate"""
        certificate = verify_faithfulness(quick_config('verify-faithful', verify_loss=CONVENTIONAL))
        with self.assertRaises(VerificationError) as ctx:
            require_passed(certificate)
        self.assertIs(ctx.exception.certificate, certificate)
        passed = verify_faithfulness(quick_config('verify-faithful', epochs=2))
        self.assertIs(require_passed(passed), passed)

    def test_verify_student(self):
        """The Student faithful loss passes verification too"""
        certificate = verify_faithfulness(quick_config('verify-faithful', family='student'))
        self.assertTrue(certificate['passed'])
        self.assertEqual(certificate['loss'], 'faithful-student')

    def test_convergence(self):
        """Convergence runs emit curves at every snapshot and isolated-point errors"""
        config = quick_config('convergence', epochs=4, snapshot_every=2, models=[UNIT_VARIANCE, FAITHFUL])
        report = run_experiment(config)
        self.assertEqual(len(report.rows), 2)
        curve = report.curves[f'convergence-{FAITHFUL}-0']
        self.assertIn('mean_2', curve.columns)
        self.assertIn('variance_4', curve.columns)
        self.assertIn('isolated_error_9.5', report.rows[1])
        self.assertIn(f'sine-0/{FAITHFUL}', report.summary)

    def test_tabular(self):
        """Cross-validation never strikes the faithful model and replays exactly"""
        config = quick_config('tabular', folds=2, tabular_rows=40,
                              models=[UNIT_VARIANCE, CONVENTIONAL, FAITHFUL])
        report = run_experiment(config)
        rows = {row['model']: row for row in report.rows}
        self.assertFalse(rows[FAITHFUL]['struck'])
        self.assertEqual(rows[FAITHFUL]['strike_p'], 1.0)
        self.assertEqual(rows[FAITHFUL]['rmse'], rows[UNIT_VARIANCE]['rmse'])

        replayed = replay_report(report.to_dict())
        self.assertEqual(replayed['tallies'], json_safe(report.tallies))

    def test_decompose(self):
        """Decomposition reports recovered noise variance"""
        report = run_experiment(quick_config('decompose'))
        summary = report.summary['decompose-sine-0']
        self.assertIn('relative_error', summary)
        self.assertIn('decompose-sine-0', report.curves)

    def test_decompose_zero_noise(self):
        """With zero noise the true variance is zero everywhere and nothing is recovered"""
        report = run_experiment(quick_config('decompose', decompose_noise='zero'))
        summary = report.summary['decompose-zero-0']
        self.assertNotIn('relative_error', summary)
        self.assertLess(summary['max_abs_recovered_standardized'], 0.05)

    def test_shipped_configs_standardize(self):
        """Every shipped config trains in fold-standardized units"""
        for path in sorted(CONFIG_DIR.glob('*.env')):
            with self.subTest(config=path.name):
                self.assertEqual(read_config_file(path)['standardization'], 'fold')

    def test_family(self):
        """Family runs record how many members trained"""
        report = run_experiment(quick_config('family', family='deep-ensemble', members=2, models=[FAITHFUL]))
        self.assertEqual(report.rows[0]['members_trained'], 2)


@tag('slow')
class AcceptanceTest(SimpleTestCase):
    """
    Full-length runs of the shipped configs against their thresholds
    """

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def shipped(self, name, **overrides):
        return load_experiment_config(CONFIG_DIR / f'{name}.env', output_dir=self.tmp.name, **overrides)

    def test_convergence_isolated_point(self):
        """Faithful and unit-variance reach x=9.5; conventional NLL stays far off"""
        config = self.shipped('convergence', seeds=[1], models=[UNIT_VARIANCE, CONVENTIONAL, FAITHFUL])
        summary = run_experiment(config).summary
        faithful = summary[f'sine-1/{FAITHFUL}']
        self.assertLess(faithful['isolated_error_9.5'], 0.5)
        self.assertLess(summary[f'sine-1/{UNIT_VARIANCE}']['isolated_error_9.5'], 0.5)
        self.assertGreaterEqual(summary[f'sine-1/{CONVENTIONAL}']['isolated_error_9.5'],
                                5.0 * faithful['isolated_error_9.5'])
        self.assertLess(faithful['variance_relative_error'], 0.3)

    def test_decompose_recovers_noise(self):
        """Recovered noise variance tracks the truth on the interior"""
        summary = run_experiment(self.shipped('decompose', seeds=[1])).summary['decompose-sine-1']
        self.assertLess(summary['relative_error'], 0.3)

    def test_tabular_calibration(self):
        """Faithful is never struck and beats conventional NLL on ECE in most replications"""
        config = self.shipped('tabular', folds=5, tabular_rows=200, epochs=2000,
                              models=[UNIT_VARIANCE, CONVENTIONAL, FAITHFUL])
        report = run_experiment(config)
        rows = {}
        for row in report.rows:
            rows.setdefault(row['dataset'], {})[row['model']] = row
        self.assertEqual(len(rows), 10)
        self.assertFalse(any(models[FAITHFUL]['struck'] for models in rows.values()))
        better = sum(models[FAITHFUL]['ece'] < models[CONVENTIONAL]['ece'] for models in rows.values())
        self.assertGreaterEqual(better, 8)

    def test_homoscedastic_ensemble_spread(self):
        """Ensemble spread grows from x=5 to the sparse end at x=10"""
        config = self.shipped('family', members=5, models=[UNIT_VARIANCE])
        summary = run_experiment(config).summary[f'sine-0/{UNIT_VARIANCE}']
        self.assertGreater(summary['variance_at_10'], summary['variance_at_5'])


class JobTest(SimpleTestCase):
    """
    Tests for cross-validation jobs
    """

    def test_missing_csv_reports_error(self):
        """Job failures come back as error results"""
        config = quick_config('tabular', data=['missing.csv'], targets=['y'])
        result = run_fold_job({
            'config': config.to_dict(), 'dataset': 'missing', 'seed': 0, 'fold': 0, 'model': FAITHFUL,
            'source': {'kind': 'csv', 'path': 'missing.csv', 'targets': ['y']},
        })
        self.assertIsNotNone(result['error'])
        self.assertEqual(result['model'], FAITHFUL)

    def test_early_stopping_reads_held_out_fold(self):
        """Training sees the whole training fold; validation is the held-out fold"""
        config = quick_config('tabular', folds=2, tabular_rows=20, epochs=2, standardization='fold')
        dataset = generate_tabular_dataset(0, n=20).dataset
        plan = kfold_split(20, 2, 0)
        transform = Standardization.fit(dataset.subset(plan.train_rows(1)))
        payload = {'config': config.to_dict(), 'dataset': 'synthetic', 'seed': 0, 'fold': 1,
                   'model': FAITHFUL, 'source': {'kind': 'synthetic-tabular', 'seed': 0, 'rows': 20}}

        with mock.patch('experiments.jobs.fit_family', wraps=fit_family) as fit:
            result = run_fold_job(payload)

        self.assertIsNone(result['error'])
        args, kwargs = fit.call_args
        trained, validation = args[3], kwargs['validation']
        expected = transform.apply(dataset.subset(plan.test_rows(1)))
        self.assertEqual(trained.n_rows, len(plan.train_rows(1)))
        np.testing.assert_array_equal(trained.Y, transform.apply(dataset.subset(plan.train_rows(1))).Y)
        np.testing.assert_array_equal(validation.X, expected.X)
        np.testing.assert_array_equal(validation.Y, expected.Y)
        self.assertEqual(result['rows'], plan.test_rows(1).tolist())

    def test_dispatch_keeps_order(self):
        """Eager dispatch returns results in submission order"""
        config = quick_config('tabular', folds=2, tabular_rows=20, epochs=1)
        payloads = [
            {'config': config.to_dict(), 'dataset': 'synthetic', 'seed': 0, 'fold': fold,
             'model': UNIT_VARIANCE, 'source': {'kind': 'synthetic-tabular', 'seed': 0, 'rows': 20}}
            for fold in range(2)
        ]
        results = dispatch(payloads)
        self.assertEqual([result['fold'] for result in results], [0, 1])
        self.assertEqual(sum(len(result['rows']) for result in results), 20)


class CommandTest(TestCase):
    """
    Tests for the management commands
    """

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def test_verify_success(self):
        """verify writes the certificate and reports success"""
        out = StringIO()
        call_command('verify', '--epochs', '2', '--seed', '0', '--out', self.tmp.name, stdout=out)
        data = json.loads((Path(self.tmp.name) / 'results.json').read_text())
        self.assertTrue(data['certificate']['passed'])
        self.assertIn('bitwise identical', out.getvalue())

    def test_verify_failure_exit_code(self):
        """A failed verification exits with code 2"""
        with self.assertRaises(CommandError) as ctx:
            call_command('verify', '--epochs', '2', '--seed', '0', '--loss', CONVENTIONAL,
                         '--out', self.tmp.name, stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn('faithfulness verification failed', str(ctx.exception))

    def test_configuration_error(self):
        """Configuration errors become command errors"""
        with self.assertRaises(CommandError) as ctx:
            call_command('tabular', '--models', 'nonsense', '--out', self.tmp.name, stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 1)

    def test_record(self):
        """--record stores the run"""
        call_command('verify', '--epochs', '1', '--seed', '0', '--out', self.tmp.name, '--record',
                     stdout=StringIO())
        run = ExperimentRun.objects.get()
        self.assertEqual(run.experiment, 'verify-faithful')
        self.assertTrue(run.passed)


class ExperimentRunModelTest(TestCase):
    """
    Tests for ExperimentRun
    """

    def test_record(self):
        """record() stores the report content"""
        report = ExperimentReport.start(quick_config('tabular', seeds=[1, 2]))
        run = ExperimentRun.objects.record(report, 'results/x')
        self.assertEqual(run.seeds, '1,2')
        self.assertIsNone(run.passed)
        self.assertEqual(run.row_count, 0)

    def test_str(self):
        """String form names the experiment and family"""
        run = ExperimentRunFactory()
        self.assertEqual(str(run), f'tabular #{run.pk} (normal)')


class ExperimentRunApiTest(APITestCase):
    """
    Tests for the runs API
    """

    def setUp(self):
        self.run = ExperimentRunFactory()
        ExperimentRunFactory(experiment='convergence', results={'rows': [], 'scores': {}})

    def test_list(self):
        """Runs are listed with their row counts"""
        response = self.client.get(reverse('run-list'))
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['count'], 2)

    def test_filter(self):
        """?experiment= filters the list"""
        response = self.client.get(reverse('run-list'), {'experiment': 'tabular'})
        self.assertEqual(response.data['count'], 1)
        self.assertEqual(response.data['results'][0]['rows'], 3)

    def test_filter_family_and_passed(self):
        """?family= and ?passed= go through the filter backend"""
        verified = ExperimentRunFactory(experiment='verify-faithful', family='student', passed=True,
                                        results={'rows': [], 'scores': {}})
        response = self.client.get(reverse('run-list'), {'family': 'student'})
        self.assertEqual([item['id'] for item in response.data['results']], [verified.pk])
        response = self.client.get(reverse('run-list'), {'passed': 'true'})
        self.assertEqual([item['id'] for item in response.data['results']], [verified.pk])

    def test_search_and_ordering(self):
        """?search= matches the experiment name and ?ordering= sorts the list"""
        response = self.client.get(reverse('run-list'), {'search': 'conver'})
        self.assertEqual(response.data['count'], 1)
        response = self.client.get(reverse('run-list'), {'ordering': 'experiment'})
        self.assertEqual([item['experiment'] for item in response.data['results']], ['convergence', 'tabular'])

    def test_detail(self):
        """Detail returns the stored report"""
        response = self.client.get(reverse('run-detail', args=[self.run.pk]))
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['tallies'], self.run.tallies)

    def test_replay(self):
        """Replay recomputes tallies that match the stored ones"""
        response = self.client.get(reverse('run-replay', args=[self.run.pk]))
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertTrue(response.data['matches_stored'])

    def test_replay_without_scores(self):
        """Runs without score vectors cannot be replayed"""
        other = ExperimentRun.objects.get(experiment='convergence')
        response = self.client.get(reverse('run-replay', args=[other.pk]))
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)

    def test_read_only(self):
        """The API does not accept writes"""
        response = self.client.post(reverse('run-list'), {'experiment': 'tabular'}, format='json')
        self.assertEqual(response.status_code, status.HTTP_405_METHOD_NOT_ALLOWED)
