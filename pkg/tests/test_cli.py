import csv
import json
import os
import shutil
import tempfile
import unittest

from udrfs import cli, verification

SAMPLES = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..')
SCENARIO = os.path.join(SAMPLES, 'sample_scenario.json')
FINITE_SCENARIO = os.path.join(SAMPLES, 'sample_finite_scenario.json')
OUTPUTS = ['truth.jsonl', 'measurements.jsonl', 'tracks.csv', 'report.json']
BASELINES = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                         'baselines')
CORRIDOR = os.path.join(BASELINES, 'corridor_scenario.json')
CORRIDOR_MEASUREMENTS = os.path.join(BASELINES,
                                     'corridor_measurements.jsonl')
CORRIDOR_TRACKS = os.path.join(BASELINES, 'corridor_dud_tracks.csv')


def read_rows(path):
    with open(path, newline='') as f:
        return list(csv.DictReader(f))


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def path(self, *parts):
        return os.path.join(self.tmp, *parts)

    def write_scenario(self, document):
        path = self.path('scenario.json')
        with open(path, 'w') as f:
            json.dump(document, f)
        return path


class TestRun(CliTestCase):

    def test_outputs_are_byte_identical(self):
        for out in ('a', 'b'):
            self.assertEqual(cli(['run', '--scenario', SCENARIO, '--filter',
                                  'dud', '--out', self.path(out)]), 0)
        for name in OUTPUTS:
            with open(self.path('a', name), 'rb') as a, \
                    open(self.path('b', name), 'rb') as b:
                self.assertEqual(a.read(), b.read(), name)

    def test_standard_filter_writes_one_row_per_step(self):
        self.assertEqual(cli(['run', '--scenario', SCENARIO, '--filter',
                              'standard', '--out', self.path('out')]), 0)
        rows = read_rows(self.path('out', 'tracks.csv'))
        self.assertEqual([int(r['k']) for r in rows], list(range(1, 11)))
        self.assertTrue(all(r['tag'] == 'all' for r in rows))
        with open(self.path('out', 'report.json')) as f:
            report = json.load(f)
        self.assertEqual(len(report['steps']), 10)
        self.assertNotIn('timing', report)

    def test_timing_is_opt_in(self):
        self.assertEqual(cli(['run', '--scenario', SCENARIO, '--filter',
                              'sud', '--out', self.path('out'),
                              '--timing']), 0)
        with open(self.path('out', 'report.json')) as f:
            self.assertIn('timing', json.load(f))

    def test_seed_override(self):
        self.assertEqual(cli(['run', '--scenario', SCENARIO, '--filter',
                              'standard', '--out', self.path('out'),
                              '--seed', '7']), 0)
        with open(self.path('out', 'report.json')) as f:
            self.assertEqual(json.load(f)['seed'], 7)

    def test_dud_tracks_detected_count_on_reference_seed(self):
        self.assertEqual(cli(['run', '--scenario', SCENARIO, '--filter',
                              'dud', '--out', self.path('out')]), 0)
        with open(self.path('out', 'report.json')) as f:
            final = json.load(f)['steps'][-1]
        self.assertLessEqual(
            abs(final['estimated_detected'] - final['true_detected']), 1)
        rows = read_rows(self.path('out', 'tracks.csv'))
        self.assertEqual({r['tag'] for r in rows}, {'d', 'u'})

    def test_every_continuous_filter_runs(self):
        expected_tags = {'sud': {'all', 'd', 'u'}, 'bernoulli': {'all'},
                         'dud-bernoulli': {'d', 'u'}}
        for name, tags in expected_tags.items():
            with self.subTest(filter=name):
                self.assertEqual(cli(['run', '--scenario', SCENARIO,
                                      '--filter', name, '--out',
                                      self.path(name)]), 0)
                rows = read_rows(self.path(name, 'tracks.csv'))
                self.assertEqual({r['tag'] for r in rows}, tags)

    def test_grid_filter_on_finite_scenario(self):
        self.assertEqual(cli(['run', '--scenario', FINITE_SCENARIO,
                              '--filter', 'grid-dud', '--out',
                              self.path('out')]), 0)
        with open(self.path('out', 'report.json')) as f:
            steps = json.load(f)['steps']
        self.assertEqual(len(steps), 6)
        for step in steps:
            self.assertEqual(step['true_count'], 1)
            self.assertGreater(step['normalizer'], 0.0)

    def test_grid_filter_needs_finite_scenario(self):
        self.assertEqual(cli(['run', '--scenario', SCENARIO, '--filter',
                              'grid-dud', '--out', self.path('out')]), 2)

    def test_malformed_scenario(self):
        with open(SCENARIO) as f:
            document = json.load(f)
        del document['R']
        path = self.write_scenario(document)
        self.assertEqual(cli(['run', '--scenario', path, '--filter', 'dud',
                              '--out', self.path('out')]), 2)

    def test_unknown_filter(self):
        with self.assertRaises(SystemExit) as raised:
            cli(['run', '--scenario', SCENARIO, '--filter', 'magic',
                 '--out', self.path('out')])
        self.assertEqual(raised.exception.code, 2)


class TestSuppliedMeasurements(CliTestCase):

    def run_corridor(self, measurements, filter_name='dud'):
        return cli(['run', '--scenario', CORRIDOR, '--filter', filter_name,
                    '--measurements', measurements, '--out',
                    self.path('out')])

    def write_stream(self, lines):
        path = self.path('stream.jsonl')
        with open(path, 'w') as f:
            for line in lines:
                f.write(json.dumps(line) + '\n')
        return path

    def test_dud_tracks_match_frozen_baseline(self):
        self.assertEqual(self.run_corridor(CORRIDOR_MEASUREMENTS), 0)
        with open(self.path('out', 'tracks.csv'), 'rb') as produced, \
                open(CORRIDOR_TRACKS, 'rb') as frozen:
            self.assertEqual(produced.read(), frozen.read())

    def test_supplied_stream_is_filtered_without_truth(self):
        self.assertEqual(self.run_corridor(CORRIDOR_MEASUREMENTS), 0)
        self.assertFalse(os.path.exists(self.path('out', 'truth.jsonl')))
        with open(self.path('out', 'report.json')) as f:
            steps = json.load(f)['steps']
        self.assertEqual([s['k'] for s in steps], [1, 2, 3])
        self.assertTrue(all(s['true_count'] is None for s in steps))
        self.assertEqual([s['estimated_count'] for s in steps], [3, 2, 2])
        with open(self.path('out', 'measurements.jsonl')) as f:
            records = [json.loads(line) for line in f]
        self.assertEqual([r['measurements'] for r in records],
                         [[[0.0]], [], [[0.0]]])

    def test_rerun_on_written_stream_reproduces_tracks(self):
        self.assertEqual(cli(['run', '--scenario', SCENARIO, '--filter',
                              'dud', '--out', self.path('a')]), 0)
        self.assertEqual(cli(['run', '--scenario', SCENARIO, '--filter',
                              'dud', '--measurements',
                              self.path('a', 'measurements.jsonl'),
                              '--out', self.path('b')]), 0)
        for name in ('measurements.jsonl', 'tracks.csv'):
            with open(self.path('a', name), 'rb') as a, \
                    open(self.path('b', name), 'rb') as b:
                self.assertEqual(a.read(), b.read(), name)

    def test_out_of_order_records(self):
        path = self.write_stream([{'k': 2, 'measurements': []}])
        self.assertEqual(self.run_corridor(path), 2)

    def test_measurement_outside_grid(self):
        path = self.write_stream([{'k': 1, 'measurements': [[5.0]]}])
        self.assertEqual(self.run_corridor(path), 2)

    def test_malformed_line(self):
        path = self.path('stream.jsonl')
        with open(path, 'w') as f:
            f.write('{"k": 1, "measurements": \n')
        self.assertEqual(self.run_corridor(path), 2)

    def test_missing_stream(self):
        self.assertEqual(self.run_corridor(self.path('absent.jsonl')), 2)


class TestPosteriorDump(CliTestCase):

    def test_grid_filter_writes_tagged_posterior(self):
        self.assertEqual(cli(['run', '--scenario', FINITE_SCENARIO,
                              '--filter', 'grid-dud', '--out',
                              self.path('out')]), 0)
        rows = read_rows(self.path('out', 'posterior.csv'))
        self.assertEqual(list(rows[0]), ['k', 'point', 'o', 'mass'])
        self.assertEqual(len(rows), 6 * 5 * 2)
        self.assertEqual({r['point'] for r in rows},
                         {'c0', 'c1', 'c2', 'c3', 'c4'})
        for k in range(1, 7):
            masses = [float(r['mass']) for r in rows if int(r['k']) == k]
            self.assertAlmostEqual(sum(masses), 1.0, places=12)

    def test_supplied_scans_reach_the_posterior(self):
        path = self.path('stream.jsonl')
        with open(path, 'w') as f:
            f.write('{"k": 1, "measurements": [[1.0]], "origins": []}\n')
        self.assertEqual(cli(['run', '--scenario', FINITE_SCENARIO,
                              '--filter', 'grid-dud', '--measurements', path,
                              '--out', self.path('out')]), 0)
        rows = read_rows(self.path('out', 'posterior.csv'))
        self.assertEqual(len(rows), 5 * 2)
        # a detection commits every target to D
        self.assertTrue(all(float(r['mass']) == 0.0
                            for r in rows if r['o'] == '0'))

    def test_intensity_filters_write_no_posterior(self):
        self.assertEqual(cli(['run', '--scenario', SCENARIO, '--filter',
                              'dud', '--out', self.path('out')]), 0)
        self.assertFalse(os.path.exists(self.path('out', 'posterior.csv')))


class TestCompare(CliTestCase):

    def test_pd_sweep(self):
        out = self.path('compare.csv')
        self.assertEqual(cli(['compare', '--scenario', SCENARIO, '--filters',
                              'standard,dud', '--pd-sweep', '0.5,0.7,0.9',
                              '--out', out]), 0)
        rows = read_rows(out)
        self.assertEqual(len(rows), 6)
        self.assertEqual([r['filter'] for r in rows],
                         ['standard', 'dud'] * 3)
        self.assertEqual([float(r['p_d']) for r in rows],
                         [0.5, 0.5, 0.7, 0.7, 0.9, 0.9])
        self.assertEqual(rows[0]['mean_tag_error'], '')
        self.assertNotEqual(rows[1]['mean_tag_error'], '')

    def test_needs_two_filters(self):
        self.assertEqual(cli(['compare', '--scenario', SCENARIO, '--filters',
                              'dud', '--out', self.path('compare.csv')]), 2)

    def test_unknown_filter(self):
        self.assertEqual(cli(['compare', '--scenario', SCENARIO, '--filters',
                              'dud,magic', '--out',
                              self.path('compare.csv')]), 2)


class TestVerify(CliTestCase):

    def test_single_case(self):
        out = self.path('verify.json')
        self.assertEqual(cli(['verify', '--case', 'nud-compact-form',
                              '--json', out]), 0)
        with open(out) as f:
            report = json.load(f)
        self.assertEqual(report['passed'], 1)
        self.assertEqual(report['cases'][0]['identity'],
                         'nud-jtf-compact-form')
        self.assertEqual(
            report['cases'][0]['equation'],
            verification.CASES['nud-compact-form'].equation)
        self.assertIn('delta(o, 1)', report['cases'][0]['equation'])

    def test_unknown_case(self):
        self.assertEqual(cli(['verify', '--case', 'no-such-case']), 2)


if __name__ == '__main__':
    unittest.main()
