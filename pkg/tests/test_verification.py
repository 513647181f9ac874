import unittest
from unittest import mock

from udrfs import transition, verification


class TestRegistry(unittest.TestCase):

    def test_manifest_has_no_gaps(self):
        manifest = verification.load_manifest()

        self.assertEqual(sorted(manifest.values()),
                         sorted(verification.CASES))
        for name, case in verification.CASES.items():
            self.assertEqual(manifest[case.identity], name)

    def test_every_case_names_its_equation(self):
        equations = [case.equation for case in verification.CASES.values()]
        self.assertTrue(all(equations))
        self.assertEqual(len(set(equations)), len(equations))

    def test_unknown_case(self):
        with self.assertRaises(KeyError):
            verification.run_cases(['no-such-case'])

    def test_worker_count_from_environment(self):
        with mock.patch.dict('os.environ', {'UDRFS_THREADS': '3'}):
            self.assertEqual(verification.worker_count(), 3)
        with mock.patch.dict('os.environ', {'UDRFS_THREADS': '0'}):
            self.assertEqual(verification.worker_count(), 1)


class TestCases(unittest.TestCase):

    def test_every_case_passes(self):
        for name, case in verification.CASES.items():
            with self.subTest(case=name):
                result = case().run()
                self.assertNotIn('error', result)
                self.assertEqual(result['equation'], case.equation)
                self.assertTrue(result['pass'], result)
                self.assertLessEqual(result['max_abs_error'],
                                     result['tolerance'])

    def test_report_counts(self):
        report = verification.run_cases(
            ['nud-normalization', 'fstar-subset-sum'])
        self.assertEqual(report['passed'], 2)
        self.assertEqual(report['failed'], 0)
        self.assertEqual([c['name'] for c in report['cases']],
                         ['nud-normalization', 'fstar-subset-sum'])


class TestFaultInjection(unittest.TestCase):

    def test_perturbed_transition_fails_normalization(self):
        eps = 1e-6
        original = transition.nud_jtf

        def perturbed(*args):
            return original(*args) * (1.0 + eps)

        with mock.patch.object(transition, 'nud_jtf', side_effect=perturbed):
            result = verification.CASES['nud-normalization']().run()

        self.assertFalse(result['pass'])
        self.assertAlmostEqual(result['max_abs_error'], eps, delta=1e-9)

    def test_exception_is_reported_as_failure(self):
        with mock.patch.object(transition, 'nud_jtf',
                               side_effect=ValueError('boom')):
            result = verification.CASES['nud-normalization']().run()

        self.assertFalse(result['pass'])
        self.assertIsNone(result['max_abs_error'])
        self.assertEqual(result['error'], 'boom')


if __name__ == '__main__':
    unittest.main()
