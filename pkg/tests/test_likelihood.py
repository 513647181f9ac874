import math
import unittest

from udrfs import likelihood
from udrfs.models import EnumerationLimitError, GridModel


class TestAssociations(unittest.TestCase):

    def test_counts(self):
        # sum over k of C(n, k) * m! / (m - k)!
        self.assertEqual(len(list(likelihood.associations(2, 2))), 7)
        self.assertEqual(len(list(likelihood.associations(0, 3))), 1)
        self.assertEqual(len(list(likelihood.associations(3, 1))), 4)

    def test_injective_on_detections(self):
        for alpha in likelihood.associations(3, 3):
            used = [a for a in alpha if a]
            self.assertEqual(len(used), len(set(used)))

    def test_enumeration_bounds(self):
        with self.assertRaises(EnumerationLimitError):
            likelihood.check_enumeration_bounds(5, 1)


class TestMeasurementDensities(unittest.TestCase):

    def setUp(self):
        self.model = GridModel.random(3, 3, seed=4, clutter_rate=0.9)

    def test_no_targets_is_clutter_only(self):
        Z = (0, 2)
        expected = math.exp(-0.9) * self.model.clutter_intensity(0) * \
            self.model.clutter_intensity(2)
        self.assertAlmostEqual(
            likelihood.standard_meas_density((), Z, self.model), expected,
            places=15)

    def test_single_target(self):
        model = self.model
        p_d = model.detection_probability(1)
        expected = math.exp(-0.9) * (
            (1 - p_d) * model.clutter_intensity(0) +
            p_d * model.likelihood(0, 1))
        self.assertAlmostEqual(
            likelihood.single_target_meas_density((0,), 1, model), expected,
            places=15)

    def test_fstar_needs_enough_measurements(self):
        self.assertEqual(likelihood.fstar((0,), (0, 1), self.model), 0.0)

    def test_standard_density_splits_over_detected_subsets(self):
        model = self.model
        X, Z = (0, 2), (1, 2)
        p = [model.detection_probability(x) for x in X]
        expected = math.fsum([
            (1 - p[0]) * (1 - p[1]) * likelihood.fstar(Z, (), model),
            p[0] * (1 - p[1]) * likelihood.fstar(Z, (0,), model),
            (1 - p[0]) * p[1] * likelihood.fstar(Z, (2,), model),
            p[0] * p[1] * likelihood.fstar(Z, (0, 2), model),
        ])
        self.assertAlmostEqual(
            likelihood.standard_meas_density(X, Z, model), expected,
            places=14)

    def test_fstar_hat_needs_a_bijection(self):
        self.assertEqual(likelihood.fstar_hat((0, 1), (0,), self.model), 0.0)
        self.assertAlmostEqual(
            likelihood.fstar_hat((0, 1), (1, 2), self.model),
            self.model.likelihood(0, 1) * self.model.likelihood(1, 2) +
            self.model.likelihood(1, 1) * self.model.likelihood(0, 2),
            places=15)


class TestTruncation(unittest.TestCase):

    def test_detection_count_distribution(self):
        model = GridModel.random(2, 2, seed=1, p_d=0.5)
        self.assertEqual(likelihood.detection_count_distribution(
            (0, 1), model), [0.25, 0.5, 0.25])

    def test_truncation_mass_tends_to_one(self):
        model = GridModel.random(2, 2, seed=1, clutter_rate=0.3)
        self.assertLess(likelihood.truncation_mass((0, 1), model, 2), 1.0)
        self.assertAlmostEqual(
            likelihood.truncation_mass((0, 1), model, 30), 1.0, places=12)

    def test_measurement_set_integral_of_clutter_density(self):
        model = GridModel.random(2, 2, seed=1, clutter_rate=0.3)
        total = likelihood.measurement_set_integral(
            lambda Z: likelihood.standard_meas_density((), Z, model),
            model, 4)
        self.assertAlmostEqual(
            total, likelihood.truncation_mass((), model, 4), places=14)

    def test_poisson_tail(self):
        self.assertEqual(likelihood.poisson_tail(0.0, 0), 0.0)
        self.assertAlmostEqual(likelihood.poisson_tail(1.0, 0),
                               1.0 - math.exp(-1.0), places=14)


if __name__ == '__main__':
    unittest.main()
