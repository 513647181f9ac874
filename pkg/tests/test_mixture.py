import math
import unittest

import numpy as np

from udrfs.mixture import (GaussianComponent, GaussianMixture, gm_eval,
                           gm_mass, gm_reduce)


def unit(weight, mean):
    return GaussianComponent(weight, mean, np.eye(len(mean)))


class TestGaussianComponent(unittest.TestCase):

    def test_rejects_negative_weight(self):
        with self.assertRaises(ValueError):
            GaussianComponent(-0.1, [0.0], [[1.0]])

    def test_rejects_asymmetric_covariance(self):
        with self.assertRaises(ValueError):
            GaussianComponent(1.0, [0.0, 0.0], [[1.0, 0.5], [0.0, 1.0]])

    def test_rejects_singular_covariance(self):
        with self.assertRaises(ValueError):
            GaussianComponent(1.0, [0.0, 0.0], [[1.0, 1.0], [1.0, 1.0]])

    def test_rejects_shape_mismatch(self):
        with self.assertRaises(ValueError):
            GaussianComponent(1.0, [0.0, 0.0], [[1.0]])

    def test_arrays_are_read_only(self):
        c = unit(1.0, [1.0, 2.0])
        with self.assertRaises(ValueError):
            c.mean[0] = 5.0


class TestGaussianMixture(unittest.TestCase):

    def test_mixed_dimensions_rejected(self):
        with self.assertRaises(ValueError):
            GaussianMixture((unit(1.0, [0.0]), unit(1.0, [0.0, 0.0])))

    def test_empty_mixture(self):
        gm = GaussianMixture()
        self.assertEqual(gm_mass(gm), 0.0)
        self.assertEqual(gm_eval(gm, [1.0, 2.0]), 0.0)
        self.assertIsNone(gm.dim)

    def test_convex_split_evaluates_like_unit_component(self):
        whole = GaussianMixture((unit(1.0, [0.5, -0.5]),))
        split = GaussianMixture((unit(0.3, [0.5, -0.5]),
                                 unit(0.7, [0.5, -0.5])))
        for x in ([0.0, 0.0], [1.0, 2.0], [-3.0, 0.5]):
            self.assertAlmostEqual(gm_eval(whole, x), gm_eval(split, x),
                                   places=14)

    def test_eval_dimension_mismatch(self):
        gm = GaussianMixture((unit(1.0, [0.0, 0.0]),))
        with self.assertRaises(ValueError):
            gm_eval(gm, [0.0])

    def test_scaled_and_added(self):
        a = GaussianMixture((unit(0.5, [0.0]),))
        b = GaussianMixture((unit(0.25, [3.0]),))
        total = a.scaled(2.0) + b
        self.assertEqual(len(total), 2)
        self.assertAlmostEqual(total.mass, 1.25)
        with self.assertRaises(ValueError):
            a.scaled(-1.0)


class TestReduce(unittest.TestCase):

    def test_prunes_and_merges(self):
        gm = GaussianMixture((
            unit(0.6, [0.0, 0.0]),
            unit(0.3, [0.1, 0.0]),
            unit(1e-7, [50.0, 50.0]),
            unit(0.4, [20.0, 0.0]),
        ))

        reduced = gm_reduce(gm, 1e-5, 4.0, 10)

        self.assertEqual(len(reduced), 2)
        self.assertAlmostEqual(reduced.mass, 1.3, places=12)
        merged = reduced[0]
        self.assertAlmostEqual(merged.weight, 0.9, places=12)
        np.testing.assert_allclose(merged.mean, [0.1 / 3.0, 0.0], atol=1e-12)

    def test_merge_preserves_mass_without_pruning(self):
        rng = np.random.default_rng(3)
        gm = GaussianMixture.from_arrays(
            rng.uniform(0.1, 1.0, 6), rng.normal(0.0, 1.0, (6, 2)),
            [np.eye(2)] * 6)

        reduced = gm_reduce(gm, 0.0, 100.0, 100)

        self.assertTrue(math.isclose(reduced.mass, gm.mass, rel_tol=1e-9))

    def test_caps_component_count(self):
        gm = GaussianMixture(tuple(
            unit(0.1 * (i + 1), [10.0 * i]) for i in range(5)))

        reduced = gm_reduce(gm, 0.0, 1.0, 2)

        self.assertEqual(len(reduced), 2)
        np.testing.assert_allclose([c.weight for c in reduced], [0.5, 0.4])

    def test_rejects_negative_thresholds(self):
        with self.assertRaises(ValueError):
            gm_reduce(GaussianMixture(), -1.0, 1.0, 1)


if __name__ == '__main__':
    unittest.main()
