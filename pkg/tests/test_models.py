import unittest

import numpy as np

from udrfs.models import (DETECTED, UNDETECTED, ClutterModel, FilterConfig,
                          GridModel, MeasurementModel, ModelError,
                          MotionModel, UDState, base_of, clutter_set_density,
                          in_detected, in_undetected, tag_of)


def grid(**overrides):
    values = dict(
        state_points=(0, 1),
        meas_points=(0, 1),
        markov=[[0.9, 0.1], [0.2, 0.8]],
        p_s=[0.9, 0.9],
        p_d=[0.5, 0.8],
        likelihood_table=[[0.7, 0.3], [0.1, 0.9]],
        clutter=ClutterModel(0.5, table=[0.5, 0.5]),
    )
    values.update(overrides)
    return GridModel(**values)


class TestTags(unittest.TestCase):

    def test_ud_state(self):
        state = UDState(np.int64(3), 0)
        self.assertEqual(state.x, 3)
        self.assertIs(state.o, UNDETECTED)
        self.assertFalse(state.detected)
        self.assertEqual(UDState([1.0, 2.0]).x, (1.0, 2.0))

    def test_membership_partitions_tagged_points(self):
        points = [(0, 0), (0, 1), (np.int64(4), 1), UDState(2, 0),
                  UDState([1.0, 2.0], 1)]
        for point in points:
            self.assertEqual(in_detected(point) + in_undetected(point), 1.0)
        self.assertEqual(in_detected(UDState(2, DETECTED)), 1.0)
        self.assertEqual(in_undetected((3, UNDETECTED)), 1.0)

    def test_check_dimension(self):
        UDState([1.0, 2.0]).check_dimension(2)
        with self.assertRaises(ValueError):
            UDState([1.0, 2.0]).check_dimension(3)
        with self.assertRaises(ValueError):
            UDState([1.0]).check_dimension(None)

    def test_tagged_points(self):
        self.assertEqual(tag_of((4, 1)), DETECTED)
        self.assertEqual(base_of((4, 1)), 4)
        self.assertEqual(base_of(UDState(2, 0)), 2)
        self.assertEqual(base_of(4), 4)


class TestContinuousModel(unittest.TestCase):

    def test_probabilities_checked(self):
        with self.assertRaises(ModelError):
            MeasurementModel([[1.0, 0.0]], [[1.0]], 1.5)
        with self.assertRaises(ModelError):
            MotionModel(np.eye(2), np.eye(2), -0.1)

    def test_noise_covariances_checked(self):
        with self.assertRaises(ModelError):
            MeasurementModel([[1.0, 0.0]], [[0.0]], 0.9)
        with self.assertRaises(ModelError):
            MotionModel(np.eye(2), [[1.0, 0.2], [0.0, 1.0]], 0.9)

    def test_clutter_region(self):
        clutter = ClutterModel(2.0, region=[[-10.0, 10.0]])
        self.assertEqual(clutter.volume, 20.0)
        self.assertAlmostEqual(clutter.intensity([3.0]), 0.1)
        self.assertEqual(clutter.intensity([11.0]), 0.0)
        with self.assertRaises(ModelError):
            ClutterModel(1.0, region=[[1.0, -1.0]])
        with self.assertRaises(ModelError):
            ClutterModel(-1.0, region=[[0.0, 1.0]])

    def test_clutter_set_density(self):
        clutter = ClutterModel(2.0, region=[[0.0, 4.0]])
        self.assertAlmostEqual(clutter_set_density(clutter, [[1.0], [2.0]]),
                               np.exp(-2.0) * 0.25)


class TestGridModel(unittest.TestCase):

    def test_rows_renormalized_with_warning(self):
        with self.assertLogs('udrfs', level='WARNING'):
            model = grid(markov=[[0.9, 0.2], [0.2, 0.8]])
        np.testing.assert_allclose(model.markov.sum(axis=1), [1.0, 1.0])

    def test_rejects_zero_row(self):
        with self.assertRaises(ModelError):
            grid(likelihood_table=[[0.0, 0.0], [0.1, 0.9]])

    def test_clutter_table_must_be_positive(self):
        with self.assertRaises(ModelError):
            ClutterModel(0.5, table=[0.0, 1.0])
        with self.assertRaises(ModelError):
            grid(clutter=ClutterModel(0.5, table=[0.2, 0.3, 0.5]))

    def test_pointwise_interface(self):
        model = grid()
        self.assertEqual(model.markov_density(1, 0), 0.1)
        self.assertEqual(model.likelihood(1, 0), 0.3)
        self.assertEqual(model.detection_probability(1), 0.8)
        self.assertEqual(model.clutter_intensity(0), 0.25)
        self.assertEqual(model.n_states, 2)
        np.testing.assert_array_equal(model.birth, [0.0, 0.0])

    def test_aligned_model(self):
        aligned = grid().aligned()
        np.testing.assert_array_equal(aligned.markov, np.eye(2))
        np.testing.assert_array_equal(aligned.p_s, [1.0, 1.0])

    def test_random_model_is_valid(self):
        model = GridModel.random(4, 3, seed=2, birth_rate=0.5)
        np.testing.assert_allclose(model.markov.sum(axis=1), np.ones(4))
        self.assertAlmostEqual(float(model.birth.sum()), 0.5)
        self.assertAlmostEqual(float(model.prior.sum()), 1.0)

    def test_filter_config(self):
        with self.assertRaises(ModelError):
            FilterConfig(initial_tag='x')
        with self.assertRaises(ModelError):
            grid(flag_timing='later')


if __name__ == '__main__':
    unittest.main()
