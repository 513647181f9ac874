import unittest

import numpy as np

from udrfs import oracle
from udrfs.finite import FiniteSetDensity, TestFunction, censor, tag_marginal
from udrfs.models import (GridModel, ImpossibleMeasurementError, ModelError,
                          UNDETECTED, in_detected)
from udrfs.verification import random_density


class TestStaticSplit(unittest.TestCase):

    def setUp(self):
        self.model = GridModel.random(3, 2, seed=5, clutter_rate=0.5)
        self.prior = random_density(oracle.state_space(self.model, 2),
                                    np.random.default_rng(5))

    def test_posteriors_are_probability_densities(self):
        post = oracle.sud_posteriors(self.prior, (0, 1), self.model)
        for density in (post.total, post.detected, post.undetected):
            self.assertAlmostEqual(density.mass(), 1.0, places=12)
        self.assertGreater(post.normalizer, 0.0)

    def test_total_matches_bayes(self):
        post = oracle.sud_posteriors(self.prior, (1,), self.model)
        bayes = oracle.bayes_posterior(self.prior, (1,), self.model)
        self.assertLess(post.total.max_abs_difference(bayes), 1e-12)

    def test_undetected_is_tagged_censoring(self):
        post = oracle.sud_posteriors(self.prior, (0,), self.model)
        tagged = oracle.tagged_bayes_posterior(self.prior, (0,), self.model)
        expected = tag_marginal(censor(tagged, tagged.space.undetected()),
                                self.prior.space)
        self.assertLess(post.undetected.max_abs_difference(expected), 1e-12)

    def test_no_detection_possible_without_measurements(self):
        post = oracle.sud_posteriors(self.prior, (), self.model)
        self.assertAlmostEqual(post.detected(frozenset()), 1.0, places=12)

    def test_certain_detection_leaves_no_undetected_targets(self):
        model = self.model.with_detection_probability(1.0)
        post = oracle.sud_posteriors(self.prior, (0, 1), model)
        self.assertAlmostEqual(post.undetected(frozenset()), 1.0, places=12)
        self.assertAlmostEqual(post.undetected.mass(), 1.0, places=12)

    def test_blind_sensor_leaves_prior_undetected(self):
        model = self.model.with_detection_probability(0.0)
        post = oracle.sud_posteriors(self.prior, (1,), model)
        self.assertAlmostEqual(post.detected(frozenset()), 1.0, places=12)
        self.assertLess(post.undetected.max_abs_difference(self.prior),
                        1e-12)
        self.assertLess(post.total.max_abs_difference(self.prior), 1e-12)

    def test_cap_below_measurement_count(self):
        prior = random_density(oracle.state_space(self.model, 1),
                               np.random.default_rng(1))
        with self.assertRaises(ValueError):
            oracle.sud_posteriors(prior, (0, 1), self.model)

    def test_impossible_measurement(self):
        model = GridModel.random(2, 2, seed=3, clutter_rate=0.0)
        space = oracle.state_space(model)
        empty_only = FiniteSetDensity(space, {frozenset(): 1.0},
                                      probability=True)
        with self.assertRaises(ImpossibleMeasurementError):
            oracle.sud_posteriors(empty_only, (0,), model)
        with self.assertRaises(ImpossibleMeasurementError):
            oracle.bayes_posterior(empty_only, (0,), model)


class TestDynamicSplit(unittest.TestCase):

    def setUp(self):
        self.model = GridModel.random(2, 2, seed=6, clutter_rate=0.4) \
            .aligned()
        self.prior = random_density(oracle.tagged_state_space(self.model),
                                    np.random.default_rng(6))

    def test_total_matches_aligned_transition(self):
        post = oracle.dud_posteriors(self.prior, (0,), self.model)
        aligned = oracle.aligned_dud_posterior(self.prior, (0,), self.model)
        self.assertLess(post.total.max_abs_difference(aligned), 1e-12)

    def test_detected_and_undetected_are_censorings(self):
        post = oracle.dud_posteriors(self.prior, (1,), self.model)
        space = self.prior.space
        self.assertLess(post.detected.max_abs_difference(
            censor(post.total, space.detected())), 1e-12)
        self.assertLess(post.undetected.max_abs_difference(
            censor(post.total, space.undetected())), 1e-12)


    def test_certain_detection_commits_undetected_prior_to_d(self):
        model = self.model.with_detection_probability(1.0)
        space = self.prior.space
        prior = FiniteSetDensity(space, {
            frozenset(): 0.1,
            frozenset({(0, 0)}): 0.2,
            frozenset({(1, 0)}): 0.3,
            frozenset({(0, 0), (1, 0)}): 0.4,
        }, probability=True)
        post = oracle.dud_posteriors(prior, (0, 1), model)
        self.assertAlmostEqual(post.total.mass(), 1.0, places=12)
        for X, value in post.total.items():
            if value > 1e-12:
                self.assertTrue(all(in_detected(p) for p in X), X)
        self.assertAlmostEqual(post.undetected(frozenset()), 1.0, places=12)

    def test_needs_tagged_prior(self):
        prior = random_density(oracle.state_space(self.model),
                               np.random.default_rng(0))
        with self.assertRaises(ValueError):
            oracle.dud_posteriors(prior, (), self.model)


class TestParallelism(unittest.TestCase):

    def test_poisson_undetected_is_thinned_poisson(self):
        model = GridModel.random(3, 2, seed=7, clutter_rate=0.6)
        report = oracle.parallelism_checks(model, 'poisson', Z=(0, 1))
        self.assertEqual(list(report.identities), ['poisson-undetected'])
        self.assertLess(report.max_abs_error, 1e-12)

    def test_bernoulli_closed_forms(self):
        model = GridModel.random(3, 2, seed=8, clutter_rate=0.6)
        report = oracle.parallelism_checks(model, 'bernoulli', Z=(1,))
        self.assertEqual(sorted(report.identities), [
            'bernoulli-density-route', 'bernoulli-total',
            'bernoulli-undetected'])
        self.assertLess(report.max_abs_error, 1e-12)

    def test_detection_probability_extremes(self):
        for p_d in (0.0, 1.0):
            model = GridModel.random(3, 2, seed=9, clutter_rate=0.6) \
                .with_detection_probability(p_d)
            for family in ('poisson', 'bernoulli'):
                with self.subTest(p_d=p_d, family=family):
                    report = oracle.parallelism_checks(model, family,
                                                       Z=(0,))
                    self.assertLess(report.max_abs_error, 1e-12)

    def test_bernoulli_needs_clutter(self):
        model = GridModel.random(3, 2, seed=8, clutter_rate=0.0)
        with self.assertRaises(ModelError):
            oracle.parallelism_checks(model, 'bernoulli', Z=(1,))

    def test_unknown_family(self):
        model = GridModel.random(3, 2, seed=8)
        with self.assertRaises(ValueError):
            oracle.parallelism_checks(model, 'binomial')


class TestSingleTarget(unittest.TestCase):

    def test_trajectory_posterior_without_measurements_stays_undetected(self):
        model = GridModel.random(3, 2, seed=12, clutter_rate=0.0)
        prior = np.zeros((3, 2))
        prior[:, int(UNDETECTED)] = 1.0 / 3.0
        posterior = oracle.trajectory_posterior(prior, [(), ()], model)
        self.assertAlmostEqual(posterior.sum(), 1.0, places=14)
        self.assertEqual(posterior[:, 1].sum(), 0.0)

    def test_predict_density_rejects_births(self):
        model = GridModel.random(3, 2, seed=12, birth_rate=0.2)
        prior = random_density(oracle.state_space(model, 1),
                               np.random.default_rng(12))
        with self.assertRaises(ValueError):
            oracle.predict_density(prior, model)

    def test_predict_density_preserves_mass(self):
        model = GridModel.random(3, 2, seed=12)
        prior = random_density(oracle.state_space(model, 1),
                               np.random.default_rng(12))
        predicted = oracle.predict_density(prior, model)
        self.assertAlmostEqual(predicted.mass(), 1.0, places=12)
        np.testing.assert_allclose(
            oracle.first_moment(predicted, 3),
            oracle.predicted_first_moment(prior, model), atol=1e-14)

    def test_pgfl_classes_agree_on_densities(self):
        model = GridModel.random(3, 2, seed=12)
        space = oracle.state_space(model)
        spatial = {0: 0.2, 1: 0.5, 2: 0.3}
        pgfl = oracle.BernoulliPGFL(space, 0.4, spatial)
        density = oracle.DensityPGFL(
            oracle.bernoulli_density(space, 0.4, spatial))
        h = TestFunction(space, {0: 0.3, 1: 0.9, 2: 0.6})
        self.assertAlmostEqual(pgfl(h), density(h), places=15)
        for X in ((), (1,), (0, 2)):
            self.assertAlmostEqual(pgfl.derivative(X, h),
                                   density.derivative(X, h), places=15)


if __name__ == '__main__':
    unittest.main()
