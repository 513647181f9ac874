#!/usr/bin/env python
"""
Numerical identity checks run by `udrfs verify`.

Each VerificationCase computes the largest absolute deviation between two
independently coded sides of an identity on small seeded models. Cases are
registered in CASES and mapped to identities by verification_manifest.json.
"""
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations

import numpy as np
import singer
import singer.metrics as metrics

from udrfs import bayes, likelihood, oracle, phd, transition
from udrfs.backends import backend_for
from udrfs.finite import (FiniteSetDensity, TestFunction, censor, lift,
                          recover_density, tag_marginal)
from udrfs.mixture import GaussianComponent, GaussianMixture, symmetrize
from udrfs.models import (DETECTED, TAGS, UNDETECTED, ClutterModel,
                          GridModel, MeasurementModel, MotionModel,
                          ScenarioModel)
from udrfs.utilities import get_abs_path

logger = singer.get_logger().getChild('udrfs')

MANIFEST_PATH = get_abs_path('verification_manifest.json')


def load_manifest(path=MANIFEST_PATH):
    with open(path) as f:
        return json.load(f)['identities']


def worker_count():
    value = os.environ.get('UDRFS_THREADS')
    if value:
        return max(1, int(value))
    return os.cpu_count() or 1


def random_density(space, rng):
    values = {X: rng.random() + 0.05 for X in space.subsets()}
    total = math.fsum(values.values())
    return FiniteSetDensity(space, {X: v / total for X, v in values.items()},
                            probability=True)


def measurement_subsets(model, max_size):
    points = range(model.n_meas)
    for n in range(max_size + 1):
        yield from combinations(points, n)


def gm_model(seed=0):
    rng = np.random.default_rng(seed)
    birth = GaussianMixture.from_arrays(
        [0.1, 0.05], [[-3.0, 0.5], [4.0, -0.5]],
        [np.diag([1.0, 0.5]), np.diag([2.0, 0.25])])
    return ScenarioModel(
        motion=MotionModel([[1.0, 1.0], [0.0, 1.0]],
                           [[0.025, 0.05], [0.05, 0.1]], 0.95),
        measurement=MeasurementModel([[1.0, 0.0]], [[0.5]],
                                     rng.uniform(0.6, 0.95)),
        clutter=ClutterModel(2.0, region=[[-10.0, 10.0]]),
        birth=birth)


def random_mixture(rng, dim=2, size=None):
    size = rng.integers(1, 5) if size is None else size
    components = []
    for _ in range(size):
        A = rng.normal(size=(dim, dim))
        components.append(GaussianComponent(
            rng.uniform(0.1, 1.0), rng.normal(0.0, 3.0, dim),
            symmetrize(A @ A.T + 0.5 * np.eye(dim))))
    return GaussianMixture(tuple(components))


def random_scan(rng, low=-6.0, high=6.0, max_size=3):
    return [np.array([v]) for v in rng.uniform(
        low, high, rng.integers(0, max_size + 1))]


def mixture_difference(a, b):
    """
    Componentwise deviation of two mixtures listed in the same order.
    """
    if len(a) != len(b):
        return math.inf
    if not len(a):
        return 0.0
    scale = max(1.0, float(np.max(a.weights)))
    error = 0.0
    for ca, cb in zip(a, b):
        error = max(error, abs(ca.weight - cb.weight) / scale,
                    float(np.max(np.abs(ca.mean - cb.mean))) /
                    (1.0 + float(np.max(np.abs(ca.mean)))),
                    float(np.max(np.abs(ca.cov - cb.cov))) /
                    (1.0 + float(np.max(np.abs(ca.cov)))))
    return error


def intensity_difference(model, a, b, points):
    """
    Deviation of two intensities evaluated at points, relative to the
    larger of 1 and their peak value, together with their mass gap.
    """
    backend = backend_for(model)
    va = backend.evaluate(a, points)
    vb = backend.evaluate(b, points)
    scale = max(1.0, float(np.max(np.abs(va))) if va.size else 1.0)
    mass_gap = abs(backend.mass(a) - backend.mass(b)) / \
        max(1.0, backend.mass(a))
    return max(float(np.max(np.abs(va - vb))) / scale if va.size else 0.0,
               mass_gap)


GRID_SIZES = [(n, m) for n in range(2, 6) for m in range(2, 5)]


class VerificationCase():
    name = None
    identity = None
    equation = None
    tolerance = 1e-12
    sizes = {}

    def check(self):
        raise NotImplementedError

    def run(self):
        result = {
            'name': self.name,
            'identity': self.identity,
            'equation': self.equation,
            'tolerance': self.tolerance,
            'sizes': dict(self.sizes),
        }
        try:
            with metrics.job_timer(self.name):
                error = float(self.check())
        except Exception as e:
            logger.error("%s: %s", self.name, e)
            result.update({'max_abs_error': None, 'pass': False,
                           'error': str(e)})
            return result
        result['max_abs_error'] = error
        result['pass'] = bool(error <= self.tolerance)
        logger.info("%s: max error %.3g (%s)", self.name, error,
                    "pass" if result['pass'] else "FAIL")
        return result


class NudNormalization(VerificationCase):
    name = 'nud-normalization'
    identity = 'nud-jtf-normalization'
    equation = "sum over Z, x, o of f(Z, x, o | x', o') = 1"
    tolerance = 1e-10
    sizes = {'state_points': [2, 5], 'meas_points': [2, 4]}

    def check(self):
        error = 0.0
        for seed, (n, m) in enumerate(GRID_SIZES):
            model = GridModel.random(n, m, seed=seed, clutter_rate=0.0)
            scans = [()] + [(z,) for z in range(m)]
            for x_prev in range(n):
                for o_prev in TAGS:
                    total = math.fsum(
                        transition.nud_jtf(Z, x, o, x_prev, o_prev, model)
                        for Z in scans for x in range(n) for o in TAGS)
                    error = max(error, abs(total - 1.0))
        return error


class NudMarginalization(VerificationCase):
    name = 'nud-marginalization'
    identity = 'nud-jtf-marginalization'
    equation = "sum over o of f(Z, x, o | x', o') = f(Z, x | x')"
    sizes = {'state_points': [2, 5], 'meas_points': [2, 4]}

    def check(self):
        error = 0.0
        for seed, (n, m) in enumerate(GRID_SIZES):
            model = GridModel.random(n, m, seed=seed, clutter_rate=0.0)
            for Z in [()] + [(z,) for z in range(m)]:
                for x in range(n):
                    for x_prev in range(n):
                        conventional = transition.cjtf(Z, x, x_prev, model)
                        for o_prev in TAGS:
                            tagged = math.fsum(
                                transition.nud_jtf(Z, x, o, x_prev, o_prev,
                                                   model)
                                for o in TAGS)
                            error = max(error, abs(tagged - conventional))
        return error


class NudCompactForm(VerificationCase):
    name = 'nud-compact-form'
    identity = 'nud-jtf-compact-form'
    equation = ("(delta(o, 1) + (-1)^o delta(o', 0) delta(|Z|, 0)) "
                "f(Z, x | x') = case table")
    sizes = {'state_points': [2, 5], 'meas_points': [2, 4]}

    def check(self):
        error = 0.0
        for seed, (n, m) in enumerate(GRID_SIZES):
            model = GridModel.random(n, m, seed=seed, clutter_rate=0.0)
            for Z in [()] + [(z,) for z in range(m)]:
                for x in range(n):
                    for x_prev in range(n):
                        for o in TAGS:
                            for o_prev in TAGS:
                                error = max(error, abs(
                                    transition.nud_jtf(
                                        Z, x, o, x_prev, o_prev, model) -
                                    transition.nud_jtf_cases(
                                        Z, x, o, x_prev, o_prev, model)))
        return error


class DudGridFilterTrajectories(VerificationCase):
    name = 'dud-grid-filter-trajectories'
    identity = 'dud-single-step-filter'
    equation = "single-step tagged filter = trajectory-sum posterior"
    sizes = {'state_points': 3, 'steps': 3}

    def check(self):
        model = GridModel.random(3, 2, seed=11, clutter_rate=0.0)
        rng = np.random.default_rng(11)
        values = rng.random((3, 2)) + 0.05
        prior = bayes.TaggedGridDensity(values / values.sum())
        scans = [(0,), (), (1,)]

        error = 0.0
        density = prior
        untagged = prior.marginal()
        for step in range(1, len(scans) + 1):
            density = bayes.dud_single_step(density, scans[step - 1], model)
            untagged = bayes.single_step(untagged, scans[step - 1], model)
            expected = oracle.trajectory_posterior(
                prior.values, scans[:step], model)
            error = max(error,
                        float(np.max(np.abs(density.values - expected))),
                        float(np.max(np.abs(density.marginal() - untagged))))
        return error


class FstarSubsetSum(VerificationCase):
    name = 'fstar-subset-sum'
    identity = 'fstar-subset-sum'
    equation = ("f*(Z | X) = e^-rate sum over W in Z, |W| = |X| of "
                "kappa^(Z - W) f^(W | X)")
    sizes = {'max_targets': 3, 'max_measurements': 3}

    def check(self):
        model = GridModel.random(3, 3, seed=5, clutter_rate=0.7)
        error = 0.0
        for Z in measurement_subsets(model, 3):
            for n in range(4):
                for X in combinations(range(model.n_states), n):
                    expected = math.exp(-model.clutter_rate) * math.fsum(
                        math.prod(model.clutter_intensity(z)
                                  for z in Z if z not in W) *
                        likelihood.fstar_hat(W, X, model)
                        for W in combinations(Z, n))
                    error = max(error, abs(
                        likelihood.fstar(Z, X, model) - expected))
        return error


class _StaticSplitCase(VerificationCase):
    sizes = {'base_points': 3, 'cardinality_cap': 2}
    scans = [(), (0,), (1,), (0, 1)]

    def cases(self):
        model = GridModel.random(3, 2, seed=21, clutter_rate=0.6)
        prior = random_density(oracle.state_space(model, 2),
                               np.random.default_rng(21))
        for Z in self.scans:
            yield model, prior, Z


class SudTotalBayes(_StaticSplitCase):
    name = 'sud-total-bayes'
    identity = 'sud-total-posterior'
    equation = "S-U/D total posterior = Bayes posterior"

    def check(self):
        error = 0.0
        for model, prior, Z in self.cases():
            post = oracle.sud_posteriors(prior, Z, model)
            bayes_post = oracle.bayes_posterior(prior, Z, model)
            tagged = oracle.tagged_bayes_posterior(prior, Z, model)
            error = max(error, post.total.max_abs_difference(bayes_post),
                        tag_marginal(tagged, prior.space)
                        .max_abs_difference(bayes_post))
        return error


class SudDetectedCensor(_StaticSplitCase):
    name = 'sud-detected-censor'
    identity = 'sud-detected-posterior'
    equation = "S-U/D detected posterior = censor(tagged posterior, D)"

    def check(self):
        error = 0.0
        for model, prior, Z in self.cases():
            post = oracle.sud_posteriors(prior, Z, model)
            tagged = oracle.tagged_bayes_posterior(prior, Z, model)
            expected = censor(tagged, tagged.space.detected())
            error = max(error, lift(post.detected, tagged.space, DETECTED)
                        .max_abs_difference(expected))
        return error


class SudUndetectedCensor(_StaticSplitCase):
    name = 'sud-undetected-censor'
    identity = 'sud-undetected-posterior'
    equation = "S-U/D undetected posterior = censor(tagged posterior, U)"

    def check(self):
        error = 0.0
        for model, prior, Z in self.cases():
            post = oracle.sud_posteriors(prior, Z, model)
            tagged = oracle.tagged_bayes_posterior(prior, Z, model)
            expected = censor(tagged, tagged.space.undetected())
            error = max(error, lift(post.undetected, tagged.space, UNDETECTED)
                        .max_abs_difference(expected))
        return error


class SudUndetectedDistribution(_StaticSplitCase):
    name = 'sud-undetected-distribution'
    identity = 'sud-undetected-distribution'
    equation = ("U-target density = "
                "(p_D^c)^X int f*(Z | Y) p_D^Y f(Y u X) dY / norm")

    def check(self):
        error = 0.0
        for model, prior, Z in self.cases():
            _, _, undetected = oracle.sud_pgfls(
                oracle.DensityPGFL(prior), Z, model)
            norm = undetected(TestFunction.constant(prior.space, 1.0))
            recovered = recover_density(
                prior.space, lambda h: undetected(h) / norm, probability=True)
            explicit = oracle.sud_undetected_distribution(
                prior, Z, model).normalized()
            error = max(error, recovered.max_abs_difference(explicit))
        return error


class _DynamicSplitCase(VerificationCase):
    sizes = {'base_points': 3, 'cardinality_cap': 2}
    scans = [(), (0,), (1,), (0, 1)]

    def cases(self):
        model = GridModel.random(3, 2, seed=31, clutter_rate=0.5).aligned()
        prior = random_density(oracle.tagged_state_space(model, 2),
                               np.random.default_rng(31))
        for Z in self.scans:
            yield model, prior, Z


class DudPosteriorsCensoring(_DynamicSplitCase):
    name = 'dud-posteriors-censoring'
    identity = 'dud-detected-undetected-posteriors'
    equation = ("D-U/D detected, undetected = "
                "censor(total, D), censor(total, U)")

    def check(self):
        error = 0.0
        for model, prior, Z in self.cases():
            post = oracle.dud_posteriors(prior, Z, model)
            space = prior.space
            error = max(
                error,
                post.detected.max_abs_difference(
                    censor(post.total, space.detected())),
                post.undetected.max_abs_difference(
                    censor(post.total, space.undetected())))
        return error


class DudTotalAlignedBayes(_DynamicSplitCase):
    name = 'dud-total-aligned-bayes'
    identity = 'dud-total-posterior'
    equation = "D-U/D total posterior = aligned multitarget Bayes posterior"

    def check(self):
        error = 0.0
        for model, prior, Z in self.cases():
            post = oracle.dud_posteriors(prior, Z, model)
            error = max(error, post.total.max_abs_difference(
                oracle.aligned_dud_posterior(prior, Z, model)))
        return error


class _MultitargetCase(VerificationCase):
    sizes = {'max_targets': 2, 'max_measurements': 2}

    def models(self):
        for seed, rate in ((41, 0.0), (42, 0.4)):
            yield GridModel.random(2, 2, seed=seed, clutter_rate=rate) \
                .aligned()

    def pairs(self, model):
        space = oracle.tagged_state_space(model, 2)
        for X_prev in space.subsets():
            yield space, X_prev, [X for X in space.subsets()
                                  if len(X) == len(X_prev)]


class MultitargetNudNormalization(_MultitargetCase):
    name = 'multitarget-nud-normalization'
    identity = 'multitarget-nud-jtf-normalization'
    equation = "int sum over X of f(Z, X | X') dZ = 1"
    tolerance = 1e-10
    max_size = 3

    def check(self):
        error = 0.0
        for model in self.models():
            for space, X_prev, targets in self.pairs(model):
                total = likelihood.measurement_set_integral(
                    lambda Z: math.fsum(
                        transition.nud_jtf_multitarget(Z, X, X_prev, model)
                        for X in targets),
                    model, self.max_size)
                expected = likelihood.truncation_mass(
                    X_prev, model, self.max_size)
                error = max(error, abs(total - expected))
        return error


class MultitargetNudPartialPgfl(_MultitargetCase):
    name = 'multitarget-nud-partial-pgfl'
    identity = 'multitarget-nud-partial-pgfl'
    equation = "coefficient of g^Z in G[g | X, X'] = f(Z, X | X')"
    tolerance = 1e-10

    def check(self):
        error = 0.0
        zero = (lambda z: 0.0)
        one = (lambda z: 1.0)
        for model in self.models():
            for space, X_prev, targets in self.pairs(model):
                error = max(error, abs(math.fsum(
                    transition.nud_partial_pgfl(one, X, X_prev, model)
                    for X in targets) - 1.0))
                for X in targets:
                    polynomial = transition.nud_partial_pgfl_polynomial(
                        X, X_prev, model)
                    error = max(error, abs(
                        transition.nud_partial_pgfl(zero, X, X_prev, model) -
                        transition.nud_jtf_multitarget((), X, X_prev, model)))
                    for Z in measurement_subsets(model, model.n_meas):
                        error = max(error, abs(
                            polynomial.coefficient(Z) -
                            transition.nud_jtf_multitarget(
                                Z, X, X_prev, model)))
        return error


class MultitargetNudPgflIntegral(_MultitargetCase):
    """
    The closed-form partial p.g.fl. against a direct set integral of g^Z
    times the transition density. The integral is truncated at max_size
    measurements, so deviations inside the untruncated measurement mass
    are not counted.
    """
    name = 'multitarget-nud-pgfl-integral'
    identity = 'multitarget-nud-pgfl-integral'
    equation = "G[g | X, X'] = int g^Z f(Z, X | X') dZ"
    tolerance = 1e-10
    max_size = 4
    sizes = {'max_targets': 2, 'max_measurements': 4}

    def check(self):
        values = (0.3, 0.8)

        def g(z):
            return values[z]

        error = 0.0
        for model in self.models():
            for space, X_prev, targets in self.pairs(model):
                tail = 1.0 - likelihood.truncation_mass(
                    X_prev, model, self.max_size)
                for X in targets:
                    integral = likelihood.measurement_set_integral(
                        lambda Z: math.prod(g(z) for z in Z) *
                        transition.nud_jtf_multitarget(Z, X, X_prev, model),
                        model, self.max_size)
                    closed = transition.nud_partial_pgfl(g, X, X_prev, model)
                    error = max(error, abs(closed - integral) - tail)
        return max(error, 0.0)


class BernoulliNudNormalization(VerificationCase):
    name = 'bernoulli-nud-normalization'
    identity = 'bernoulli-nud-jtf-normalization'
    equation = "sum over o of int int f(Z, x, o | x', o') dZ dx = 1"
    tolerance = 1e-10
    max_size = 4
    sizes = {'state_points': 3, 'meas_points': 2, 'max_measurements': 4}

    def check(self):
        error = 0.0
        for seed in (61, 62):
            model = GridModel.random(3, 2, seed=seed, clutter_rate=0.5)
            states = range(model.n_states)
            for x_prev in states:
                expected = math.fsum(
                    model.markov_density(x, x_prev) *
                    likelihood.truncation_mass((x,), model, self.max_size)
                    for x in states)
                for o_prev in TAGS:
                    total = likelihood.measurement_set_integral(
                        lambda Z: math.fsum(
                            transition.nud_jtf_bernoulli(
                                Z, x, o, x_prev, o_prev, model)
                            for x in states for o in TAGS),
                        model, self.max_size)
                    error = max(error, abs(total - expected))
        return error


class ParallelismPoisson(VerificationCase):
    name = 'parallelism-poisson'
    identity = 'parallelism-poisson-undetected'
    equation = "Poisson prior: G_U[h] = exp D[p_D^c (h - 1)]"
    sizes = {'base_points': 3}

    def check(self):
        model = GridModel.random(3, 2, seed=51, clutter_rate=0.8)
        return max(oracle.parallelism_checks(
            model, 'poisson', intensity={0: 0.4, 1: 0.9, 2: 0.3}, Z=Z)
            .max_abs_error for Z in ((0,), (0, 1)))


class ParallelismBernoulli(VerificationCase):
    name = 'parallelism-bernoulli'
    identity = 'parallelism-bernoulli'
    equation = ("Bernoulli prior: "
                "detected and undetected posteriors are Bernoulli")
    sizes = {'base_points': 3}

    def check(self):
        model = GridModel.random(3, 2, seed=52, clutter_rate=0.8)
        return max(oracle.parallelism_checks(
            model, 'bernoulli', existence=0.6,
            spatial={0: 0.5, 1: 0.3, 2: 0.2}, Z=Z)
            .max_abs_error for Z in ((), (0,), (0, 1)))


class PhdComposition(VerificationCase):
    name = 'phd-composition'
    identity = 'phd-single-step-composition'
    equation = "single-step PHD = update(predict(D))"
    sizes = {'random_inputs': 50}

    def check(self):
        rng = np.random.default_rng(61)
        error = 0.0
        for i in range(50):
            model = gm_model(i)
            D = random_mixture(rng)
            Z = random_scan(rng)
            error = max(error, mixture_difference(
                phd.phd_single_step(D, Z, model),
                phd.phd_update(phd.phd_predict(D, model), Z, model)))
        grid = GridModel.random(5, 3, seed=61, birth_rate=0.3)
        for Z in ((), (0,), (0, 2)):
            D = np.asarray(grid.prior) * 2.0
            error = max(error, float(np.max(np.abs(
                phd.phd_single_step(D, Z, grid) -
                phd.phd_update(phd.phd_predict(D, grid), Z, grid)))))
        return error


class PhdPredictedFirstMoment(VerificationCase):
    name = 'phd-predicted-first-moment'
    identity = 'phd-predicted-first-moment'
    equation = "D_pred = b + M[p_S D]"
    tolerance = 1e-10
    sizes = {'base_points': 3, 'cardinality_cap': 2}

    def check(self):
        model = GridModel.random(3, 2, seed=62, birth_rate=0.4)
        prior = random_density(oracle.state_space(model, 2),
                               np.random.default_rng(62))
        D = oracle.first_moment(prior, model.n_states)
        return float(np.max(np.abs(
            phd.phd_predict(D, model) -
            oracle.predicted_first_moment(prior, model))))


class SudPhdSplit(VerificationCase):
    name = 'sud-phd-split'
    identity = 'sud-phd-split'
    equation = "D_d + D_u = single-step PHD"
    sizes = {'random_inputs': 20}

    def check(self):
        rng = np.random.default_rng(71)
        error = 0.0
        for i in range(20):
            model = gm_model(i)
            D = random_mixture(rng)
            Z = random_scan(rng)
            split = phd.sud_phd_step(D, Z, model)
            error = max(error, mixture_difference(
                split.undetected + split.detected,
                phd.phd_single_step(D, Z, model)))
        grid = GridModel.random(5, 3, seed=71, birth_rate=0.3)
        for Z in ((), (1,), (0, 2)):
            split = phd.sud_phd_step(np.asarray(grid.prior), Z, grid)
            error = max(error, float(np.max(np.abs(
                split.detected + split.undetected -
                phd.phd_single_step(np.asarray(grid.prior), Z, grid)))))
        return error


def _random_ud(rng, model):
    if isinstance(model, GridModel):
        return phd.UDIntensity(rng.random(model.n_states),
                               rng.random(model.n_states))
    return phd.UDIntensity(random_mixture(rng), random_mixture(rng))


class DudPhdMerge(VerificationCase):
    name = 'dud-phd-merge'
    identity = 'dud-phd-merge'
    equation = "D(., 1) + D(., 0) = single-step PHD on the merged prior"
    sizes = {'random_inputs': 20}

    def check(self):
        rng = np.random.default_rng(81)
        points = np.linspace(-8.0, 8.0, 9)
        points = np.array([[a, b] for a in points for b in (-1.0, 0.0, 1.0)])
        error = 0.0
        for i in range(20):
            model = gm_model(i)
            prev = _random_ud(rng, model)
            Z = random_scan(rng)
            step = phd.dud_phd_step(prev, Z, model)
            error = max(error, intensity_difference(
                model, step.merged(model),
                phd.phd_single_step(prev.merged(model), Z, model), points))
        grid = GridModel.random(5, 3, seed=81, birth_rate=0.3)
        for Z in ((), (1,), (0, 2)):
            prev = _random_ud(rng, grid)
            error = max(error, float(np.max(np.abs(
                phd.dud_phd_step(prev, Z, grid).merged(grid) -
                phd.phd_single_step(prev.merged(grid), Z, grid)))))
        return error


class DudPhdUInvariance(VerificationCase):
    name = 'dud-phd-u-invariance'
    identity = 'dud-phd-undetected-recursion'
    equation = "D(., 0) does not depend on Z"
    sizes = {'random_inputs': 10}

    def check(self):
        rng = np.random.default_rng(91)
        error = 0.0
        for i in range(10):
            model = gm_model(i)
            prev = _random_ud(rng, model)
            a = phd.dud_phd_step(prev, random_scan(rng), model).u_part
            b = phd.dud_phd_step(prev, random_scan(rng), model).u_part
            error = max(error, mixture_difference(a, b))
        grid = GridModel.random(4, 3, seed=91, birth_rate=0.3)
        prev = _random_ud(rng, grid)
        base = phd.dud_phd_step(prev, (), grid).u_part
        for Z in ((0,), (1, 2), (0, 1, 2)):
            error = max(error, float(np.max(np.abs(
                phd.dud_phd_step(prev, Z, grid).u_part - base))))
        return error


BERNOULLI_SCANS = [(0,), (), (1, 2), (2,), (0, 1)]


class BernoulliOracle(VerificationCase):
    name = 'bernoulli-oracle'
    identity = 'bernoulli-filter'
    equation = "Bernoulli filter = Bayes posterior with at most one target"
    tolerance = 1e-10
    sizes = {'state_points': 4, 'steps': 5}

    def check(self):
        model = GridModel.random(4, 3, seed=101, p_s=1.0, clutter_rate=0.7)
        space = oracle.state_space(model, 1)
        spatial = np.asarray(model.prior)
        existence = 0.7

        state = bayes.BernoulliState(existence * spatial)
        density = oracle.bernoulli_density(space, existence, spatial)
        error = 0.0
        for Z in BERNOULLI_SCANS:
            state = bayes.bernoulli_single_step(state, Z, model)
            density = oracle.bayes_posterior(
                oracle.predict_density(density, model), Z, model)
            error = max(error, float(np.max(np.abs(
                state.density - oracle.first_moment(density, model.n_states)
            ))))
        return error


class DudBernoulliTagSum(VerificationCase):
    name = 'dud-bernoulli-tag-sum'
    identity = 'dud-bernoulli-marginal'
    equation = "sum over o of D(., o) = untagged Bernoulli filter"
    sizes = {'state_points': 4, 'steps': 5}

    def check(self):
        model = GridModel.random(4, 3, seed=111, clutter_rate=0.7,
                                 birth_rate=0.3)
        prior = 0.5 * np.asarray(model.prior)
        untagged = bayes.BernoulliState(prior)
        tagged = bayes.BernoulliState(np.zeros(model.n_states), prior)
        error = 0.0
        for Z in BERNOULLI_SCANS:
            untagged = bayes.bernoulli_single_step(untagged, Z, model)
            tagged = bayes.dud_bernoulli_single_step(tagged, Z, model)
            error = max(error, float(np.max(np.abs(
                tagged.merged(model) - untagged.density))))
        return error


CASES = {
    case.name: case for case in (
        NudNormalization,
        NudMarginalization,
        NudCompactForm,
        DudGridFilterTrajectories,
        FstarSubsetSum,
        SudTotalBayes,
        SudDetectedCensor,
        SudUndetectedCensor,
        SudUndetectedDistribution,
        DudPosteriorsCensoring,
        DudTotalAlignedBayes,
        MultitargetNudNormalization,
        MultitargetNudPartialPgfl,
        MultitargetNudPgflIntegral,
        BernoulliNudNormalization,
        ParallelismPoisson,
        ParallelismBernoulli,
        PhdComposition,
        PhdPredictedFirstMoment,
        SudPhdSplit,
        DudPhdMerge,
        DudPhdUInvariance,
        BernoulliOracle,
        DudBernoulliTagSum,
    )
}


def run_cases(names=None):
    """
    Run the named cases (all when names is None) concurrently and return
    their results in registry order.
    """
    names = list(CASES) if names is None else list(names)
    unknown = [name for name in names if name not in CASES]
    if unknown:
        raise KeyError("unknown verification cases: {}".format(unknown))

    with ThreadPoolExecutor(max_workers=worker_count()) as executor:
        futures = [executor.submit(CASES[name]().run) for name in names]
        results = [future.result() for future in futures]

    passed = sum(1 for r in results if r['pass'])
    return {'cases': results, 'passed': passed,
            'failed': len(results) - passed}
