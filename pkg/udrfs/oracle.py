#!/usr/bin/env python
"""
Brute-force posteriors on finite spaces: the ground truth every filter is
checked against.

Static split (S-U/D): from an untagged predicted density, the posterior of
all targets, of targets detected in this scan and of targets missed in this
scan. Dynamic split (D-U/D): from a tagged density under the aligned model,
the posterior of all targets and its censorings to detected and undetected
targets.
"""
import math
from collections import namedtuple
from itertools import combinations, product

import numpy as np
import singer

from udrfs import transition
from udrfs.finite import (FiniteSetDensity, FiniteSpace, TestFunction,
                          functional_derivative, pgfl_eval, recover_density)
from udrfs.likelihood import associations, fstar, standard_meas_density
from udrfs.models import (DETECTED, TAGS, UNDETECTED,
                          ImpossibleMeasurementError, ModelError, base_of,
                          clutter_set_density)

logger = singer.get_logger().getChild('udrfs')

Posteriors = namedtuple(
    'Posteriors', ['total', 'detected', 'undetected', 'normalizer'])

ParallelismReport = namedtuple(
    'ParallelismReport', ['family', 'identities', 'max_abs_error'])


def state_space(model, cardinality_cap=None):
    return FiniteSpace(range(model.n_states), cardinality_cap)


def tagged_state_space(model, cardinality_cap=None):
    return FiniteSpace.tagged_space(range(model.n_states), cardinality_cap)


def measurement_space(model, cardinality_cap=None):
    return FiniteSpace(range(model.n_meas), cardinality_cap)


def bernoulli_density(space, existence, spatial):
    values = {frozenset(): 1.0 - existence}
    for x in space.points:
        values[frozenset((x,))] = existence * spatial[x]
    return FiniteSetDensity(space, values, probability=True)


class DensityPGFL():

    def __init__(self, density):
        self.density = density
        self.space = density.space

    def __call__(self, h):
        return pgfl_eval(self.density, h)

    def derivative(self, X, h):
        return functional_derivative(self.density, X, h)


class PoissonPGFL():
    """
    G[h] = exp(D[h - 1]), whose derivative at X is D^X G[h].
    """

    def __init__(self, space, intensity):
        self.space = space
        self.intensity = {x: float(intensity[x]) for x in space.points}

    def __call__(self, h):
        return math.exp(math.fsum(
            d * (h(x) - 1.0) for x, d in self.intensity.items()))

    def derivative(self, X, h):
        return math.prod(self.intensity[x] for x in X) * self(h)


class BernoulliPGFL():
    """
    G[h] = 1 - q + q s[h].
    """

    def __init__(self, space, existence, spatial):
        self.space = space
        self.existence = float(existence)
        self.spatial = {x: float(spatial[x]) for x in space.points}

    def __call__(self, h):
        return 1.0 - self.existence + self.existence * math.fsum(
            s * h(x) for x, s in self.spatial.items())

    def derivative(self, X, h):
        X = list(X)
        if not X:
            return self(h)
        if len(X) == 1:
            return self.existence * self.spatial[X[0]]
        return 0.0


def _detection_weights(space, Z, model, max_size):
    weights = {}
    for X in space.subsets():
        if len(X) > max_size:
            continue
        weight = fstar(Z, X, model) * math.prod(
            model.detection_probability(base_of(x)) for x in X)
        if weight:
            weights[X] = weight
    return weights


def _missed(space, h, model):
    return TestFunction(space, {
        p: h(p) * (1.0 - model.detection_probability(base_of(p)))
        for p in space.points
    })


def sud_pgfls(prior, Z, model):
    """
    Unnormalized p.g.fl.s of all targets, of detected targets and of
    undetected targets after measurement set Z, for a prior exposing
    derivative(X, h).
    """
    space = prior.space
    Z = tuple(sorted(Z))
    weights = _detection_weights(space, Z, model, len(Z))
    missed_everywhere = _missed(space, TestFunction.constant(space, 1.0), model)

    def total(h):
        missed = _missed(space, h, model)
        return math.fsum(
            w * h.power(X) * prior.derivative(X, missed)
            for X, w in weights.items())

    def detected(h):
        return math.fsum(
            w * h.power(X) * prior.derivative(X, missed_everywhere)
            for X, w in weights.items())

    def undetected(h):
        missed = _missed(space, h, model)
        return math.fsum(
            w * prior.derivative(X, missed) for X, w in weights.items())

    return total, detected, undetected


def sud_undetected_distribution(prior, Z, model):
    """
    Unnormalized density of undetected targets:
    (p_D^c)^X sum over Y disjoint from X of f*(Z|Y) p_D^Y f(Y u X).
    """
    space = prior.space
    Z = tuple(sorted(Z))
    values = {}
    for S, p in prior.items():
        members = sorted(S, key=space.sort_key)
        for n in range(min(len(members), len(Z)) + 1):
            for Y in map(frozenset, combinations(members, n)):
                X = S - Y
                weight = fstar(Z, Y, model) * math.prod(
                    model.detection_probability(base_of(y)) for y in Y)
                weight *= math.prod(
                    1.0 - model.detection_probability(base_of(x)) for x in X)
                if weight:
                    values[X] = values.get(X, 0.0) + weight * p
    return FiniteSetDensity(space, values)


def _normalized(density, normalizer):
    return FiniteSetDensity(
        density.space, {X: v / normalizer for X, v in density.items()},
        probability=True)


def sud_posteriors(prior, Z, model):
    space = prior.space
    Z = tuple(sorted(Z))
    if space.cardinality_cap < len(Z):
        raise ValueError(
            "cardinality cap {} is below the measurement count {}".format(
                space.cardinality_cap, len(Z)))

    total_G, _, _ = sud_pgfls(DensityPGFL(prior), Z, model)
    normalizer = total_G(TestFunction.constant(space, 1.0))
    if normalizer <= 0.0:
        raise ImpossibleMeasurementError()

    total = recover_density(space, lambda h: total_G(h) / normalizer,
                            probability=True)

    missed = _missed(space, TestFunction.constant(space, 1.0), model)
    detected = FiniteSetDensity(space, {
        X: w * functional_derivative(prior, X, missed)
        for X, w in _detection_weights(space, Z, model, len(Z)).items()
    })
    undetected = sud_undetected_distribution(prior, Z, model)

    logger.debug("S-U/D normalizer %.6g for %s measurements", normalizer,
                 len(Z))
    return Posteriors(total, _normalized(detected, normalizer),
                      _normalized(undetected, normalizer), normalizer)


def bayes_posterior(prior, Z, model):
    values = {X: standard_meas_density(X, Z, model) * p
              for X, p in prior.items()}
    normalizer = math.fsum(values.values())
    if normalizer <= 0.0:
        raise ImpossibleMeasurementError()
    return FiniteSetDensity(
        prior.space, {X: v / normalizer for X, v in values.items()},
        probability=True)


def tagged_bayes_posterior(prior, Z, model):
    """
    Posterior over tagged sets by association enumeration: targets assigned
    a measurement carry tag 1, missed targets tag 0.
    """
    Z = tuple(sorted(Z))
    kappa = [model.clutter_intensity(z) for z in Z]
    space = FiniteSpace.tagged_space(prior.space.points,
                                     prior.space.cardinality_cap)
    values = {}
    for X, p in prior.items():
        members = sorted(X, key=prior.space.sort_key)
        for alpha in associations(len(members), len(Z)):
            term = p * math.exp(-model.clutter_rate)
            used = set()
            for x, a in zip(members, alpha):
                p_d = model.detection_probability(x)
                if a == 0:
                    term *= 1.0 - p_d
                else:
                    term *= p_d * model.likelihood(Z[a - 1], x)
                    used.add(a - 1)
            term *= math.prod(k for j, k in enumerate(kappa) if j not in used)
            if term:
                tagged = frozenset(
                    (x, int(DETECTED if a else UNDETECTED))
                    for x, a in zip(members, alpha))
                values[tagged] = values.get(tagged, 0.0) + term
    normalizer = math.fsum(values.values())
    if normalizer <= 0.0:
        raise ImpossibleMeasurementError()
    return FiniteSetDensity(
        space, {X: v / normalizer for X, v in values.items()},
        probability=True)


def dud_pgfls(prior, Z, model):
    """
    Unnormalized p.g.fl.s of all, detected and undetected targets for a
    tagged prior under the aligned model.
    """
    space = prior.space
    Z = tuple(sorted(Z))
    weights = _detection_weights(space, Z, model, len(Z))

    def total(h):
        detected_part = h.restricted(DETECTED)
        missed = _missed(space, h, model)
        return math.fsum(
            w * detected_part.power(X) *
            functional_derivative(prior, X, missed)
            for X, w in weights.items())

    def detected(h):
        return total(h.on_detected())

    def undetected(h):
        return total(h.on_undetected())

    return total, detected, undetected


def dud_posteriors(prior, Z, model):
    space = prior.space
    if not space.tagged:
        raise ValueError("D-U/D posteriors need a tagged prior")
    total_G, detected_G, undetected_G = dud_pgfls(prior, Z, model)
    normalizer = total_G(TestFunction.constant(space, 1.0))
    if normalizer <= 0.0:
        raise ImpossibleMeasurementError()

    def recovered(G):
        return recover_density(space, lambda h: G(h) / normalizer,
                               probability=True)

    logger.debug("D-U/D normalizer %.6g", normalizer)
    return Posteriors(recovered(total_G), recovered(detected_G),
                      recovered(undetected_G), normalizer)


def aligned_dud_posterior(prior, Z, model):
    """
    Tagged posterior from the aligned multitarget transition density.
    """
    space = prior.space
    values = {}
    for X_prev, p in prior.items():
        for X in space.subsets():
            if len(X) != len(X_prev):
                continue
            value = transition.nud_jtf_multitarget(Z, X, X_prev, model)
            if value:
                values[X] = values.get(X, 0.0) + value * p
    normalizer = math.fsum(values.values())
    if normalizer <= 0.0:
        raise ImpossibleMeasurementError()
    return FiniteSetDensity(
        space, {X: v / normalizer for X, v in values.items()},
        probability=True)


def _indicator_basis(space):
    members = list(space.points)
    for mask in product((0, 1), repeat=len(members)):
        yield TestFunction.indicator(
            space, [p for p, keep in zip(members, mask) if keep])


def _test_functions(space, seed, count):
    functions = list(_indicator_basis(space))
    rng = np.random.default_rng(seed)
    for _ in range(count):
        functions.append(TestFunction(
            space, dict(zip(space.points, rng.random(len(space.points))))))
    return functions


def parallelism_checks(model, prior_family, existence=0.6, spatial=None,
                       intensity=None, Z=(0,), seed=0, random_functions=4):
    """
    Closed-form parallels of the undetected-target and total posteriors,
    compared with the S-U/D p.g.fl.s on indicator and random test functions.
    """
    space = state_space(model)
    Z = tuple(sorted(Z))
    functions = _test_functions(space, seed, random_functions)
    one = TestFunction.constant(space, 1.0)
    p_miss = {x: 1.0 - model.detection_probability(x) for x in space.points}
    identities = {}

    if prior_family == 'poisson':
        if intensity is None:
            intensity = {x: 0.5 for x in space.points}
        prior = PoissonPGFL(space, intensity)
        _, _, undetected = sud_pgfls(prior, Z, model)
        norm = undetected(one)
        identities['poisson-undetected'] = max(
            abs(undetected(h) / norm - math.exp(math.fsum(
                prior.intensity[x] * p_miss[x] * (h(x) - 1.0)
                for x in space.points)))
            for h in functions)

    elif prior_family == 'bernoulli':
        if spatial is None:
            spatial = {x: 1.0 / len(space) for x in space.points}
        kZ = clutter_set_density(model.clutter, Z)
        if kZ <= 0.0:
            raise ModelError("positive clutter density required")
        lhat = {x: standard_meas_density((x,), Z, model) / kZ
                for x in space.points}
        q = existence
        prior = BernoulliPGFL(space, q, spatial)
        total, _, undetected = sud_pgfls(prior, Z, model)
        total_norm = total(one)
        undetected_norm = undetected(one)
        rhs_norm = 1.0 - q + q * math.fsum(
            spatial[x] * lhat[x] for x in space.points)

        identities['bernoulli-total'] = max(
            abs(total(h) / total_norm - (1.0 - q + q * math.fsum(
                spatial[x] * lhat[x] * h(x) for x in space.points)) / rhs_norm)
            for h in functions)
        identities['bernoulli-undetected'] = max(
            abs(undetected(h) / undetected_norm - (1.0 - q + q * math.fsum(
                spatial[x] * (lhat[x] + p_miss[x] * (h(x) - 1.0))
                for x in space.points)) / rhs_norm)
            for h in functions)

        density_total, _, _ = sud_pgfls(
            DensityPGFL(bernoulli_density(space, q, spatial)), Z, model)
        identities['bernoulli-density-route'] = max(
            abs(density_total(h) - total(h)) / total_norm for h in functions)
    else:
        raise ValueError("unknown prior family {}".format(prior_family))

    return ParallelismReport(prior_family, identities,
                             max(identities.values()))


def trajectory_posterior(prior, measurements, model):
    """
    Tagged single-target posterior after the measurement sequence, by
    enumerating every (x, o) path.
    """
    prior = np.asarray(prior, dtype=float)
    states = [(x, o) for x in range(model.n_states) for o in TAGS]
    posterior = np.zeros((model.n_states, len(TAGS)))
    for path in product(states, repeat=len(measurements) + 1):
        weight = prior[path[0]]
        for (x, o), (x_prev, o_prev), Z in zip(path[1:], path, measurements):
            if weight == 0.0:
                break
            weight *= transition.nud_jtf(Z, x, o, x_prev, o_prev, model)
        posterior[path[-1]] += weight
    total = posterior.sum()
    if total <= 0.0:
        raise ImpossibleMeasurementError()
    return posterior / total


def predict_density(f, model):
    """
    Exact prediction of a density with at most one target (no births).
    """
    if np.any(np.asarray(model.birth) > 0.0):
        raise ValueError("single-target prediction does not model births")
    values = {}
    for X, p in f.items():
        if len(X) > 1:
            raise ValueError("single-target prediction needs cardinality <= 1")
        if not X:
            values[X] = values.get(X, 0.0) + p
            continue
        (point,) = X
        x_prev = base_of(point)
        p_s = model.survival_probability(x_prev)
        values[frozenset()] = values.get(frozenset(), 0.0) + (1.0 - p_s) * p
        for x in range(model.n_states):
            moved = (x, point[1]) if f.space.tagged else x
            key = frozenset((moved,))
            values[key] = values.get(key, 0.0) + \
                p * p_s * model.markov_density(x, x_prev)
    return FiniteSetDensity(f.space, values, probability=f.probability)


def predicted_first_moment(f, model):
    """
    First moment of the predicted multitarget density: births plus every
    surviving target carried through the Markov kernel.
    """
    moment = np.array(model.birth, dtype=float)
    for X, p in f.items():
        for point in X:
            x_prev = base_of(point)
            p_s = model.survival_probability(x_prev)
            for x in range(model.n_states):
                moment[x] += p * p_s * model.markov_density(x, x_prev)
    return moment


def first_moment(f, n_states):
    moment = np.zeros(n_states)
    for X, p in f.items():
        for point in X:
            moment[base_of(point)] += p
    return moment
