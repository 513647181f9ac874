#!/usr/bin/env python
"""
Multitarget measurement densities by exact enumeration of
measurement-to-track associations.

Products are kept in unnormalized form, e^{-rate} * prod over unassigned
measurements of kappa(z) * prod over assigned targets of p_D L_z, so a
measurement with kappa(z) = 0 never causes a division.
"""
import math
from itertools import permutations, product

import singer
from scipy.stats import poisson

from udrfs.models import EnumerationLimitError, base_of

logger = singer.get_logger().getChild('udrfs')

MAX_TARGETS = 4
MAX_MEASUREMENTS = 4


def check_enumeration_bounds(n_targets, n_measurements):
    if n_targets > MAX_TARGETS or n_measurements > MAX_MEASUREMENTS:
        raise EnumerationLimitError(
            "enumeration is bounded to {} targets and {} measurements, got "
            "{} and {}".format(MAX_TARGETS, MAX_MEASUREMENTS, n_targets,
                               n_measurements))


def associations(n, m):
    """
    Every map alpha: {1..n} -> {0, 1..m} injective on positive values, as
    tuples where 0 means missed and j > 0 means measurement j.
    """
    def extend(prefix, used):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        yield from extend(prefix + [0], used)
        for j in range(1, m + 1):
            if j not in used:
                yield from extend(prefix + [j], used | {j})

    return extend([], frozenset())


def injections(n, m):
    return permutations(range(m), n)


def _ordered(X):
    X = list(X)
    try:
        return sorted(X)
    except (TypeError, ValueError):
        return X


def standard_meas_density(X, Z, model):
    X = _ordered(X)
    Z = _ordered(Z)
    check_enumeration_bounds(len(X), len(Z))
    bases = [base_of(x) for x in X]
    kappa = [model.clutter_intensity(z) for z in Z]
    terms = []
    for alpha in associations(len(bases), len(Z)):
        term = 1.0
        used = set()
        for x, a in zip(bases, alpha):
            p_d = model.detection_probability(x)
            if a == 0:
                term *= 1.0 - p_d
            else:
                term *= p_d * model.likelihood(Z[a - 1], x)
                used.add(a - 1)
        for j, k in enumerate(kappa):
            if j not in used:
                term *= k
        terms.append(term)
    return math.exp(-model.clutter_rate) * math.fsum(terms)


def fstar(Z, X, model):
    X = _ordered(X)
    Z = _ordered(Z)
    if len(X) > len(Z):
        return 0.0
    check_enumeration_bounds(len(X), len(Z))
    bases = [base_of(x) for x in X]
    kappa = [model.clutter_intensity(z) for z in Z]
    terms = []
    for tau in injections(len(bases), len(Z)):
        term = math.prod(
            model.likelihood(Z[j], x) for x, j in zip(bases, tau))
        used = set(tau)
        term *= math.prod(k for j, k in enumerate(kappa) if j not in used)
        terms.append(term)
    return math.exp(-model.clutter_rate) * math.fsum(terms)


def fstar_hat(W, X, model):
    """
    Clutter-free association sum over bijections between X and W.
    """
    X = _ordered(X)
    W = _ordered(W)
    if len(X) != len(W):
        return 0.0
    check_enumeration_bounds(len(X), len(W))
    bases = [base_of(x) for x in X]
    return math.fsum(
        math.prod(model.likelihood(W[j], x) for x, j in zip(bases, pi))
        for pi in permutations(range(len(W)))
    )


def single_target_meas_density(Z, x, model):
    return standard_meas_density((x,), Z, model)


def poisson_tail(rate, n):
    """
    Probability that a Poisson(rate) count exceeds n.
    """
    if rate == 0.0:
        return 0.0
    return float(poisson.sf(n, rate))


def _poisson_cdf(rate, n):
    if rate == 0.0:
        return 1.0
    return float(poisson.cdf(n, rate))


def detection_count_distribution(X, model):
    """
    Distribution of the number of detections among targets X.
    """
    dist = [1.0]
    for x in X:
        p_d = model.detection_probability(base_of(x))
        nxt = [0.0] * (len(dist) + 1)
        for k, v in enumerate(dist):
            nxt[k] += v * (1.0 - p_d)
            nxt[k + 1] += v * p_d
        dist = nxt
    return dist


def truncation_mass(X, model, max_size):
    """
    Mass of the multitarget measurement density on measurement sets with at
    most max_size points.
    """
    total = []
    for k, p in enumerate(detection_count_distribution(X, model)):
        if k <= max_size:
            total.append(p * _poisson_cdf(model.clutter_rate, max_size - k))
    return math.fsum(total)


def measurement_set_integral(fn, model, max_size, points=None):
    """
    Set integral over the finite measurement space with counting measure,
    sum_n (1/n!) sum over ordered n-tuples of fn(tuple), for n <= max_size.
    Coincident points are allowed, so fn receives tuples.
    """
    if points is None:
        points = tuple(range(len(model.meas_points)))
    total = []
    for n in range(max_size + 1):
        weight = 1.0 / math.factorial(n)
        for Z in product(points, repeat=n):
            value = fn(Z)
            if value:
                total.append(weight * value)
    return math.fsum(total)
