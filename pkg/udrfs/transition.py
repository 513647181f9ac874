#!/usr/bin/env python
"""
Joint transition functions: the density of (measurement set, new state)
given the previous state, for one scan.

    conventional     f(Z | x) f(x | x_prev)
    conventional U/D tags carried unchanged
    novel U/D        a U-target that generates a measurement becomes a
                     D-target; a D-target never reverts
    Bernoulli U/D    the novel kernel with clutter-bearing measurement sets
    aligned U/D      the multitarget form with no appearance, disappearance
                     or motion (finite mode only)
"""
import math
from enum import Enum
from itertools import permutations, product

import numpy as np
import singer

from udrfs.finite import MultilinearPolynomial
from udrfs.likelihood import (associations, check_enumeration_bounds,
                              single_target_meas_density)
from udrfs.models import DETECTED, TAGS, UNDETECTED, UDTag, base_of

logger = singer.get_logger().getChild('udrfs')


class JtfKind(Enum):
    CONVENTIONAL = 'conventional'
    CONVENTIONAL_UD = 'conventional-ud'
    NOVEL_UD = 'novel-ud'
    BERNOULLI_UD = 'bernoulli-ud'
    MULTITARGET_ALIGNED_UD = 'multitarget-aligned-ud'


def _single(Z):
    Z = list(Z)
    if len(Z) > 1:
        raise ValueError(
            "single-target U/D transitions take at most one measurement, "
            "got {}".format(len(Z)))
    return Z


def measurement_factor(Z, x, model):
    Z = list(Z)
    p_d = model.detection_probability(x)
    if not Z:
        return 1.0 - p_d
    if len(Z) == 1:
        return p_d * model.likelihood(Z[0], x)
    return 0.0


def cjtf(Z, x, x_prev, model):
    return measurement_factor(Z, x, model) * model.markov_density(x, x_prev)


def cud_jtf(Z, x, o, x_prev, o_prev, model):
    if UDTag(o) != UDTag(o_prev):
        return 0.0
    return cjtf(Z, x, x_prev, model)


def nud_tag_factor(o, o_prev, n_measurements):
    o = UDTag(o)
    o_prev = UDTag(o_prev)
    detected = 1.0 if o == DETECTED else 0.0
    flip = 1.0 if o_prev == UNDETECTED and n_measurements == 0 else 0.0
    return detected + (-1.0) ** int(o) * flip


def nud_jtf(Z, x, o, x_prev, o_prev, model):
    Z = _single(Z)
    return nud_tag_factor(o, o_prev, len(Z)) * cjtf(Z, x, x_prev, model)


def nud_jtf_cases(Z, x, o, x_prev, o_prev, model):
    Z = _single(Z)
    o = UDTag(o)
    o_prev = UDTag(o_prev)
    markov = model.markov_density(x, x_prev)
    p_d = model.detection_probability(x)

    if o_prev == DETECTED and o == UNDETECTED:
        return 0.0
    if o_prev == UNDETECTED and o == UNDETECTED:
        if Z:
            return 0.0
        return (1.0 - p_d) * markov
    if o_prev == UNDETECTED and o == DETECTED:
        if not Z:
            return 0.0
        return p_d * model.likelihood(Z[0], x) * markov
    return cjtf(Z, x, x_prev, model)


def bernoulli_tag_factor(o, o_prev, n_measurements):
    """
    Tag part of the Bernoulli U/D kernel: any nonempty scan moves the target
    to D, since the filter cannot tell its detection from clutter.
    """
    o = UDTag(o)
    o_prev = UDTag(o_prev)
    if o_prev == DETECTED:
        return 1.0 if o == DETECTED else 0.0
    if o == UNDETECTED:
        return 1.0 if n_measurements == 0 else 0.0
    return 0.0 if n_measurements == 0 else 1.0


def nud_jtf_bernoulli(Z, x, o, x_prev, o_prev, model):
    Z = list(Z)
    factor = bernoulli_tag_factor(o, o_prev, len(Z))
    if not factor:
        return 0.0
    return factor * single_target_meas_density(Z, x, model) * \
        model.markov_density(x, x_prev)


def _tagged_list(X):
    return sorted((base_of(p), int(p[1])) for p in X)


def nud_jtf_multitarget(Z, X, X_prev, model):
    X = _tagged_list(X)
    X_prev = _tagged_list(X_prev)
    if len(X) != len(X_prev):
        return 0.0
    Z = sorted(Z)
    n, m = len(X_prev), len(Z)
    check_enumeration_bounds(n, m)
    kappa = [model.clutter_intensity(z) for z in Z]

    terms = []
    for pi in permutations(range(n)):
        for alpha in associations(n, m):
            term = 1.0
            used = set()
            for i, a in enumerate(alpha):
                x_prev, o_prev = X_prev[i]
                target = X[pi[i]]
                p_d = model.detection_probability(x_prev)
                if a == 0:
                    if target != (x_prev, o_prev):
                        term = 0.0
                        break
                    term *= 1.0 - p_d
                else:
                    if target != (x_prev, int(DETECTED)):
                        term = 0.0
                        break
                    term *= p_d * model.likelihood(Z[a - 1], x_prev)
                    used.add(a - 1)
            if term:
                term *= math.prod(
                    k for j, k in enumerate(kappa) if j not in used)
                terms.append(term)
    return math.exp(-model.clutter_rate) * math.fsum(terms)


def _transition_kernel(target, previous, p_d, likelihood_g):
    kernel = 0.0
    if target == previous:
        kernel += 1.0 - p_d
    if target == (previous[0], int(DETECTED)):
        kernel += p_d * likelihood_g
    return kernel


def nud_partial_pgfl(g, X, X_prev, model):
    """
    Partial p.g.fl. of the aligned multitarget U/D transition with respect
    to the measurement set, at measurement test function g.

    The clutter factor exp(kappa[g - 1]) is the Poisson p.g.fl., so this is
    the set integral of g^Z times the transition density over measurement
    tuples with coincident points allowed (measurement_set_integral). The
    distinct-point subset sum, nud_partial_pgfl_polynomial, leaves out the
    scans that put clutter or two detections on one point.
    """
    X = _tagged_list(X)
    X_prev = _tagged_list(X_prev)
    if len(X) != len(X_prev):
        return 0.0
    check_enumeration_bounds(len(X_prev), 0)
    meas = range(len(model.meas_points))
    clutter = math.fsum(
        model.clutter_intensity(z) * (g(z) - 1.0) for z in meas)

    total = []
    for pi in permutations(range(len(X_prev))):
        term = 1.0
        for i, previous in enumerate(X_prev):
            likelihood_g = math.fsum(
                g(z) * model.likelihood(z, previous[0]) for z in meas)
            term *= _transition_kernel(
                X[pi[i]], previous,
                model.detection_probability(previous[0]), likelihood_g)
            if term == 0.0:
                break
        total.append(term)
    return math.exp(clutter) * math.fsum(total)


def nud_partial_pgfl_polynomial(X, X_prev, model):
    """
    The partial p.g.fl. as a square-free polynomial in the values g(z).
    Its coefficient of g^Z is the transition density at the measurement set
    Z, i.e. the functional derivative at g = 0. Clutter enters as
    e^{-rate} prod_z (1 + kappa(z) g(z)), so evaluating it at g sums
    g^Z times the density over distinct-point subsets Z.
    """
    X = _tagged_list(X)
    X_prev = _tagged_list(X_prev)
    meas = tuple(range(len(model.meas_points)))
    if len(X) != len(X_prev):
        return MultilinearPolynomial.zero()
    check_enumeration_bounds(len(X_prev), 0)

    clutter = MultilinearPolynomial.constant(math.exp(-model.clutter_rate))
    for z in meas:
        clutter = clutter * MultilinearPolynomial.affine(
            1.0, {z: model.clutter_intensity(z)})

    targets = MultilinearPolynomial.zero()
    for pi in permutations(range(len(X_prev))):
        term = MultilinearPolynomial.constant(1.0)
        for i, previous in enumerate(X_prev):
            x_prev = previous[0]
            p_d = model.detection_probability(x_prev)
            target = X[pi[i]]
            missed = (1.0 - p_d) if target == previous else 0.0
            if target == (x_prev, int(DETECTED)):
                slopes = {z: p_d * model.likelihood(z, x_prev) for z in meas}
            else:
                slopes = {}
            term = term * MultilinearPolynomial.affine(missed, slopes)
        targets = targets + term
    return clutter * targets


JTFS = {
    JtfKind.CONVENTIONAL: cjtf,
    JtfKind.CONVENTIONAL_UD: cud_jtf,
    JtfKind.NOVEL_UD: nud_jtf,
    JtfKind.BERNOULLI_UD: nud_jtf_bernoulli,
    JtfKind.MULTITARGET_ALIGNED_UD: nud_jtf_multitarget,
}

SINGLE_TARGET_UD = (JtfKind.CONVENTIONAL_UD, JtfKind.NOVEL_UD,
                    JtfKind.BERNOULLI_UD)


def grid_kernel(kind, Z, model):
    """
    Tagged single-target transition over a finite grid for one scan, as
    kernel[x, o, x_prev, o_prev].
    """
    kind = JtfKind(kind)
    if kind not in SINGLE_TARGET_UD:
        raise ValueError(
            "{} is not a single-target U/D transition".format(kind.value))
    jtf = JTFS[kind]
    Z = tuple(Z)
    n = model.n_states
    kernel = np.zeros((n, len(TAGS), n, len(TAGS)))
    for x, o, x_prev, o_prev in product(range(n), TAGS, range(n), TAGS):
        kernel[x, int(o), x_prev, int(o_prev)] = jtf(
            Z, x, o, x_prev, o_prev, model)
    return kernel
