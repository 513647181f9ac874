#!/usr/bin/env python
"""
Exact single-step filters.

dud_single_step runs the single-target D-U/D Bayes filter on a finite grid:
one target, missed detections, no clutter. The Bernoulli filters carry an
existence-weighted density D with D[1] <= 1 through clutter-bearing scans,
with the pseudo-likelihood

    L_Z(x) = 1 - p_D(x) + p_D(x) sum over z of L_z(x) / kappa(z).
"""
import math
from dataclasses import dataclass
from itertools import product

import numpy as np
import singer

from udrfs import transition
from udrfs.backends import backend_for
from udrfs.models import (DETECTED, TAGS, UNDETECTED,
                          ImpossibleMeasurementError, ModelError)

logger = singer.get_logger().getChild('udrfs')

MASS_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class TaggedGridDensity:
    """
    values[x, o]: probability of the target being at grid point x with tag o.
    """
    values: np.ndarray
    normalizer: float = 1.0

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != len(TAGS):
            raise ValueError("tagged grid density must have shape (n, 2)")
        if np.any(values < 0.0):
            raise ValueError("tagged grid density must be nonnegative")
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_prior(cls, prior, tag='u'):
        prior = np.asarray(prior, dtype=float)
        total = prior.sum()
        if total <= 0.0:
            prior = np.ones(prior.size)
            total = prior.size
        values = np.zeros((prior.size, len(TAGS)))
        values[:, int(DETECTED if tag == 'd' else UNDETECTED)] = prior / total
        return cls(values)

    def marginal(self):
        return self.values.sum(axis=1)

    def tag_mass(self, tag):
        return float(self.values[:, int(tag)].sum())


def _single(Z):
    Z = list(Z)
    if len(Z) > 1:
        raise ValueError(
            "the single-target filter takes at most one measurement, got "
            "{}".format(len(Z)))
    return Z


def _measurement_factors(Z, model):
    p_d = np.asarray(model.p_d)
    if not Z:
        return 1.0 - p_d
    return p_d * np.asarray(model.likelihood_table)[:, int(Z[0])]


def dud_single_step(prior, Z, model, kind=transition.JtfKind.NOVEL_UD):
    """
    One scan of the single-target tagged filter on a finite grid: the tagged
    transition kernel of `kind` applied to the prior, then normalized.
    """
    kernel = transition.grid_kernel(kind, Z, model)
    posterior = np.einsum('xoyp,yp->xo', kernel, prior.values)

    normalizer = math.fsum(posterior.ravel())
    if normalizer <= 0.0:
        raise ImpossibleMeasurementError()
    logger.debug("D-U/D grid normalizer %.6g", normalizer)
    return TaggedGridDensity(posterior / normalizer, normalizer)


def single_step(prior, Z, model):
    """
    Untagged single-target grid filter.
    """
    Z = _single(Z)
    posterior = _measurement_factors(Z, model) * \
        (np.asarray(model.markov).T @ np.asarray(prior, dtype=float))
    normalizer = math.fsum(posterior)
    if normalizer <= 0.0:
        raise ImpossibleMeasurementError()
    return posterior / normalizer


@dataclass(frozen=True, eq=False)
class BernoulliState:
    """
    Existence-weighted density. Untagged states hold it in `density`; tagged
    states hold the D-part there and the U-part in `undetected`.
    """
    density: object
    undetected: object = None

    @property
    def tagged(self):
        return self.undetected is not None

    def existence(self, model):
        backend = backend_for(model)
        mass = backend.mass(self.density)
        if self.tagged:
            mass += backend.mass(self.undetected)
        return mass

    def merged(self, model):
        if not self.tagged:
            return self.density
        return backend_for(model).add(self.density, self.undetected)


def _check_mass(mass, name):
    if mass < -MASS_TOLERANCE or mass > 1.0 + MASS_TOLERANCE:
        raise ValueError("{} mass must lie in [0, 1], got {}".format(
            name, mass))


def _pseudo_likelihood(backend, Z):
    kappa = [backend.clutter_intensity(z) for z in Z]
    if any(k <= 0.0 for k in kappa):
        raise ModelError("positive clutter density required on every "
                         "measurement")

    def apply(D):
        result = backend.missed(D)
        for z, k in zip(Z, kappa):
            result = backend.add(result, backend.scale(
                backend.detected(D, z), 1.0 / k))
        return result

    return apply


def _bernoulli_inputs(prior, birth, model):
    backend = backend_for(model)
    birth = backend.birth() if birth is None else birth
    birth_mass = backend.mass(birth)
    existence = prior.existence(model)
    _check_mass(birth_mass, 'birth')
    _check_mass(existence, 'prior')
    return backend, birth, birth_mass, existence


def _denominator(existence, birth_mass, moved_mass, updated_mass):
    denominator = (1.0 - existence) * (1.0 - birth_mass) + existence - \
        moved_mass + updated_mass
    if denominator <= 0.0:
        raise ImpossibleMeasurementError()
    return denominator


def bernoulli_single_step(prior, Z, model, birth=None):
    Z = list(Z)
    backend, birth, birth_mass, existence = _bernoulli_inputs(
        prior, birth, model)
    pseudo = _pseudo_likelihood(backend, Z)

    moved = backend.propagate(prior.merged(model))
    predicted = backend.add(backend.scale(birth, 1.0 - existence), moved)
    updated = pseudo(predicted)
    denominator = _denominator(existence, birth_mass, backend.mass(moved),
                               backend.mass(updated))
    posterior = backend.scale(updated, 1.0 / denominator)
    logger.debug("Bernoulli existence %.6g -> %.6g", existence,
                 backend.mass(posterior))
    return BernoulliState(posterior)


def dud_bernoulli_single_step(prior, Z, model, birth=None):
    """
    Tagged Bernoulli filter. Surviving U-targets move to the D-part when the
    scan is nonempty; births stay U-tagged.
    """
    Z = list(Z)
    if not prior.tagged:
        raise ValueError("the D-U/D Bernoulli filter needs a tagged state")
    backend, birth, birth_mass, existence = _bernoulli_inputs(
        prior, birth, model)
    pseudo = _pseudo_likelihood(backend, Z)

    moved = {DETECTED: backend.propagate(prior.density),
             UNDETECTED: backend.propagate(prior.undetected)}
    parts = {DETECTED: None,
             UNDETECTED: backend.scale(birth, 1.0 - existence)}
    for o, o_prev in product(TAGS, TAGS):
        factor = transition.bernoulli_tag_factor(o, o_prev, len(Z))
        if not factor:
            continue
        part = moved[o_prev]
        if factor != 1.0:
            part = backend.scale(part, factor)
        parts[o] = part if parts[o] is None else backend.add(parts[o], part)
    detected = pseudo(parts[DETECTED])
    undetected = pseudo(parts[UNDETECTED])

    denominator = _denominator(
        existence, birth_mass,
        backend.mass(moved[DETECTED]) + backend.mass(moved[UNDETECTED]),
        backend.mass(detected) + backend.mass(undetected))
    return BernoulliState(backend.scale(detected, 1.0 / denominator),
                          backend.scale(undetected, 1.0 / denominator))
