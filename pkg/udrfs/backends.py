#!/usr/bin/env python
"""
Intensity arithmetic for the PHD and Bernoulli filters.

Every filter is written once against this interface:

    zero()                 the zero intensity
    birth()                birth intensity B
    mass(D)                D[1]
    add(a, b), scale(D, c)
    propagate(D)           D[p_S M_x], survival then motion
    missed(D)              p_D^c D
    detected(D, z)         p_D L_z D
    clutter_intensity(z)   kappa(z)
    maxima(D)              candidate states as (value, index, state)
    reduce(D)              pruning and merging (identity on grids)
    is_finite(D)
"""
import math

import numpy as np
import singer

from udrfs.mixture import (GaussianComponent, GaussianMixture, gm_mass,
                           gm_reduce, symmetrize)
from udrfs.models import GridModel

logger = singer.get_logger().getChild('udrfs')


class GaussianBackend():

    def __init__(self, model):
        self.model = model
        self.F = model.motion.F
        self.Q = model.motion.Q
        self.H = model.measurement.H
        self.R = model.measurement.R
        self.p_s = model.motion.p_s
        self.p_d = model.measurement.p_d
        self._innovations = {}

    def zero(self):
        return GaussianMixture()

    def birth(self):
        return self.model.birth

    def mass(self, D):
        return gm_mass(D)

    def add(self, a, b):
        return a + b

    def scale(self, D, c):
        return D.scaled(c)

    def propagate(self, D):
        return GaussianMixture(tuple(
            GaussianComponent(
                self.p_s * c.weight,
                self.F @ c.mean,
                symmetrize(self.F @ c.cov @ self.F.T + self.Q))
            for c in D
        ))

    def missed(self, D):
        return D.scaled(1.0 - self.p_d)

    def _innovation(self, component):
        key = id(component)
        cached = self._innovations.get(key)
        if cached is not None and cached[0] is component:
            return cached[1:]
        S = symmetrize(self.H @ component.cov @ self.H.T + self.R)
        K = np.linalg.solve(S, self.H @ component.cov).T
        P = symmetrize(
            (np.eye(component.dim) - K @ self.H) @ component.cov)
        self._innovations[key] = (component, S, K, P)
        return S, K, P

    def detected(self, D, z):
        z = np.ravel(np.asarray(z, dtype=float))
        components = []
        for c in D:
            S, K, P = self._innovation(c)
            predicted = self.H @ c.mean
            q = GaussianComponent(1.0, predicted, S).density(z)
            components.append(GaussianComponent(
                self.p_d * c.weight * q, c.mean + K @ (z - predicted), P))
        return GaussianMixture(tuple(components))

    def clutter_intensity(self, z):
        return self.model.clutter_intensity(z)

    def maxima(self, D):
        return [(c.weight, i, tuple(float(v) for v in c.mean))
                for i, c in enumerate(D) if c.weight > 0.0]

    def reduce(self, D):
        config = self.model.filter
        return gm_reduce(D, config.prune, config.merge, config.max_components)

    def is_finite(self, D):
        return D.is_finite()

    def evaluate(self, D, points):
        points = np.atleast_2d(points)
        return np.array([
            math.fsum(c.weight * c.density(x) for c in D) for x in points])


class GridBackend():

    def __init__(self, model):
        self.model = model
        self.transposed = np.asarray(model.markov).T
        self.p_s = np.asarray(model.p_s)
        self.p_d = np.asarray(model.p_d)
        self.likelihood = np.asarray(model.likelihood_table)

    def zero(self):
        return np.zeros(self.model.n_states)

    def birth(self):
        return np.array(self.model.birth, dtype=float)

    def mass(self, D):
        return math.fsum(D)

    def add(self, a, b):
        return a + b

    def scale(self, D, c):
        return D * c

    def propagate(self, D):
        return self.transposed @ (self.p_s * D)

    def missed(self, D):
        return (1.0 - self.p_d) * D

    def detected(self, D, z):
        return self.p_d * self.likelihood[:, int(z)] * D

    def clutter_intensity(self, z):
        return self.model.clutter_intensity(int(z))

    def maxima(self, D):
        """
        Local maxima along the point index chain.
        """
        D = np.asarray(D)
        found = []
        for i, value in enumerate(D):
            if value <= 0.0:
                continue
            left = D[i - 1] if i > 0 else -np.inf
            right = D[i + 1] if i + 1 < D.size else -np.inf
            if value >= left and value >= right:
                found.append((float(value), i, i))
        return found

    def reduce(self, D):
        return D

    def is_finite(self, D):
        return bool(np.all(np.isfinite(D)))

    def evaluate(self, D, points):
        return np.asarray(D)[list(points)]


def backend_for(model):
    if isinstance(model, GridModel):
        return GridBackend(model)
    return GaussianBackend(model)
