#!/usr/bin/env python
import math
from dataclasses import dataclass

import numpy as np
import singer
from scipy.stats import multivariate_normal

logger = singer.get_logger().getChild('udrfs')

SYMMETRY_TOLERANCE = 1e-12


def symmetrize(matrix):
    return (matrix + matrix.T) / 2.0


def frozen_array(value, ndmin=1):
    array = np.array(value, dtype=float, ndmin=ndmin)
    array.setflags(write=False)
    return array


def check_symmetric(matrix, name):
    scale = max(1.0, float(np.max(np.abs(matrix)))) if matrix.size else 1.0
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("{} must be a square matrix, got shape {}".format(
            name, matrix.shape))
    if np.max(np.abs(matrix - matrix.T)) > SYMMETRY_TOLERANCE * scale:
        raise ValueError("{} must be symmetric".format(name))


@dataclass(frozen=True, eq=False)
class GaussianComponent:
    weight: float
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        weight = float(self.weight)
        if not weight >= 0.0:
            raise ValueError(
                "component weight must be nonnegative, got {}".format(weight))
        mean = frozen_array(np.ravel(np.asarray(self.mean, dtype=float)))
        cov = frozen_array(self.cov, ndmin=2)
        if cov.shape != (mean.size, mean.size):
            raise ValueError(
                "covariance shape {} does not match mean dimension {}".format(
                    cov.shape, mean.size))
        check_symmetric(cov, 'covariance')
        if np.linalg.eigvalsh(cov)[0] <= 0.0:
            raise ValueError("covariance must be positive definite")

        object.__setattr__(self, 'weight', weight)
        object.__setattr__(self, 'mean', mean)
        object.__setattr__(self, 'cov', cov)

    @property
    def dim(self):
        return self.mean.size

    def with_weight(self, weight):
        # mean and covariance were validated when this component was built
        component = object.__new__(GaussianComponent)
        object.__setattr__(component, 'weight', float(weight))
        object.__setattr__(component, 'mean', self.mean)
        object.__setattr__(component, 'cov', self.cov)
        return component

    def density(self, x):
        return float(multivariate_normal.pdf(x, mean=self.mean, cov=self.cov))


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    components: tuple = ()

    def __post_init__(self):
        components = tuple(self.components)
        dims = {c.dim for c in components}
        if len(dims) > 1:
            raise ValueError(
                "mixture components have mixed dimensions {}".format(
                    sorted(dims)))
        object.__setattr__(self, 'components', components)

    @classmethod
    def from_arrays(cls, weights, means, covs):
        return cls(tuple(
            GaussianComponent(w, m, P) for w, m, P in zip(weights, means, covs)
        ))

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, index):
        return self.components[index]

    def __add__(self, other):
        return GaussianMixture(self.components + tuple(other.components))

    @property
    def dim(self):
        if not self.components:
            return None
        return self.components[0].dim

    @property
    def weights(self):
        return np.array([c.weight for c in self.components], dtype=float)

    @property
    def mass(self):
        return gm_mass(self)

    def scaled(self, factor):
        if factor < 0:
            raise ValueError("mixture scale must be nonnegative")
        return GaussianMixture(
            tuple(c.with_weight(c.weight * factor) for c in self.components))

    def is_finite(self):
        return all(
            math.isfinite(c.weight) and np.all(np.isfinite(c.mean)) and
            np.all(np.isfinite(c.cov))
            for c in self.components
        )


def gm_mass(gm):
    return math.fsum(c.weight for c in gm.components)


def gm_eval(gm, x):
    if not gm.components:
        return 0.0
    x = np.ravel(np.asarray(x, dtype=float))
    if x.size != gm.dim:
        raise ValueError(
            "state dimension {} does not match mixture dimension {}".format(
                x.size, gm.dim))
    return math.fsum(c.weight * c.density(x) for c in gm.components)


def _mahalanobis(component, point):
    d = point - component.mean
    return float(d @ np.linalg.solve(component.cov, d))


def _merge(components):
    weights = np.array([c.weight for c in components])
    weight = math.fsum(weights)
    mean = np.sum(weights[:, None] * np.array([c.mean for c in components]),
                  axis=0) / weight
    cov = np.zeros((mean.size, mean.size))
    for w, c in zip(weights, components):
        d = mean - c.mean
        cov += w * (c.cov + np.outer(d, d))
    return GaussianComponent(weight, mean, symmetrize(cov / weight))


def gm_reduce(gm, prune_threshold, merge_distance, max_components):
    """
    Prune components with weight not above prune_threshold, merge every
    cluster within squared Mahalanobis distance merge_distance of the heaviest
    remaining component, then keep at most max_components heaviest.
    """
    if prune_threshold < 0 or merge_distance < 0:
        raise ValueError("reduction thresholds must be nonnegative")
    if max_components < 0:
        raise ValueError("max_components must be nonnegative")

    kept = [c for c in gm.components if c.weight > prune_threshold]
    if len(kept) < len(gm):
        logger.debug("Pruned %s of %s components", len(gm) - len(kept), len(gm))

    remaining = list(range(len(kept)))
    merged = []
    while remaining:
        j = max(remaining, key=lambda i: (kept[i].weight, -i))
        cluster = [
            i for i in remaining
            if i == j or _mahalanobis(kept[i], kept[j].mean) <= merge_distance
        ]
        if len(cluster) == 1:
            merged.append(kept[j])
        else:
            merged.append(_merge([kept[i] for i in cluster]))
        remaining = [i for i in remaining if i not in cluster]

    if len(merged) > max_components:
        order = sorted(range(len(merged)),
                       key=lambda i: (-merged[i].weight, i))[:max_components]
        merged = [merged[i] for i in sorted(order)]

    return GaussianMixture(tuple(merged))
