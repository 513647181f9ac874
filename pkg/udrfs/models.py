#!/usr/bin/env python
"""
Statistical model ingredients shared by every filter, oracle and simulator.

Two interchangeable base-state backends exist. In continuous mode a base
state is a real vector and the model is a ScenarioModel: linear-Gaussian
motion with constant survival probability, linear-Gaussian measurements with
constant detection probability, Poisson clutter uniform over a box, and a
Gaussian-mixture birth intensity. In finite mode a base state is an index
into a small grid and the model is a GridModel whose ingredients are
per-point tables.

Both models expose the same pointwise interface, used by the transition
functions and the measurement densities:

    markov_density(x, x_prev)   f(x | x_prev)
    likelihood(z, x)            L_z(x) = f(z | x)
    detection_probability(x)    p_D(x)
    survival_probability(x)     p_S(x)
    clutter_intensity(z)        kappa(z) = rate * c(z)
    clutter_rate                kappa[1]

Detected/undetected tagging pairs a base state x with a tag o, where o = 1
marks a D-target (detected at least once) and o = 0 a U-target. In finite
mode tagged points are plain (x, o) tuples; UDState is the value object
returned by estimators.
"""
import math
from dataclasses import dataclass, field, replace
from enum import IntEnum

import numpy as np
import singer
from scipy.stats import multivariate_normal

from udrfs.mixture import GaussianMixture, check_symmetric, frozen_array

logger = singer.get_logger().getChild('udrfs')

NORMALIZATION_TOLERANCE = 1e-9


class UDRFSError(Exception):
    pass


class ScenarioError(UDRFSError):
    pass


class UsageError(UDRFSError):
    pass


class ModelError(UDRFSError, ValueError):
    pass


class ImpossibleMeasurementError(UDRFSError):

    def __init__(self, message="measurement impossible under model"):
        super().__init__(message)


class DivergenceError(UDRFSError):
    pass


class EnumerationLimitError(UDRFSError, ValueError):
    pass


class UDTag(IntEnum):
    UNDETECTED = 0
    DETECTED = 1


UNDETECTED = UDTag.UNDETECTED
DETECTED = UDTag.DETECTED
TAGS = (UNDETECTED, DETECTED)


def tag_of(point):
    if isinstance(point, UDState):
        return point.o
    return UDTag(point[1])


def base_of(point):
    if isinstance(point, UDState):
        return point.x
    if isinstance(point, tuple) and len(point) == 2 and point[1] in (0, 1) \
            and isinstance(point[0], (int, np.integer)):
        return point[0]
    return point


def in_detected(point):
    return 1.0 if tag_of(point) == DETECTED else 0.0


def in_undetected(point):
    return 1.0 if tag_of(point) == UNDETECTED else 0.0


@dataclass(frozen=True)
class UDState:
    x: object
    o: UDTag = DETECTED

    def __post_init__(self):
        object.__setattr__(self, 'o', UDTag(self.o))
        if isinstance(self.x, (int, np.integer)):
            object.__setattr__(self, 'x', int(self.x))
        else:
            object.__setattr__(
                self, 'x', tuple(float(v) for v in np.ravel(self.x)))

    @property
    def detected(self):
        return self.o == DETECTED

    def check_dimension(self, dim):
        if dim is None:
            if not isinstance(self.x, int):
                raise ValueError("finite-mode state must be a point index")
        elif isinstance(self.x, int) or len(self.x) != dim:
            raise ValueError(
                "state {} does not have dimension {}".format(self.x, dim))
        return self


def _probability(value, name):
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ModelError("{} must lie in [0, 1], got {}".format(name, value))
    return value


def _probability_table(values, size, name):
    table = frozen_array(values)
    if table.shape != (size,):
        raise ModelError("{} must have {} entries, got shape {}".format(
            name, size, table.shape))
    if np.any(table < 0.0) or np.any(table > 1.0):
        raise ModelError("{} entries must lie in [0, 1]".format(name))
    return table


def _row_normalized(values, shape, name):
    matrix = np.array(values, dtype=float, ndmin=2)
    if matrix.shape != shape:
        raise ModelError("{} must have shape {}, got {}".format(
            name, shape, matrix.shape))
    if np.any(matrix < 0.0):
        raise ModelError("{} entries must be nonnegative".format(name))
    sums = matrix.sum(axis=1)
    if np.any(sums <= 0.0):
        raise ModelError("{} has an all-zero row".format(name))
    drift = np.max(np.abs(sums - 1.0))
    if drift > NORMALIZATION_TOLERANCE:
        logger.warning(
            "%s rows deviate from 1 by up to %.3g; renormalizing", name, drift)
    return frozen_array(matrix / sums[:, None], ndmin=2)


@dataclass(frozen=True, eq=False)
class MotionModel:
    F: np.ndarray
    Q: np.ndarray
    p_s: float

    def __post_init__(self):
        F = frozen_array(self.F, ndmin=2)
        Q = frozen_array(self.Q, ndmin=2)
        if F.ndim != 2 or F.shape[0] != F.shape[1]:
            raise ModelError("F must be square, got shape {}".format(F.shape))
        if Q.shape != F.shape:
            raise ModelError("Q must have shape {}, got {}".format(
                F.shape, Q.shape))
        try:
            check_symmetric(Q, 'Q')
        except ValueError as e:
            raise ModelError(str(e))
        if np.linalg.eigvalsh(Q)[0] < -1e-12:
            raise ModelError("Q must be positive semidefinite")
        object.__setattr__(self, 'F', F)
        object.__setattr__(self, 'Q', Q)
        object.__setattr__(self, 'p_s', _probability(self.p_s, 'p_s'))


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    H: np.ndarray
    R: np.ndarray
    p_d: float

    def __post_init__(self):
        H = frozen_array(self.H, ndmin=2)
        R = frozen_array(self.R, ndmin=2)
        if R.shape != (H.shape[0], H.shape[0]):
            raise ModelError("R must have shape {}, got {}".format(
                (H.shape[0], H.shape[0]), R.shape))
        try:
            check_symmetric(R, 'R')
        except ValueError as e:
            raise ModelError(str(e))
        if np.linalg.eigvalsh(R)[0] <= 0.0:
            raise ModelError("R must be positive definite")
        object.__setattr__(self, 'H', H)
        object.__setattr__(self, 'R', R)
        object.__setattr__(self, 'p_d', _probability(self.p_d, 'p_d'))


@dataclass(frozen=True, eq=False)
class ClutterModel:
    """
    Poisson clutter with intensity kappa(z) = rate * c(z). The spatial density
    c is uniform over a box `region` (continuous mode) or a strictly positive
    table over measurement points summing to 1 (finite mode).
    """
    rate: float
    region: np.ndarray = None
    table: np.ndarray = None

    def __post_init__(self):
        rate = float(self.rate)
        if not rate >= 0.0:
            raise ModelError("clutter rate must be nonnegative")
        object.__setattr__(self, 'rate', rate)

        if (self.region is None) == (self.table is None):
            raise ModelError("clutter needs exactly one of region or table")

        if self.region is not None:
            region = frozen_array(self.region, ndmin=2)
            if region.ndim != 2 or region.shape[1] != 2:
                raise ModelError("clutter region must be a list of [lo, hi]")
            if np.any(region[:, 1] <= region[:, 0]):
                raise ModelError("clutter region bounds must satisfy lo < hi")
            object.__setattr__(self, 'region', region)
        else:
            table = np.array(self.table, dtype=float)
            if table.ndim != 1 or table.size == 0:
                raise ModelError("clutter table must be a nonempty list")
            if np.any(table <= 0.0):
                raise ModelError(
                    "clutter spatial density must be strictly positive")
            if abs(table.sum() - 1.0) > NORMALIZATION_TOLERANCE:
                raise ModelError(
                    "clutter table must sum to 1, got {}".format(table.sum()))
            object.__setattr__(self, 'table', frozen_array(table / table.sum()))

    @property
    def dim(self):
        return None if self.region is None else self.region.shape[0]

    @property
    def volume(self):
        if self.region is None:
            return None
        return float(np.prod(self.region[:, 1] - self.region[:, 0]))

    def density(self, z):
        if self.table is not None:
            return float(self.table[int(z)])
        z = np.ravel(np.asarray(z, dtype=float))
        if np.all(z >= self.region[:, 0]) and np.all(z <= self.region[:, 1]):
            return 1.0 / self.volume
        return 0.0

    def intensity(self, z):
        return self.rate * self.density(z)

    def sample(self, rng, count):
        if self.table is not None:
            return [int(i) for i in rng.choice(
                self.table.size, size=count, p=self.table)]
        draws = rng.uniform(self.region[:, 0], self.region[:, 1],
                            size=(count, self.region.shape[0]))
        return [row for row in draws]


def clutter_set_density(cl, Z):
    return math.exp(-cl.rate) * math.prod(cl.intensity(z) for z in Z)


@dataclass(frozen=True)
class FilterConfig:
    kind: str = 'standard'
    prune: float = 1e-5
    merge: float = 4.0
    max_components: int = 100
    initial_tag: str = 'u'

    def __post_init__(self):
        if self.prune < 0 or self.merge < 0 or self.max_components < 0:
            raise ModelError("filter reduction settings must be nonnegative")
        if self.initial_tag not in ('u', 'd'):
            raise ModelError("filter.initial_tag must be 'u' or 'd'")


FLAG_TIMINGS = ('next', 'same')


def _check_flag_timing(value):
    if value not in FLAG_TIMINGS:
        raise ModelError("flag_timing must be one of {}".format(FLAG_TIMINGS))


@dataclass(frozen=True, eq=False)
class ScenarioModel:
    motion: MotionModel
    measurement: MeasurementModel
    clutter: ClutterModel
    birth: GaussianMixture
    steps: int = 1
    seed: int = 0
    filter: FilterConfig = field(default_factory=FilterConfig)
    flag_timing: str = 'next'
    name: str = None

    def __post_init__(self):
        n = self.motion.F.shape[0]
        m = self.measurement.H.shape[0]
        if self.measurement.H.shape[1] != n:
            raise ModelError("H must have {} columns, got {}".format(
                n, self.measurement.H.shape[1]))
        if self.clutter.dim is not None and self.clutter.dim != m:
            raise ModelError("clutter region must have {} rows, got {}".format(
                m, self.clutter.dim))
        if self.birth.dim is not None and self.birth.dim != n:
            raise ModelError("birth components must have dimension {}".format(n))
        if int(self.steps) < 1:
            raise ModelError("steps must be at least 1")
        _check_flag_timing(self.flag_timing)

    @property
    def state_dim(self):
        return self.motion.F.shape[0]

    @property
    def meas_dim(self):
        return self.measurement.H.shape[0]

    @property
    def clutter_rate(self):
        return self.clutter.rate

    def markov_density(self, x, x_prev):
        predicted = self.motion.F @ np.ravel(x_prev)
        try:
            return float(multivariate_normal.pdf(
                np.ravel(x), mean=predicted, cov=self.motion.Q))
        except (ValueError, np.linalg.LinAlgError):
            raise ModelError(
                "pointwise Markov density needs a positive definite Q")

    def likelihood(self, z, x):
        return float(multivariate_normal.pdf(
            np.ravel(z), mean=self.measurement.H @ np.ravel(x),
            cov=self.measurement.R))

    def detection_probability(self, x):
        return self.measurement.p_d

    def survival_probability(self, x):
        return self.motion.p_s

    def clutter_intensity(self, z):
        return self.clutter.intensity(z)

    def with_detection_probability(self, p_d):
        return replace(self, measurement=MeasurementModel(
            self.measurement.H, self.measurement.R, p_d))


@dataclass(frozen=True, eq=False)
class GridModel:
    state_points: tuple
    meas_points: tuple
    markov: np.ndarray
    p_s: np.ndarray
    p_d: np.ndarray
    likelihood_table: np.ndarray
    clutter: ClutterModel
    birth: np.ndarray = None
    prior: np.ndarray = None
    steps: int = 1
    seed: int = 0
    filter: FilterConfig = field(default_factory=FilterConfig)
    flag_timing: str = 'next'
    name: str = None

    def __post_init__(self):
        states = tuple(self.state_points)
        meas = tuple(self.meas_points)
        if len(set(states)) != len(states) or not states:
            raise ModelError("state_points must be distinct and nonempty")
        if len(set(meas)) != len(meas) or not meas:
            raise ModelError("meas_points must be distinct and nonempty")
        n, m = len(states), len(meas)

        object.__setattr__(self, 'state_points', states)
        object.__setattr__(self, 'meas_points', meas)
        object.__setattr__(self, 'markov',
                           _row_normalized(self.markov, (n, n), 'markov'))
        object.__setattr__(self, 'likelihood_table', _row_normalized(
            self.likelihood_table, (n, m), 'likelihood'))
        object.__setattr__(self, 'p_s', _probability_table(self.p_s, n, 'p_s'))
        object.__setattr__(self, 'p_d', _probability_table(self.p_d, n, 'p_d'))

        if self.clutter.table is None or self.clutter.table.size != m:
            raise ModelError(
                "clutter table must have {} entries".format(m))

        for name in ('birth', 'prior'):
            values = getattr(self, name)
            values = np.zeros(n) if values is None else values
            table = frozen_array(values)
            if table.shape != (n,) or np.any(table < 0.0):
                raise ModelError(
                    "{} must be {} nonnegative entries".format(name, n))
            object.__setattr__(self, name, table)

        if int(self.steps) < 1:
            raise ModelError("steps must be at least 1")
        _check_flag_timing(self.flag_timing)

    @classmethod
    def random(cls, n_states, n_meas, seed=0, clutter_rate=0.5, p_d=None,
               p_s=None, birth_rate=0.0, **kwargs):
        rng = np.random.default_rng(seed)
        markov = rng.random((n_states, n_states)) + 0.1
        likelihood = rng.random((n_states, n_meas)) + 0.1
        table = rng.random(n_meas) + 0.2
        if p_d is None:
            p_d = rng.uniform(0.2, 0.9, n_states)
        if p_s is None:
            p_s = rng.uniform(0.6, 0.95, n_states)
        birth = rng.random(n_states) + 0.1
        prior = rng.random(n_states) + 0.1
        return cls(
            state_points=tuple(range(n_states)),
            meas_points=tuple(range(n_meas)),
            markov=markov / markov.sum(axis=1)[:, None],
            p_s=np.broadcast_to(p_s, (n_states,)),
            p_d=np.broadcast_to(p_d, (n_states,)),
            likelihood_table=likelihood / likelihood.sum(axis=1)[:, None],
            clutter=ClutterModel(clutter_rate, table=table / table.sum()),
            birth=birth_rate * birth / birth.sum(),
            prior=prior / prior.sum(),
            **kwargs
        )

    @property
    def n_states(self):
        return len(self.state_points)

    @property
    def n_meas(self):
        return len(self.meas_points)

    @property
    def state_dim(self):
        return None

    @property
    def clutter_rate(self):
        return self.clutter.rate

    def markov_density(self, x, x_prev):
        return float(self.markov[x_prev, x])

    def likelihood(self, z, x):
        return float(self.likelihood_table[x, z])

    def detection_probability(self, x):
        return float(self.p_d[x])

    def survival_probability(self, x):
        return float(self.p_s[x])

    def clutter_intensity(self, z):
        return self.clutter.intensity(z)

    def aligned(self):
        """
        The same sensor with no target appearance, disappearance or motion.
        """
        n = self.n_states
        return replace(self, markov=np.eye(n), p_s=np.ones(n),
                       birth=np.zeros(n))

    def with_detection_probability(self, p_d):
        return replace(self, p_d=np.broadcast_to(p_d, (self.n_states,)))
