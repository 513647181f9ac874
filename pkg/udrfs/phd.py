#!/usr/bin/env python
"""
PHD filters: the standard two-step and single-step recursions, the static
detected/undetected split and the dynamic D-U/D recursion, plus the
maxima-based state estimators.

The measurement update is an approximation (it assumes a Poisson predicted
process); accuracy claims are checked against the finite oracles.
"""
from collections import namedtuple
from dataclasses import dataclass, field

import singer

from udrfs.backends import backend_for
from udrfs.models import DETECTED, UNDETECTED, DivergenceError, UDState
from udrfs.utilities import round_half_up

logger = singer.get_logger().getChild('udrfs')

SUDIntensities = namedtuple('SUDIntensities', ['detected', 'undetected',
                                               'total'])


@dataclass(frozen=True, eq=False)
class UDIntensity:
    d_part: object
    u_part: object

    @classmethod
    def initial(cls, model, prior=None, tag='u'):
        backend = backend_for(model)
        prior = backend.zero() if prior is None else prior
        if tag == 'd':
            return cls(prior, backend.zero())
        return cls(backend.zero(), prior)

    def merged(self, model):
        return backend_for(model).add(self.d_part, self.u_part)

    def masses(self, model):
        backend = backend_for(model)
        return backend.mass(self.d_part), backend.mass(self.u_part)


@dataclass(frozen=True)
class StateEstimate:
    count: int
    states: list = field(default_factory=list)
    under_resolved: bool = False


def check_finite(D, model, name='intensity'):
    if not backend_for(model).is_finite(D):
        raise DivergenceError("non-finite {}".format(name))
    return D


def phd_predict(D_prev, model):
    backend = backend_for(model)
    return backend.add(backend.birth(), backend.propagate(D_prev))


def phd_update(D_pred, Z, model):
    backend = backend_for(model)
    posterior = backend.missed(D_pred)
    for z in Z:
        detected = backend.detected(D_pred, z)
        denominator = backend.clutter_intensity(z) + backend.mass(detected)
        if denominator > 0.0:
            posterior = backend.add(
                posterior, backend.scale(detected, 1.0 / denominator))
    return posterior


def phd_single_step(D_prev, Z, model):
    backend = backend_for(model)
    birth = backend.birth()
    moved = backend.propagate(D_prev)
    posterior = backend.add(backend.missed(birth), backend.missed(moved))
    for z in Z:
        born = backend.detected(birth, z)
        survived = backend.detected(moved, z)
        denominator = backend.clutter_intensity(z) + backend.mass(born) + \
            backend.mass(survived)
        if denominator > 0.0:
            posterior = backend.add(posterior, backend.add(
                backend.scale(born, 1.0 / denominator),
                backend.scale(survived, 1.0 / denominator)))
    return posterior


def sud_phd_step(D_prev, Z, model):
    """
    One single-step update split into targets detected in this scan and
    targets missed in it. The total is fed forward.
    """
    backend = backend_for(model)
    birth = backend.birth()
    moved = backend.propagate(D_prev)
    undetected = backend.add(backend.missed(birth), backend.missed(moved))
    detected = backend.zero()
    for z in Z:
        born = backend.detected(birth, z)
        survived = backend.detected(moved, z)
        denominator = backend.clutter_intensity(z) + backend.mass(born) + \
            backend.mass(survived)
        if denominator > 0.0:
            detected = backend.add(detected, backend.add(
                backend.scale(born, 1.0 / denominator),
                backend.scale(survived, 1.0 / denominator)))
    total = backend.add(undetected, detected)
    logger.debug("S-U/D PHD masses: detected %.6g, undetected %.6g",
                 backend.mass(detected), backend.mass(undetected))
    return SUDIntensities(detected, undetected, total)


def dud_phd_step(prev, Z, model):
    """
    D-U/D PHD recursion. Births are U-targets; the U-part never receives a
    measurement term, and every detection term flows into the D-part.
    """
    backend = backend_for(model)
    birth = backend.birth()
    moved_d = backend.propagate(prev.d_part)
    moved_u = backend.propagate(prev.u_part)

    u_part = backend.add(backend.missed(birth), backend.missed(moved_u))
    d_part = backend.missed(moved_d)
    for z in Z:
        born = backend.detected(birth, z)
        from_d = backend.detected(moved_d, z)
        from_u = backend.detected(moved_u, z)
        denominator = backend.clutter_intensity(z) + backend.mass(born) + \
            backend.mass(from_d) + backend.mass(from_u)
        if denominator > 0.0:
            d_part = backend.add(d_part, backend.scale(
                backend.add(backend.add(born, from_d), from_u),
                1.0 / denominator))
    logger.debug("D-U/D PHD masses: d %.6g, u %.6g",
                 backend.mass(d_part), backend.mass(u_part))
    return UDIntensity(d_part, u_part)


def _ranked(candidates, count):
    candidates = sorted(candidates, key=lambda c: (-c[0], c[1], -c[2]))
    return candidates[:count], len(candidates) < count


def estimate(D, model):
    """
    Nearest-integer count (half-up) of the total mass, then that many of the
    highest maxima. Ties go to the lower point index.
    """
    backend = backend_for(model)
    count = round_half_up(backend.mass(D))
    candidates = [(value, index, int(DETECTED), state)
                  for value, index, state in backend.maxima(D)]
    chosen, under_resolved = _ranked(candidates, count)
    if under_resolved:
        logger.debug("Only %s maxima for an estimated %s targets",
                     len(candidates), count)
    return StateEstimate(
        count, [UDState(state, tag) for _, _, tag, state in chosen],
        under_resolved)


def dud_estimate(D, model):
    """
    Estimator over the tagged space: maxima of both parts pooled and ranked
    by value, ties broken toward the lower index and then toward tag 1.
    """
    backend = backend_for(model)
    count = round_half_up(backend.mass(D.d_part) + backend.mass(D.u_part))
    candidates = []
    for tag, part in ((DETECTED, D.d_part), (UNDETECTED, D.u_part)):
        candidates.extend((value, index, int(tag), state)
                          for value, index, state in backend.maxima(part))
    chosen, under_resolved = _ranked(candidates, count)
    return StateEstimate(
        count, [UDState(state, tag) for _, _, tag, state in chosen],
        under_resolved)
