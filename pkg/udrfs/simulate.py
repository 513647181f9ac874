#!/usr/bin/env python
"""
Ground-truth scenario simulation under the standard models.

Randomness is split into one PCG64 substream per (step, process) pair, keyed
by SeedSequence(seed, spawn_key=(k, process)). Changing the clutter draws of
a step therefore never perturbs target trajectories or detections.

Target measurements landing outside the clutter region are dropped, and
their targets count as missed, so every scan lies where kappa(z) > 0.
"""
from dataclasses import dataclass, field

import numpy as np
import singer

from udrfs.models import FLAG_TIMINGS

logger = singer.get_logger().getChild('udrfs')

STREAMS = ('survival', 'motion', 'birth', 'detection', 'noise', 'clutter')


def step_streams(seed, k):
    return {
        name: np.random.default_rng(
            np.random.SeedSequence(int(seed), spawn_key=(k, i)))
        for i, name in enumerate(STREAMS)
    }


@dataclass
class Target:
    id: int
    state: object
    detected: bool = False


@dataclass(frozen=True)
class TruthRecord:
    k: int
    targets: tuple = ()

    @property
    def count(self):
        return len(self.targets)

    @property
    def detected_count(self):
        return sum(1 for _, _, detected in self.targets if detected)

    def to_record(self):
        return {
            'k': self.k,
            'targets': [
                {'id': target_id, 'state': _as_list(state),
                 'detected': detected}
                for target_id, state, detected in self.targets
            ]
        }


@dataclass(frozen=True)
class MeasurementRecord:
    k: int
    measurements: tuple = ()
    origins: tuple = field(default=())

    def to_record(self):
        return {
            'k': self.k,
            'measurements': [_as_list(z) for z in self.measurements],
            'origins': list(self.origins),
        }


def _as_list(value):
    return [float(v) for v in np.ravel(value)]


def _check(steps, flag_timing):
    if int(steps) < 1:
        raise ValueError("steps must be at least 1, got {}".format(steps))
    if flag_timing not in FLAG_TIMINGS:
        raise ValueError("flag_timing must be one of {}".format(FLAG_TIMINGS))


def _flag(targets, detections, k, flag_timing, records):
    """
    Record the truth flags for step k and mark newly detected targets.
    With 'next' timing a first detection shows from step k + 1 onwards.
    """
    if flag_timing == 'same':
        for target in targets:
            target.detected = target.detected or target.id in detections
    records.append(TruthRecord(k, tuple(
        (t.id, t.state, t.detected) for t in targets)))
    for target in targets:
        target.detected = target.detected or target.id in detections


def _sorted_scan(k, detections, clutter):
    scan = [(tuple(float(v) for v in np.ravel(z)), origin)
            for origin, z in detections] + \
        [(tuple(float(v) for v in np.ravel(z)), None) for z in clutter]
    scan.sort(key=lambda item: item[0])
    return MeasurementRecord(
        k, tuple(np.array(z) for z, _ in scan),
        tuple(origin for _, origin in scan))


def simulate(model, steps=None, seed=None, flag_timing=None):
    steps = model.steps if steps is None else steps
    seed = model.seed if seed is None else seed
    flag_timing = flag_timing or model.flag_timing
    _check(steps, flag_timing)

    F, Q = model.motion.F, model.motion.Q
    H, R = model.measurement.H, model.measurement.R
    birth = model.birth
    birth_mass = birth.mass
    zero_state = np.zeros(model.state_dim)
    zero_meas = np.zeros(model.meas_dim)

    targets = []
    next_id = 0
    truth, measurements = [], []
    for k in range(1, int(steps) + 1):
        rng = step_streams(seed, k)

        targets = [t for t in targets
                   if rng['survival'].random() < model.motion.p_s]
        for target in targets:
            target.state = F @ target.state + \
                rng['motion'].multivariate_normal(zero_state, Q)

        if birth_mass > 0.0:
            for _ in range(rng['birth'].poisson(birth_mass)):
                c = birth[rng['birth'].choice(
                    len(birth), p=birth.weights / birth_mass)]
                targets.append(Target(
                    next_id, rng['birth'].multivariate_normal(c.mean, c.cov)))
                next_id += 1

        detections = []
        for target in targets:
            if rng['detection'].random() < model.measurement.p_d:
                z = H @ target.state + \
                    rng['noise'].multivariate_normal(zero_meas, R)
                detections.append((target.id, z))
        outside = [i for i, z in detections if not model.clutter.density(z)]
        if outside:
            logger.warning(
                "Step %s: dropping %s target measurements outside the "
                "clutter region", k, len(outside))
            detections = [(i, z) for i, z in detections if i not in outside]
        clutter = model.clutter.sample(
            rng['clutter'], rng['clutter'].poisson(model.clutter.rate))

        _flag(targets, {i for i, _ in detections}, k, flag_timing, truth)
        measurements.append(_sorted_scan(k, detections, clutter))

    logger.info("Simulated %s steps with %s targets", steps, next_id)
    return truth, measurements


def simulate_grid(model, steps=None, seed=None, flag_timing=None,
                  single_target=False):
    """
    Finite-space analog of simulate. Targets are grid indices, measurements
    are sets of measurement-point indices (coincident draws collapse, target
    origins winning over clutter). The prior is a Poisson intensity for the
    initial targets, or with single_target a distribution for exactly one
    target that neither dies nor is joined by births.
    """
    steps = model.steps if steps is None else steps
    seed = model.seed if seed is None else seed
    flag_timing = flag_timing or model.flag_timing
    _check(steps, flag_timing)

    n = model.n_states
    markov = np.asarray(model.markov)
    likelihood = np.asarray(model.likelihood_table)
    prior = np.asarray(model.prior, dtype=float)
    birth = np.asarray(model.birth, dtype=float)

    rng = step_streams(seed, 0)
    if single_target:
        weights = prior if prior.sum() > 0.0 else np.ones(n)
        initial = [int(rng['birth'].choice(n, p=weights / weights.sum()))]
    elif prior.sum() > 0.0:
        initial = [int(x) for x in rng['birth'].choice(
            n, size=rng['birth'].poisson(prior.sum()), p=prior / prior.sum())]
    else:
        initial = []
    targets = [Target(i, x) for i, x in enumerate(initial)]
    next_id = len(targets)

    truth, measurements = [], []
    for k in range(1, int(steps) + 1):
        rng = step_streams(seed, k)
        if not single_target:
            targets = [t for t in targets
                       if rng['survival'].random() < model.p_s[t.state]]
        for target in targets:
            target.state = int(rng['motion'].choice(
                n, p=markov[target.state]))
        if not single_target and birth.sum() > 0.0:
            for _ in range(rng['birth'].poisson(birth.sum())):
                targets.append(Target(next_id, int(rng['birth'].choice(
                    n, p=birth / birth.sum()))))
                next_id += 1

        scan = {}
        for target in targets:
            if rng['detection'].random() < model.p_d[target.state]:
                z = int(rng['noise'].choice(
                    model.n_meas, p=likelihood[target.state]))
                scan.setdefault(z, target.id)
        for z in model.clutter.sample(
                rng['clutter'], rng['clutter'].poisson(model.clutter.rate)):
            scan.setdefault(int(z), None)

        detections = {i for i in scan.values() if i is not None}
        _flag(targets, detections, k, flag_timing, truth)
        Z = sorted(scan)
        measurements.append(MeasurementRecord(
            k, tuple(Z), tuple(scan[z] for z in Z)))

    return truth, measurements
