#!/usr/bin/env python
import csv
import json
import math
import os
import time
from dataclasses import replace

import numpy as np
import singer
import singer.metrics as metrics
from singer import Transformer
from singer.transform import SchemaMismatch

from udrfs import bayes, phd
from udrfs.backends import backend_for
from udrfs.models import (DETECTED, TAGS, UNDETECTED, DivergenceError,
                          GridModel, ScenarioError, UDState, UsageError)
from udrfs.phd import check_finite
from udrfs.simulate import MeasurementRecord, simulate, simulate_grid
from udrfs.utilities import SchemaLoader, round_half_up

logger = singer.get_logger().getChild('udrfs')

schema_loader = SchemaLoader()

TRACK_COLUMNS = ['k', 'tag', 'count_estimate', 'total_mass',
                 'under_resolved', 'states']
COMPARE_COLUMNS = ['filter', 'p_d', 'mean_cardinality_error',
                   'mean_tag_error']
POSTERIOR_COLUMNS = ['k', 'point', 'o', 'mass']


def _states(estimate):
    return json.dumps([
        {'o': int(s.o), 'x': list(s.x) if isinstance(s.x, tuple) else s.x}
        for s in estimate.states
    ], sort_keys=True)


def _row(k, tag, estimate, mass):
    return {
        'k': k,
        'tag': tag,
        'count_estimate': estimate.count,
        'total_mass': mass,
        'under_resolved': estimate.under_resolved,
        'states': _states(estimate),
    }


def _tag_estimate(estimate, tag, mass):
    return phd.StateEstimate(
        round_half_up(mass), [s for s in estimate.states if s.o == tag],
        estimate.under_resolved)


def _posterior_rows(values):
    """
    (point index, tag, mass) for every cell of an (n, 2) tagged grid array.
    """
    return [(x, int(o), float(values[x, int(o)]))
            for x in range(values.shape[0]) for o in TAGS]


class StepResult():

    def __init__(self, count, detected=None, undetected=None,
                 normalizer=None, tracks=(), posterior=()):
        self.count = count
        self.detected = detected
        self.undetected = undetected
        self.normalizer = normalizer
        self.tracks = list(tracks)
        self.posterior = list(posterior)


class Filter():
    name = None
    tagged = False
    single_target = False
    finite_only = False

    def __init__(self, model):
        if self.finite_only and not isinstance(model, GridModel):
            raise ScenarioError(
                "filter {} needs a finite scenario".format(self.name))
        self.model = model
        self.backend = backend_for(model)

    def prior(self):
        if isinstance(self.model, GridModel):
            return np.array(self.model.prior, dtype=float)
        return self.backend.zero()

    def initial(self):
        return self.prior()

    def reduce(self, D, name):
        return check_finite(self.backend.reduce(D), self.model, name)

    def step(self, state, Z):
        """
        Returns the next state and its StepResult.
        """
        raise NotImplementedError


class StandardPhdFilter(Filter):
    name = 'standard'

    def step(self, state, Z):
        D = self.reduce(phd.phd_update(
            phd.phd_predict(state, self.model), Z, self.model), 'intensity')
        estimate = phd.estimate(D, self.model)
        return D, StepResult(
            estimate.count,
            tracks=[('all', estimate, self.backend.mass(D))])


class SudPhdFilter(Filter):
    name = 'sud'

    def step(self, state, Z):
        split = phd.sud_phd_step(state, Z, self.model)
        D = self.reduce(split.total, 'intensity')
        detected = self.reduce(split.detected, 'detected intensity')
        undetected = self.reduce(split.undetected, 'undetected intensity')
        estimate = phd.estimate(D, self.model)
        d_mass = self.backend.mass(detected)
        u_mass = self.backend.mass(undetected)
        return D, StepResult(
            estimate.count, round_half_up(d_mass), round_half_up(u_mass),
            tracks=[('all', estimate, self.backend.mass(D)),
                    ('d', phd.estimate(detected, self.model), d_mass),
                    ('u', phd.estimate(undetected, self.model), u_mass)])


class DudPhdFilter(Filter):
    name = 'dud'
    tagged = True

    def initial(self):
        return phd.UDIntensity.initial(
            self.model, self.prior(), self.model.filter.initial_tag)

    def step(self, state, Z):
        step = phd.dud_phd_step(state, Z, self.model)
        state = phd.UDIntensity(self.reduce(step.d_part, 'D-part'),
                                self.reduce(step.u_part, 'U-part'))
        return state, self._result(state)

    def _result(self, state):
        estimate = phd.dud_estimate(state, self.model)
        d_mass, u_mass = state.masses(self.model)
        return StepResult(
            estimate.count, round_half_up(d_mass), round_half_up(u_mass),
            tracks=[('d', _tag_estimate(estimate, DETECTED, d_mass), d_mass),
                    ('u', _tag_estimate(estimate, UNDETECTED, u_mass),
                     u_mass)])


class BernoulliFilter(Filter):
    name = 'bernoulli'

    def __init__(self, model):
        super().__init__(model)
        birth_mass = self.backend.mass(self.backend.birth())
        if birth_mass > 1.0:
            raise ScenarioError(
                "Bernoulli filters need a birth mass of at most 1, got "
                "{}".format(birth_mass))

    def prior(self):
        D = super().prior()
        mass = self.backend.mass(D)
        if mass > 1.0:
            D = self.backend.scale(D, 1.0 / mass)
        return D

    def initial(self):
        return bayes.BernoulliState(self.prior())

    def step(self, state, Z):
        state = bayes.bernoulli_single_step(state, Z, self.model)
        D = self.reduce(state.density, 'Bernoulli density')
        estimate = phd.estimate(D, self.model)
        return bayes.BernoulliState(D), StepResult(
            estimate.count, tracks=[('all', estimate, self.backend.mass(D))])


class DudBernoulliFilter(BernoulliFilter, DudPhdFilter):
    name = 'dud-bernoulli'
    tagged = True

    def initial(self):
        ud = phd.UDIntensity.initial(
            self.model, self.prior(), self.model.filter.initial_tag)
        return bayes.BernoulliState(ud.d_part, ud.u_part)

    def step(self, state, Z):
        state = bayes.dud_bernoulli_single_step(state, Z, self.model)
        parts = phd.UDIntensity(
            self.reduce(state.density, 'D-part'),
            self.reduce(state.undetected, 'U-part'))
        result = self._result(parts)
        if isinstance(self.model, GridModel):
            # columns in TAGS order
            result.posterior = _posterior_rows(
                np.column_stack((parts.u_part, parts.d_part)))
        return bayes.BernoulliState(parts.d_part, parts.u_part), result


class GridDudFilter(Filter):
    name = 'grid-dud'
    tagged = True
    single_target = True
    finite_only = True

    def __init__(self, model):
        super().__init__(model)
        if model.clutter_rate != 0.0:
            raise ScenarioError(
                "filter grid-dud needs a clutter-free scenario (rate 0)")

    def initial(self):
        return bayes.TaggedGridDensity.from_prior(
            self.model.prior, self.model.filter.initial_tag)

    def step(self, state, Z):
        try:
            state = bayes.dud_single_step(state, Z, self.model)
        except ValueError as e:
            raise ScenarioError(str(e))
        if not np.all(np.isfinite(state.values)):
            raise DivergenceError("non-finite posterior")

        x, o = np.unravel_index(int(np.argmax(state.values)),
                                state.values.shape)
        best = UDState(int(x), int(o))
        tracks = []
        for tag, label in ((DETECTED, 'd'), (UNDETECTED, 'u')):
            mass = state.tag_mass(tag)
            count = round_half_up(mass)
            states = [best] if best.o == tag and count else []
            tracks.append((label, phd.StateEstimate(count, states), mass))
        return state, StepResult(
            1, tracks[0][1].count, tracks[1][1].count, state.normalizer,
            tracks, _posterior_rows(state.values))


FILTERS = {
    f.name: f for f in (
        StandardPhdFilter,
        SudPhdFilter,
        DudPhdFilter,
        BernoulliFilter,
        DudBernoulliFilter,
        GridDudFilter,
    )
}


def get_filter(name, model):
    if name not in FILTERS:
        raise UsageError("unknown filter {}; expected one of {}".format(
            name, sorted(FILTERS)))
    return FILTERS[name](model)


def simulate_for(model, instance):
    if isinstance(model, GridModel):
        return simulate_grid(model, single_target=instance.single_target)
    return simulate(model)


def run_filter(instance, measurements):
    state = instance.initial()
    results = []
    for record in measurements:
        state, result = instance.step(state, list(record.measurements))
        results.append(result)
    return results


def step_reports(truth, results):
    """
    Per-step report entries. Without truth (a supplied measurement stream)
    the true_* fields are null.
    """
    if truth is None:
        truth = [None] * len(results)
    steps = []
    for k, (record, result) in enumerate(zip(truth, results), start=1):
        if record is None:
            true_count = true_detected = true_undetected = None
        else:
            true_count = record.count
            true_detected = record.detected_count
            true_undetected = record.count - record.detected_count
        steps.append({
            'k': k if record is None else record.k,
            'true_count': true_count,
            'estimated_count': result.count,
            'true_detected': true_detected,
            'estimated_detected': result.detected,
            'true_undetected': true_undetected,
            'estimated_undetected': result.undetected,
            'normalizer': result.normalizer,
        })
    return steps


def transform(record, stream_name):
    with Transformer() as transformer:
        return transformer.transform(record, schema_loader.load(stream_name))


def write_jsonl(path, stream_name, records):
    with metrics.record_counter(stream_name) as counter, \
            open(path, 'w') as f:
        for record in records:
            record = transform(record.to_record(), stream_name)
            f.write(json.dumps(record, sort_keys=True) + '\n')
            counter.increment()
        return counter.value


def _measurement(z, model, k):
    values = np.ravel(np.asarray(z, dtype=float))
    if isinstance(model, GridModel):
        if values.size != 1 or not float(values[0]).is_integer() or \
                not 0 <= values[0] < model.n_meas:
            raise ScenarioError(
                "step {}: {} is not a measurement point index below "
                "{}".format(k, values.tolist(), model.n_meas))
        return int(values[0])
    if values.size != model.meas_dim:
        raise ScenarioError("step {}: measurement {} is not {}-dimensional"
                            .format(k, values.tolist(), model.meas_dim))
    return values


def read_measurements(path, model):
    """
    Measurement records from a JSON-lines stream in the format run writes,
    one record per step with k = 1, 2, ... in order. Finite scenarios give
    each measurement as [index] into meas_points.
    """
    try:
        with open(path) as f:
            lines = [line for line in f if line.strip()]
    except OSError as e:
        raise ScenarioError("cannot read measurements: {}".format(e))
    if not lines:
        raise ScenarioError("measurement stream {} is empty".format(path))

    records = []
    for k, line in enumerate(lines, start=1):
        try:
            record = transform(json.loads(line), 'measurement')
        except (ValueError, SchemaMismatch) as e:
            raise ScenarioError("measurement record {}: {}".format(k, e))
        if record.get('k') != k:
            raise ScenarioError(
                "measurement record {} has k = {}; records must run "
                "1, 2, ... in order".format(k, record.get('k')))
        scan = [_measurement(z, model, k)
                for z in record.get('measurements') or []]
        if isinstance(model, GridModel):
            if len(set(scan)) != len(scan):
                raise ScenarioError(
                    "step {}: measurement points repeat".format(k))
            scan.sort()
        records.append(MeasurementRecord(
            k, tuple(scan), tuple(record.get('origins') or ())))
    logger.info("Read %s measurement records", len(records))
    return records


def write_tracks(path, results):
    with metrics.record_counter('track') as counter, \
            open(path, 'w', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=TRACK_COLUMNS,
                                lineterminator='\n')
        writer.writeheader()
        for k, result in enumerate(results, start=1):
            for tag, estimate, mass in result.tracks:
                writer.writerow(transform(
                    _row(k, tag, estimate, mass), 'track'))
                counter.increment()
        return counter.value


def write_posterior(path, results, model):
    with metrics.record_counter('posterior') as counter, \
            open(path, 'w', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=POSTERIOR_COLUMNS,
                                lineterminator='\n')
        writer.writeheader()
        for k, result in enumerate(results, start=1):
            for x, o, mass in result.posterior:
                writer.writerow(transform({
                    'k': k, 'point': str(model.state_points[x]), 'o': o,
                    'mass': mass}, 'posterior'))
                counter.increment()
        return counter.value


def run(scenario, filter_name, out_dir, seed=None, timing=False,
        measurements_path=None):
    """
    Filter one scan sequence and write its outputs to out_dir. The scans are
    simulated from the scenario unless measurements_path names a stream to
    filter instead, in which case no truth.jsonl is written.
    """
    model = scenario.model
    if seed is not None:
        model = replace(model, seed=seed)
    instance = get_filter(filter_name, model)

    logger.info("Starting run of %s filter (seed %s)", filter_name,
                model.seed)
    started = time.perf_counter()
    with metrics.job_timer('run'):
        if measurements_path is None:
            truth, measurements = simulate_for(model, instance)
        else:
            truth = None
            measurements = read_measurements(measurements_path, model)
        results = run_filter(instance, measurements)
    elapsed = time.perf_counter() - started

    os.makedirs(out_dir, exist_ok=True)
    if truth is not None:
        write_jsonl(os.path.join(out_dir, 'truth.jsonl'), 'truth', truth)
    write_jsonl(os.path.join(out_dir, 'measurements.jsonl'), 'measurement',
                measurements)
    rows = write_tracks(os.path.join(out_dir, 'tracks.csv'), results)
    if any(result.posterior for result in results):
        write_posterior(os.path.join(out_dir, 'posterior.csv'), results,
                        model)

    report = {
        'scenario_hash': scenario.scenario_hash,
        'seed': model.seed,
        'filter': filter_name,
        'steps': step_reports(truth, results),
    }
    if timing:
        report['timing'] = elapsed
    report = transform(report, 'report')
    with open(os.path.join(out_dir, 'report.json'), 'w') as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write('\n')

    logger.info("Finished run of %s filter (%s track rows)", filter_name,
                rows)
    return report


def _mean(values):
    values = [v for v in values if v is not None]
    if not values:
        return None
    return math.fsum(values) / len(values)


def detection_label(model):
    if isinstance(model, GridModel):
        return float(np.mean(model.p_d))
    return model.measurement.p_d


def compare(scenario, filters, out_path, pd_sweep=None, seed=None):
    """
    Mean absolute cardinality and D-tag count errors against the truth, one
    CSV row per filter and detection probability.
    """
    filters = list(filters)
    if len(filters) < 2:
        raise UsageError("compare needs at least two filters")
    for name in filters:
        if name not in FILTERS:
            raise UsageError("unknown filter {}".format(name))

    base = scenario.model
    if seed is not None:
        base = replace(base, seed=seed)
    sweep = list(pd_sweep or scenario.pd_sweep or [None])

    rows = []
    for p_d in sweep:
        model = base if p_d is None else base.with_detection_probability(p_d)
        simulations = {}
        for name in filters:
            instance = get_filter(name, model)
            if instance.single_target not in simulations:
                simulations[instance.single_target] = simulate_for(
                    model, instance)
            truth, measurements = simulations[instance.single_target]
            steps = step_reports(truth, run_filter(instance, measurements))
            tag_errors = [
                abs(s['estimated_detected'] - s['true_detected'])
                if s['estimated_detected'] is not None else None
                for s in steps
            ]
            rows.append({
                'filter': name,
                'p_d': detection_label(model),
                'mean_cardinality_error': _mean(
                    [abs(s['estimated_count'] - s['true_count'])
                     for s in steps]),
                'mean_tag_error': _mean(tag_errors),
            })

    with open(out_path, 'w', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=COMPARE_COLUMNS,
                                lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({k: '' if v is None else v
                             for k, v in row.items()})
    logger.info("Compared %s filters over %s detection probabilities",
                len(filters), len(sweep))
    return rows
