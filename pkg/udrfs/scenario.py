#!/usr/bin/env python
import json
from dataclasses import dataclass

import singer
from singer import Transformer
from singer.transform import SchemaMismatch

from udrfs.mixture import GaussianMixture
from udrfs.models import (ClutterModel, FilterConfig, GridModel,
                          MeasurementModel, ModelError, MotionModel,
                          ScenarioError, ScenarioModel)
from udrfs.utilities import SchemaLoader, canonical_hash

logger = singer.get_logger().getChild('udrfs')

schema_loader = SchemaLoader()

REQUIRED_SCENARIO_KEYS = [
    "F", "Q", "H", "R", "p_d", "p_s", "clutter", "birth", "steps", "seed"
]

REQUIRED_FINITE_SCENARIO_KEYS = [
    "state_points", "meas_points", "markov", "p_s", "p_d", "likelihood",
    "clutter", "steps", "seed"
]


@dataclass(frozen=True, eq=False)
class Scenario:
    model: object
    document: dict
    finite: bool
    scenario_hash: str
    pd_sweep: tuple = ()


def check_keys(document, required_keys, name='Scenario'):
    missing_keys = [key for key in required_keys if key not in document]
    if missing_keys:
        raise ScenarioError("{} is missing required keys: {}".format(
            name, missing_keys))


def validate(document, schema_name):
    schema = schema_loader.load(schema_name)
    try:
        with Transformer() as transformer:
            return transformer.transform(document, schema)
    except SchemaMismatch as e:
        raise ScenarioError(str(e))


def _filter_config(value):
    value = {k: v for k, v in (value or {}).items() if v is not None}
    return FilterConfig(**value)


def _continuous(document):
    clutter = document['clutter'] or {}
    check_keys(clutter, ['rate', 'region'], 'clutter')
    for i, component in enumerate(document['birth']):
        check_keys(component, ['w', 'mean', 'cov'], 'birth[{}]'.format(i))

    motion = MotionModel(document['F'], document['Q'], document['p_s'])
    measurement = MeasurementModel(document['H'], document['R'],
                                   document['p_d'])
    for key, expected in (('state_dim', motion.F.shape[0]),
                          ('meas_dim', measurement.H.shape[0])):
        declared = document.get(key)
        if declared is not None and declared != expected:
            raise ScenarioError("{} is {} but the matrices imply {}".format(
                key, declared, expected))

    return ScenarioModel(
        motion=motion,
        measurement=measurement,
        clutter=ClutterModel(clutter['rate'], region=clutter['region']),
        birth=GaussianMixture.from_arrays(
            [c['w'] for c in document['birth']],
            [c['mean'] for c in document['birth']],
            [c['cov'] for c in document['birth']]),
        steps=document['steps'],
        seed=document['seed'],
        filter=_filter_config(document.get('filter')),
        flag_timing=document.get('flag_timing') or 'next',
        name=document.get('name'),
    )


def _finite(document):
    clutter = document['clutter'] or {}
    check_keys(clutter, ['rate', 'table'], 'clutter')
    return GridModel(
        state_points=tuple(document['state_points']),
        meas_points=tuple(document['meas_points']),
        markov=document['markov'],
        p_s=document['p_s'],
        p_d=document['p_d'],
        likelihood_table=document['likelihood'],
        clutter=ClutterModel(clutter['rate'], table=clutter['table']),
        birth=document.get('birth'),
        prior=document.get('prior'),
        steps=document['steps'],
        seed=document['seed'],
        filter=_filter_config(document.get('filter')),
        flag_timing=document.get('flag_timing') or 'next',
        name=document.get('name'),
    )


def parse_scenario(document):
    """
    Build a scenario from its JSON document. Finite scenarios are told apart
    by the presence of state_points.
    """
    if not isinstance(document, dict):
        raise ScenarioError("scenario must be a JSON object")
    finite = 'state_points' in document
    check_keys(document, REQUIRED_FINITE_SCENARIO_KEYS if finite
               else REQUIRED_SCENARIO_KEYS)

    record = validate(document, 'finite_scenario' if finite else 'scenario')
    for key in ('steps', 'seed'):
        if record.get(key) is None:
            raise ScenarioError("{} must be an integer".format(key))
    try:
        model = _finite(record) if finite else _continuous(record)
    except (ModelError, ValueError, TypeError) as e:
        raise ScenarioError(str(e))

    logger.info("Loaded %s scenario %s", "finite" if finite else "continuous",
                model.name or "(unnamed)")
    return Scenario(model, document, finite, canonical_hash(document),
                    tuple(record.get('pd_sweep') or ()))


def load_scenario(path):
    try:
        with open(path) as f:
            document = json.load(f)
    except (OSError, ValueError) as e:
        raise ScenarioError("cannot read scenario {}: {}".format(path, e))
    return parse_scenario(document)
