#!/usr/bin/env python
import os
import json
import math
import hashlib
from singer import resolve_schema_references


def get_abs_path(path, file=None):
    """
    Path of a resource shipped inside the udrfs package.
    """
    if file is None:
        file = __file__
    return os.path.join(
        os.path.dirname(os.path.realpath(file)), path)


def round_half_up(value):
    return int(math.floor(value + 0.5))


def canonical_hash(document):
    encoded = json.dumps(document, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(encoded.encode('utf-8')).hexdigest()


def parse_float_list(value):
    return [float(v) for v in value.split(',') if v.strip()]


SCHEMA_DIR = get_abs_path('schemas')
SHARED_TYPES_DIR = get_abs_path('schemas/shared')


class SchemaLoader():
    """
    Scenario documents and output records (truth, measurement, track,
    posterior, report) are each checked against a JSON schema in
    udrfs/schemas. Field types they have in common, such as type-matrix or
    the nullable type-integer, sit in schemas/shared and are inlined where a
    schema $refs them. A loader resolves each schema once.
    """

    def __init__(self, schema_dir=SCHEMA_DIR, shared_dir=SHARED_TYPES_DIR):
        self.schema_dir = schema_dir
        self.shared_dir = shared_dir
        self._types = None
        self._resolved = {}

    def shared_types(self):
        if self._types is None:
            self._types = {}
            for entry in sorted(os.scandir(self.shared_dir),
                                key=lambda e: e.name):
                if entry.is_file() and entry.name.endswith('.json'):
                    with open(entry.path) as f:
                        self._types[entry.name] = json.load(f)
        return self._types

    def names(self):
        return sorted(os.path.splitext(f)[0]
                      for f in os.listdir(self.schema_dir)
                      if f.endswith('.json'))

    def load(self, name):
        if name not in self._resolved:
            path = os.path.join(self.schema_dir, name + '.json')
            if not os.path.isfile(path):
                raise KeyError("no {} schema; udrfs ships {}".format(
                    name, ", ".join(self.names())))
            with open(path) as f:
                schema = json.load(f)
            self._resolved[name] = resolve_schema_references(
                schema, self.shared_types())
        return self._resolved[name]
