"""JSON schemas for the documents dbinfer reads.

Every document is validated against a Draft 7 schema before it becomes a design,
mapping, schedule or run configuration.

.. ``jsonschema`` documentation:
   https://json-schema.org/
"""
import logging

import jsonschema
import munch

import dbinfer

logger = logging.getLogger(__name__)

_number = {
    "anyOf": [
        {"type": "number"},
        {"type": "string", "pattern": r"^-?\d+(\.\d+)?(/\d+)?$"},
        {
            "type": "object",
            "properties": {"num": {"type": "integer"}, "den": {"type": "integer"}},
            "required": ["num", "den"],
        },
    ]
}

_vector = {"type": "array", "items": {"type": "integer", "minimum": 0}}

_matrix = {"type": "array", "items": {"type": "array", "items": {"enum": [0, 1]}}}

DESIGN = munch.Munch.fromDict(
    {
        "title": "design",
        "type": "object",
        "properties": {
            "N": {"type": "integer", "minimum": 1},
            "kind": {
                "enum": ["explicit", "bernoulli", "complete", "ordered_sample", "cluster"]
            },
            "label": {"type": "string"},
            "params": {"type": "object"},
            "support": {"type": "array", "items": _vector},
            "mass_num": {"type": "array", "items": {"type": "integer", "minimum": 1}},
            "mass_den": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        },
        "required": ["N", "kind"],
        "if": {"properties": {"kind": {"const": "explicit"}}},
        "then": {"required": ["support", "mass_num", "mass_den"]},
        "else": {"required": ["params"]},
    }
)

SPACE = munch.Munch.fromDict(
    {
        "title": "design space",
        "type": "object",
        "properties": {
            "N": {"type": "integer", "minimum": 1},
            "rule": {"enum": ["product", "ordered", "explicit"]},
            "levels": {"type": "integer", "minimum": 1},
            "k": {"type": "integer", "minimum": 0},
            "upto": {"type": "boolean"},
            "vectors": {"type": "array", "items": _vector},
        },
        "required": ["N", "rule"],
        "if": {"properties": {"rule": {"const": "explicit"}}},
        "then": {"required": ["vectors"]},
    }
)

MAPPING = munch.Munch.fromDict(
    {
        "title": "exposure mapping",
        "type": "object",
        "properties": {
            "N": {"type": "integer", "minimum": 1},
            "kind": {
                "enum": [
                    "individualistic",
                    "carryover",
                    "survey",
                    "network",
                    "peer",
                    "table",
                ]
            },
            "levels": {"type": "integer", "minimum": 1},
            "adjacency": _matrix,
            "permutation": _vector,
            "table": {
                "type": "object",
                "properties": {
                    "rows": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "properties": {"z": _vector, "d": _vector},
                            "required": ["z", "d"],
                        },
                    },
                    "names": {"type": "object"},
                },
                "required": ["rows"],
            },
        },
        "required": ["kind"],
        "if": {"properties": {"kind": {"const": "network"}}},
        "then": {"required": ["adjacency"]},
        "else": {"not": {"required": ["adjacency"]}},
    }
)

SCHEDULE = munch.Munch.fromDict(
    {
        "title": "outcome schedule",
        "type": "object",
        "properties": {
            "kind": {"enum": ["table", "rule"]},
            "N": {"type": "integer", "minimum": 1},
            "placeholder": _number,
            "survey": {"type": "boolean"},
            "space": SPACE,
            "rows": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {"z": _vector, "y": {"type": "array", "items": _number}},
                    "required": ["z", "y"],
                },
            },
            "rule": {
                "type": "object",
                "properties": {"name": {"type": "string"}, "params": {"type": "object"}},
                "required": ["name"],
            },
        },
        "required": ["kind"],
        "if": {"properties": {"kind": {"const": "table"}}},
        "then": {"required": ["rows"]},
        "else": {"required": ["rule", "space"]},
    }
)

DATA = munch.Munch.fromDict(
    {
        "title": "realized data",
        "type": "object",
        "properties": {"z": _vector, "y": {"type": "array", "items": _number}},
        "required": ["z", "y"],
    }
)

SETTINGS = munch.Munch.fromDict(
    {
        "title": "settings",
        "type": "object",
        "properties": {
            "cap": {"type": "integer", "minimum": 1},
            "digits": {"type": "integer", "minimum": 1, "maximum": 17},
            "tolerance": {"type": "number", "minimum": 0},
            "threads": {"type": "integer", "minimum": 1},
        },
    }
)

_file_triple = {"required": ["design", "mapping", "schedule"], "not": {"required": ["corpus"]}}

RUN = munch.Munch.fromDict(
    {
        "title": "run configuration",
        "type": "object",
        "properties": {
            "command": {
                "enum": ["estimands", "check", "estimate", "simulate", "probabilities"]
            },
            "corpus": {"type": "string"},
            "design": {"type": "string"},
            "mapping": {"type": "string"},
            "schedule": {"type": "string"},
            "space": {"type": "string"},
            "output": {"type": "string"},
            "format": {"enum": ["json", "csv"]},
            "R": {"type": "integer", "minimum": 1},
            "seed": {"type": "integer", "minimum": 0},
            "level": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            "threads": {"type": "integer", "minimum": 1},
        },
        "required": ["command"],
        "oneOf": [
            {"required": ["corpus"], "not": {"required": ["design"]}},
            _file_triple,
            {"required": ["sweep"], "not": {"anyOf": [{"required": ["corpus"]}, {"required": ["design"]}]}},
        ],
    }
)


class _Implementation:
    """The default implementation of the validate_document hook."""

    @dbinfer.implementation
    def validate_document(document, schema):
        jsonschema.Draft7Validator(
            schema, format_checker=jsonschema.FormatChecker()
        ).validate(document)
        return True


dbinfer.manager.register(_Implementation, name=__name__)


def validate(document, schema) -> bool:
    """Validate a document against one of the schemas in this module.

Examples
--------

    >>> assert validate({'N': 2, 'kind': 'bernoulli', 'params': {'p': 0.5}}, DESIGN)
    >>> try:
    ...     validate({'N': 2, 'kind': 'explicit'}, DESIGN)
    ... except dbinfer.ValidationError:
    ...     print('missing support')
    missing support
    """
    return dbinfer.manager.hook.validate_document(document=document, schema=schema)
