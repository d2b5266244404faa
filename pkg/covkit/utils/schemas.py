"""JSON schemas of every document covkit reads or writes."""
import jsonschema
from jsonschema.exceptions import best_match

from covkit.utils.errors import SchemaError

DRAFT = 'http://json-schema.org/draft-07/schema#'

INTEGER = {'type': 'integer'}
RATIONAL = {'type': 'array', 'items': INTEGER, 'minItems': 2, 'maxItems': 2}
INTEGER_LIST = {'type': 'array', 'items': INTEGER}
LABEL = {'type': 'array',
         'items': {'type': 'array', 'items': INTEGER, 'minItems': 2, 'maxItems': 2}}

INSTANCE_KINDS = ('maxlin', 'mld', 'kmld', 'ncp')

# Fields each kind must carry beyond the shared matrix/target block
KIND_FIELDS = {
  'maxlin': {'fields': (), 'thresholds': ('c', 's')},
  'mld': {'fields': ('ell',), 'thresholds': ('gamma',)},
  'kmld': {'fields': ('k', 'labels', 'm_source'), 'thresholds': ('gamma',)},
  'ncp': {'fields': ('k',), 'thresholds': ('gamma',)},
}


def _kind_rule(kind):
  layout = KIND_FIELDS[kind]
  return {'if': {'properties': {'kind': {'const': kind}}},
          'then': {'required': list(layout['fields']),
                   'properties': {'thresholds': {'required': list(layout['thresholds'])}}}}


INSTANCE_SCHEMA = {
  '$schema': DRAFT,
  'title': 'covkit problem instance',
  'type': 'object',
  'additionalProperties': False,
  'required': ['kind', 'q', 'rows', 'cols', 'entries', 'target', 'thresholds'],
  'properties': {
    'kind': {'enum': list(INSTANCE_KINDS)},
    'q': INTEGER,
    'rows': {'type': 'integer', 'minimum': 0},
    'cols': {'type': 'integer', 'minimum': 0},
    'entries': INTEGER_LIST,
    'target': INTEGER_LIST,
    'thresholds': {'type': 'object', 'additionalProperties': False,
                   'properties': {'c': RATIONAL, 's': RATIONAL, 'gamma': RATIONAL}},
    'ell': {'type': 'integer', 'minimum': 0},
    'k': {'type': 'integer', 'minimum': 1},
    'labels': {'type': 'array', 'items': LABEL},
    'm_source': {'type': 'integer', 'minimum': 0},
  },
  'allOf': [_kind_rule(kind) for kind in INSTANCE_KINDS],
}

FAMILY_SCHEMA = {
  '$schema': DRAFT,
  'title': 'covkit balanced partition family',
  'type': 'object',
  'additionalProperties': False,
  'required': ['m', 'k', 'bucket_slack', 'functions', 'guarantee_regime'],
  'properties': {
    'm': {'type': 'integer', 'minimum': 1},
    'k': {'type': 'integer', 'minimum': 1},
    'bucket_slack': RATIONAL,
    'functions': {'type': 'array', 'items': INTEGER_LIST},
    'guarantee_regime': {'type': 'boolean'},
  },
}

COVER_SCHEMA = {
  '$schema': DRAFT,
  'title': 'covkit cover family',
  'type': 'object',
  'additionalProperties': False,
  'required': ['m', 'k', 'alpha', 'epsilon', 'size_bound', 'sets'],
  'properties': {
    'm': {'type': 'integer', 'minimum': 1},
    'k': {'type': 'integer', 'minimum': 1},
    'alpha': RATIONAL,
    'epsilon': RATIONAL,
    'size_bound': RATIONAL,
    'sets': {'type': 'array', 'items': INTEGER_LIST},
  },
}

REPORT_SCHEMA = {
  '$schema': DRAFT,
  'title': 'covkit command report',
  'type': 'object',
  'required': ['command', 'ok', 'params'],
  'properties': {
    'command': {'type': 'string'},
    'ok': {'type': 'boolean'},
    'params': {'type': 'object'},
    'error': {'type': 'object',
              'required': ['type', 'message'],
              'properties': {'type': {'type': 'string'}, 'message': {'type': 'string'}}},
    'output': {'type': ['string', 'null']},
    'counterexample': {},
    'stages': {'type': 'array', 'items': {'type': 'object', 'required': ['stage']}},
    'thresholds': {'type': 'object', 'additionalProperties': RATIONAL},
  },
}


def error_path(error):
  return '.'.join(str(p) for p in error.absolute_path)


def validate_document(document, schema):
  """Raise SchemaError naming the offending field if `document` is invalid."""
  validator = jsonschema.Draft7Validator(schema)
  error = best_match(validator.iter_errors(document))
  if error is not None:
    raise SchemaError(error_path(error), error.message)
  return document
