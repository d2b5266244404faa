"""Problem instances, gap thresholds, JSON persistence and generators.

Four problem forms are modelled, each with exact rational thresholds:

  MaxLinInstance  (A, b, c, s)        YES: min_x |Ax - b|_0 <= (1-c)m
                                      NO:  min_x |Ax - b|_0 >  (1-s)m
  MldInstance     (H, u, ell, gamma)  YES: some Hx = u with |x|_0 <= ell
                                      NO:  every Hx = u has |x|_0 > gamma*ell
  KMldInstance    (M_k, u, k, gamma)  as MLD with ell = k, plus column labels
  NcpInstance     (A', t', k, gamma)  YES: min_z |A'z - t'|_0 <= k
                                      NO:  min_z |A'z - t'|_0 >  gamma*k
"""
import enum
import json
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from covkit.gfmat import (FieldMatrix, FieldVector, check_modulus,
                          mat_vec_mul, _rref_array)
from covkit.utils.errors import BadParams, DimensionMismatch, SchemaError, ValidationError
from covkit.utils.schemas import (COVER_SCHEMA, FAMILY_SCHEMA, INSTANCE_SCHEMA,
                                  KIND_FIELDS, validate_document)

logger = logging.getLogger(__name__)

Rational = Fraction

_RATIONAL_RE = re.compile(r'^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$')


def parse_rational(text):
  """Parse "num/den" or an integer; decimal and float notations are rejected."""
  if isinstance(text, Fraction):
    return text
  if isinstance(text, int) and not isinstance(text, bool):
    return Fraction(text)
  match = _RATIONAL_RE.match(str(text))
  if match is None:
    raise BadParams('expected a rational "num/den", got {!r}'.format(text))
  num, den = match.groups()
  den = int(den) if den is not None else 1
  if den == 0:
    raise BadParams('zero denominator in {!r}'.format(text))
  return Fraction(int(num), den)


def rational_to_json(value):
  value = Fraction(value)
  return [value.numerator, value.denominator]


def rational_from_json(pair, path):
  num, den = pair
  if den <= 0:
    raise SchemaError(path, 'denominator must be positive')
  return Fraction(num, den)


def ceil_fraction(value):
  value = Fraction(value)
  return -((-value.numerator) // value.denominator)


def floor_fraction(value):
  value = Fraction(value)
  return value.numerator // value.denominator


########################
# INSTANCE TYPES
########################

@dataclass(frozen=True)
class ColumnLabel:
  """Sparse vector of F_q^m naming one column of a grouped matrix."""
  indices: Tuple[int, ...]
  coefficients: Tuple[int, ...]

  def __post_init__(self):
    indices = tuple(int(i) for i in self.indices)
    coefficients = tuple(int(c) for c in self.coefficients)
    if len(indices) != len(coefficients):
      raise BadParams('label has {} indices but {} coefficients'.format(
        len(indices), len(coefficients)))
    if any(b <= a for a, b in zip(indices, indices[1:])):
      raise BadParams('label indices must be strictly increasing: {}'.format(indices))
    if any(i < 0 for i in indices):
      raise BadParams('label indices must be non-negative: {}'.format(indices))
    if any(c <= 0 for c in coefficients):
      raise BadParams('label coefficients must be nonzero: {}'.format(coefficients))
    object.__setattr__(self, 'indices', indices)
    object.__setattr__(self, 'coefficients', coefficients)

  @classmethod
  def from_vector(cls, x):
    support = x.support
    return cls(support, tuple(int(x.values[i]) for i in support))

  @property
  def weight(self):
    return len(self.indices)

  def sort_key(self):
    return (len(self.indices), self.indices, self.coefficients)

  def to_vector(self, m, q):
    values = np.zeros(m, dtype=np.int64)
    values[list(self.indices)] = self.coefficients
    return FieldVector(q, values)

  def to_json(self):
    return [[i, c] for i, c in zip(self.indices, self.coefficients)]


@dataclass(frozen=True)
class MaxLinInstance:
  A: FieldMatrix
  b: FieldVector
  c: Fraction
  s: Fraction

  def __post_init__(self):
    object.__setattr__(self, 'c', Fraction(self.c))
    object.__setattr__(self, 's', Fraction(self.s))
    if not 0 < self.s < self.c < 1:
      raise BadParams('thresholds must satisfy 0 < s < c < 1, got c={} s={}'.format(self.c, self.s))
    if self.A.q != self.b.q:
      raise DimensionMismatch('A and b live over different fields')
    if len(self.b) != self.A.rows:
      raise DimensionMismatch('b has length {} but A has {} rows'.format(len(self.b), self.A.rows))

  kind = 'maxlin'

  @property
  def q(self):
    return self.A.q

  @property
  def m(self):
    return self.A.rows

  @property
  def n(self):
    return self.A.cols


@dataclass(frozen=True)
class MldInstance:
  H: FieldMatrix
  u: FieldVector
  ell: int
  gamma: Fraction

  def __post_init__(self):
    object.__setattr__(self, 'gamma', Fraction(self.gamma))
    object.__setattr__(self, 'ell', int(self.ell))
    if self.gamma <= 1:
      raise BadParams('gap gamma must exceed 1, got {}'.format(self.gamma))
    if not 0 <= self.ell <= self.H.cols:
      raise BadParams('ell must lie in [0, {}], got {}'.format(self.H.cols, self.ell))
    if self.H.q != self.u.q:
      raise DimensionMismatch('H and u live over different fields')
    if len(self.u) != self.H.rows:
      raise DimensionMismatch('u has length {} but H has {} rows'.format(len(self.u), self.H.rows))

  kind = 'mld'

  @property
  def q(self):
    return self.H.q

  @property
  def n(self):
    return self.H.cols


def label_matrix(labels, m, q):
  """m x len(labels) matrix whose j-th column is labels[j]."""
  L = np.zeros((m, len(labels)), dtype=np.int64)
  for j, label in enumerate(labels):
    L[list(label.indices), j] = label.coefficients
  return FieldMatrix(q, L)


def _source_consistent(matrix, labels, m):
  """True iff some M with M . labels[j] = matrix[:, j] for every j exists."""
  q = matrix.q
  L = label_matrix(labels, m, q).entries
  _, rank_labels, _ = _rref_array(L, q)
  _, rank_joint, _ = _rref_array(np.concatenate([L, matrix.entries], axis=0), q)
  return rank_labels == rank_joint


def recover_source_matrix(inst):
  """
  A source matrix M (d x m_source) reproducing every grouped column.

  Solves M L = M_k row by row; coordinates never touched by a label come
  out as zero columns.
  """
  if inst.source is not None:
    return inst.source
  q = inst.q
  L = label_matrix(inst.labels, inst.m_source, q)
  # M L = M_k  <=>  L^T M^T = M_k^T
  Lt = L.entries.T
  rows = []
  for r in range(inst.matrix.rows):
    augmented = np.concatenate([Lt, inst.matrix.entries[r].reshape(-1, 1)], axis=1)
    R, _, pivots = _rref_array(augmented, q)
    if pivots and pivots[-1] == inst.m_source:
      raise ValidationError('grouped row {} is not generated by the labels'.format(r))
    row = np.zeros(inst.m_source, dtype=np.int64)
    for i, p in enumerate(pivots):
      row[p] = R[i, -1]
    rows.append(row)
  return FieldMatrix(q, np.array(rows, dtype=np.int64).reshape(inst.matrix.rows, inst.m_source))


@dataclass(frozen=True)
class KMldInstance:
  """
  Parameterized MLD instance produced by grouping.

  Column j of `matrix` equals M . labels[j] for the source matrix M of the
  grouping. When `source` is given the identity is checked exactly, otherwise
  the existence of such an M is checked.
  """
  matrix: FieldMatrix
  target: FieldVector
  k: int
  gamma: Fraction
  labels: Tuple[ColumnLabel, ...]
  m_source: int
  source: Optional[FieldMatrix] = field(default=None, compare=False, repr=False)
  provenance: dict = field(default_factory=dict, compare=False, repr=False)

  def __post_init__(self):
    object.__setattr__(self, 'gamma', Fraction(self.gamma))
    object.__setattr__(self, 'labels', tuple(self.labels))
    object.__setattr__(self, 'k', int(self.k))
    if self.k < 1:
      raise BadParams('k must be positive, got {}'.format(self.k))
    if self.gamma <= 0:
      raise BadParams('gamma must be positive, got {}'.format(self.gamma))
    if self.matrix.q != self.target.q:
      raise DimensionMismatch('matrix and target live over different fields')
    if len(self.target) != self.matrix.rows:
      raise DimensionMismatch('target has length {} but matrix has {} rows'.format(
        len(self.target), self.matrix.rows))
    if len(self.labels) != self.matrix.cols:
      raise DimensionMismatch('{} labels for {} columns'.format(len(self.labels), self.matrix.cols))
    if len(set(self.labels)) != len(self.labels):
      raise BadParams('column labels must be pairwise distinct')
    for label in self.labels:
      if label.indices and label.indices[-1] >= self.m_source:
        raise BadParams('label index {} outside [0, {})'.format(label.indices[-1], self.m_source))
      if any(c >= self.q for c in label.coefficients):
        raise BadParams('label coefficient outside F_{}'.format(self.q))
    if self.source is not None:
      if self.source.shape != (self.matrix.rows, self.m_source):
        raise DimensionMismatch('source matrix has shape {}'.format(self.source.shape))
      expected = (self.source.entries @ label_matrix(self.labels, self.m_source, self.q).entries) % self.q
      if not np.array_equal(expected, self.matrix.entries):
        bad = int(np.nonzero((expected != self.matrix.entries).any(axis=0))[0][0])
        raise ValidationError('column {} differs from M . labels[{}]'.format(bad, bad))
    elif not _source_consistent(self.matrix, self.labels, self.m_source):
      raise ValidationError('columns are not M . labels for any source matrix M')

  kind = 'kmld'

  @property
  def q(self):
    return self.matrix.q

  @property
  def n(self):
    return self.matrix.cols

  def label_index(self):
    return {label: j for j, label in enumerate(self.labels)}


@dataclass(frozen=True)
class NcpInstance:
  A: FieldMatrix
  t: FieldVector
  k: int
  gamma: Fraction

  def __post_init__(self):
    object.__setattr__(self, 'gamma', Fraction(self.gamma))
    object.__setattr__(self, 'k', int(self.k))
    if self.gamma <= 1:
      raise BadParams('gap gamma must exceed 1, got {}'.format(self.gamma))
    if self.k < 1:
      raise BadParams('k must be positive, got {}'.format(self.k))
    if self.A.q != self.t.q:
      raise DimensionMismatch('A and t live over different fields')
    if len(self.t) != self.A.rows:
      raise DimensionMismatch('t has length {} but A has {} rows'.format(len(self.t), self.A.rows))

  kind = 'ncp'

  @property
  def q(self):
    return self.A.q


class Verdict(enum.Enum):
  YES = 'YES'
  NO = 'NO'
  NEITHER = 'NEITHER'


@dataclass(frozen=True)
class GapVerdict:
  verdict: Verdict
  optimum: Optional[int]
  witness: Optional[FieldVector] = None

  def to_json(self):
    return {'verdict': self.verdict.value,
            'optimum': self.optimum,
            'witness': None if self.witness is None else self.witness.tolist()}


def yes_threshold(inst):
  """Largest optimum for which the instance is a YES instance."""
  if inst.kind == 'maxlin':
    return floor_fraction((1 - inst.c) * inst.m)
  if inst.kind == 'mld':
    return inst.ell
  return inst.k


def no_threshold(inst):
  """The instance is a NO instance iff its optimum exceeds this rational."""
  if inst.kind == 'maxlin':
    return (1 - inst.s) * inst.m
  if inst.kind == 'mld':
    return inst.gamma * inst.ell
  return inst.gamma * inst.k


########################
# JSON PERSISTENCE
########################

def _matrix_block(kind, matrix, target):
  return {'kind': kind, 'q': matrix.q, 'rows': matrix.rows, 'cols': matrix.cols,
          'entries': matrix.flat(), 'target': target.tolist()}


def instance_to_dict(inst):
  if inst.kind == 'maxlin':
    doc = _matrix_block('maxlin', inst.A, inst.b)
    doc['thresholds'] = {'c': rational_to_json(inst.c), 's': rational_to_json(inst.s)}
  elif inst.kind == 'mld':
    doc = _matrix_block('mld', inst.H, inst.u)
    doc['thresholds'] = {'gamma': rational_to_json(inst.gamma)}
    doc['ell'] = inst.ell
  elif inst.kind == 'kmld':
    doc = _matrix_block('kmld', inst.matrix, inst.target)
    doc['thresholds'] = {'gamma': rational_to_json(inst.gamma)}
    doc['k'] = inst.k
    doc['labels'] = [label.to_json() for label in inst.labels]
    doc['m_source'] = inst.m_source
  elif inst.kind == 'ncp':
    doc = _matrix_block('ncp', inst.A, inst.t)
    doc['thresholds'] = {'gamma': rational_to_json(inst.gamma)}
    doc['k'] = inst.k
  else:
    raise BadParams('unknown instance kind {!r}'.format(inst.kind))
  return doc


def _check_kind_fields(doc):
  layout = KIND_FIELDS[doc['kind']]
  allowed = set(INSTANCE_SCHEMA['required']) | set(layout['fields'])
  for key in sorted(doc):
    if key not in allowed:
      raise SchemaError(key, 'field not allowed for kind {!r}'.format(doc['kind']))
  for key in sorted(doc['thresholds']):
    if key not in layout['thresholds']:
      raise SchemaError('thresholds.' + key, 'threshold not allowed for kind {!r}'.format(doc['kind']))


def instance_from_dict(doc):
  """
  Validate and decode an instance document.

  Structural problems are reported by jsonschema; semantic ones (modulus,
  entry ranges, thresholds, label consistency) are re-raised as SchemaError
  naming the field at fault.
  """
  validate_document(doc, INSTANCE_SCHEMA)
  _check_kind_fields(doc)

  try:
    q = check_modulus(doc['q'])
  except ValidationError as e:
    raise SchemaError('q', str(e))

  def decode(path, builder):
    try:
      return builder()
    except SchemaError:
      raise
    except ValidationError as e:
      raise SchemaError(path, str(e))
    except OverflowError:
      raise SchemaError(path, 'integer does not fit in 64 bits')

  matrix = decode('entries', lambda: FieldMatrix.from_flat(q, doc['rows'], doc['cols'], doc['entries']))
  target = decode('target', lambda: FieldVector(q, np.asarray(doc['target'], dtype=np.int64)))
  thresholds = {key: rational_from_json(value, 'thresholds.' + key)
                for key, value in doc['thresholds'].items()}

  kind = doc['kind']
  if kind == 'maxlin':
    return decode('thresholds', lambda: MaxLinInstance(matrix, target, thresholds['c'], thresholds['s']))
  if kind == 'mld':
    return decode('ell', lambda: MldInstance(matrix, target, doc['ell'], thresholds['gamma']))
  if kind == 'ncp':
    return decode('thresholds', lambda: NcpInstance(matrix, target, doc['k'], thresholds['gamma']))

  labels = []
  for j, pairs in enumerate(doc['labels']):
    labels.append(decode('labels.{}'.format(j), lambda: ColumnLabel(
      tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))))
  return decode('labels', lambda: KMldInstance(matrix, target, doc['k'], thresholds['gamma'],
                                                tuple(labels), doc['m_source']))


def dumps(doc):
  return json.dumps(doc, sort_keys=True, separators=(',', ':')) + '\n'


def write_json(doc, path):
  with open(path, 'w', encoding='utf-8') as fh:
    fh.write(dumps(doc))


def read_json(path):
  with open(path, 'r', encoding='utf-8') as fh:
    try:
      text = fh.read()
    except UnicodeDecodeError as e:
      raise SchemaError('', 'not UTF-8 text: {}'.format(e))
  try:
    return json.loads(text)
  except json.JSONDecodeError as e:
    raise SchemaError('', 'not valid JSON: {}'.format(e))


def save_instance(inst, path):
  write_json(instance_to_dict(inst), path)
  logger.info('saved %s instance to %s', inst.kind, path)


def load_instance(path):
  return instance_from_dict(read_json(path))


def save_family(family, path):
  from covkit.partitions import family_to_dict
  write_json(family_to_dict(family), path)


def load_family(path):
  from covkit.partitions import family_from_dict
  doc = read_json(path)
  validate_document(doc, FAMILY_SCHEMA)
  return family_from_dict(doc)


def save_cover(cover, path):
  from covkit.covers import cover_to_dict
  write_json(cover_to_dict(cover), path)


def load_cover(path):
  from covkit.covers import cover_from_dict
  doc = read_json(path)
  validate_document(doc, COVER_SCHEMA)
  return cover_from_dict(doc)


########################
# GENERATORS
########################

def gen_planted_maxlin(n, m, q, c, seed, s=None):
  """
  MaxLin system built around a hidden assignment.

  Parameters
  ----------
  n: int
    number of variables
  m: int
    number of equations, at least 1
  q: int
    prime modulus
  c: Rational in (0, 1]
    fraction of equations the planted assignment satisfies; exactly
    ceil(c*m) rows are consistent with it and every other row is violated.
  seed: int
    seed of the numpy RandomState driving every draw
  s: Rational, optional
    soundness threshold stored on the instance, default half the
    completeness threshold.

  Returns
  -------
  (MaxLinInstance, planted x)
    With c = 1 the stored completeness threshold is 1 - 1/(2m), which gives
    the same integer YES predicate (zero violated equations) while keeping
    c < 1.
  """
  c = parse_rational(c)
  q = check_modulus(q)
  if not 0 < c <= 1:
    raise BadParams('planted fraction c must lie in (0, 1], got {}'.format(c))
  if m < 1 or n < 0:
    raise BadParams('need m >= 1 and n >= 0, got n={} m={}'.format(n, m))

  rng = np.random.RandomState(seed)
  A = rng.randint(0, q, size=(m, n)).astype(np.int64)
  x = rng.randint(0, q, size=n).astype(np.int64)
  n_sat = ceil_fraction(c * m)
  violated = rng.permutation(m)[n_sat:]
  b = (A @ x) % q
  if len(violated) and q > 1:
    offsets = rng.randint(1, q, size=len(violated))
    b[violated] = (b[violated] + offsets) % q

  completeness = c if c < 1 else 1 - Fraction(1, 2 * m)
  soundness = parse_rational(s) if s is not None else completeness / 2
  inst = MaxLinInstance(FieldMatrix(q, A), FieldVector(q, b), completeness, soundness)
  logger.info('planted MaxLin n=%d m=%d q=%d: %d equations violated by the plant', n, m, q, m - n_sat)
  return inst, FieldVector(q, x)


def gen_random_maxlin(n, m, q, seed, c=Fraction(1, 2), s=Fraction(1, 4)):
  """Uniformly random system; thresholds are placeholders until certified."""
  q = check_modulus(q)
  if m < 1 or n < 0:
    raise BadParams('need m >= 1 and n >= 0, got n={} m={}'.format(n, m))
  rng = np.random.RandomState(seed)
  A = FieldMatrix(q, rng.randint(0, q, size=(m, n)).astype(np.int64))
  b = FieldVector(q, rng.randint(0, q, size=m).astype(np.int64))
  return MaxLinInstance(A, b, parse_rational(c), parse_rational(s))


def certify_no_thresholds(inst, optimum):
  """
  Thresholds turning a solved system into a NO instance.

  Chooses s so that (1-s)m = optimum - 1/2 < optimum and c halfway between
  s and 1, so 0 < s < c < 1 holds whenever 1 <= optimum <= m.
  """
  if not 1 <= optimum <= inst.m:
    raise BadParams('a NO instance needs an optimum in [1, m], got {}'.format(optimum))
  s = 1 - Fraction(2 * optimum - 1, 2 * inst.m)
  c = (1 + s) / 2
  return MaxLinInstance(inst.A, inst.b, c, s)


def gen_random_mld(n, d, q, seed):
  """
  Uniform H (d x n) with a target u = Hx for a uniform x.

  Returns
  -------
  (H, u, x): the feasibility certificate x is returned alongside.
  """
  q = check_modulus(q)
  if not 0 <= d <= n:
    raise BadParams('need 0 <= d <= n, got d={} n={}'.format(d, n))
  rng = np.random.RandomState(seed)
  H = FieldMatrix(q, rng.randint(0, q, size=(d, n)).astype(np.int64))
  x = FieldVector(q, rng.randint(0, q, size=n).astype(np.int64))
  return H, mat_vec_mul(H, x), x


def violated_equations(inst, x):
  """|Ax - b|_0 for a MaxLin assignment x."""
  residual = (inst.A.entries @ x.values - inst.b.values) % inst.q
  return int(np.count_nonzero(residual))
