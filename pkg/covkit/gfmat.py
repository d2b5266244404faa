"""Exact arithmetic and linear algebra over prime fields F_q.

Matrices and vectors are immutable wrappers around read-only int64 numpy
arrays whose entries live in [0, q). Products of two entries stay below
2^32 because q <= 65521, so a dot product over n coordinates fits int64
for any n this package can hold in memory.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Tuple

import numpy as np

from covkit.utils.errors import BadParams, DimensionMismatch, ZeroInverse

logger = logging.getLogger(__name__)

MAX_MODULUS = 65521


@lru_cache(maxsize=None)
def is_prime(q):
  if q < 2:
    return False
  if q % 2 == 0:
    return q == 2
  f = 3
  while f * f <= q:
    if q % f == 0:
      return False
    f += 2
  return True


def check_modulus(q):
  """Return q as an int if it is a supported prime modulus."""
  if isinstance(q, bool) or not isinstance(q, (int, np.integer)):
    raise BadParams('modulus must be an integer, got {!r}'.format(q))
  q = int(q)
  if not 2 <= q <= MAX_MODULUS or not is_prime(q):
    raise BadParams('modulus must be a prime in [2, {}], got {}'.format(MAX_MODULUS, q))
  return q


def _field_array(values, q, ndim, shape=None):
  raw = np.asarray(values)
  if raw.size and raw.dtype.kind not in 'iub':
    raise BadParams('field entries must be integers, got dtype {}'.format(raw.dtype))
  arr = np.array(raw, dtype=np.int64)
  if shape is not None:
    arr = arr.reshape(shape)
  if arr.ndim != ndim:
    raise DimensionMismatch('expected a {}-dimensional array, got shape {}'.format(ndim, arr.shape))
  if arr.size and (arr.min() < 0 or arr.max() >= q):
    raise BadParams('entries must lie in [0, {})'.format(q))
  arr.setflags(write=False)
  return arr


@dataclass(frozen=True)
class FieldElement:
  value: int
  q: int

  def __post_init__(self):
    q = check_modulus(self.q)
    value = int(self.value)
    if not 0 <= value < q:
      raise BadParams('value {} is not in [0, {})'.format(value, q))
    object.__setattr__(self, 'q', q)
    object.__setattr__(self, 'value', value)

  def _coerce(self, other):
    if isinstance(other, FieldElement):
      if other.q != self.q:
        raise DimensionMismatch('moduli differ: {} vs {}'.format(self.q, other.q))
      return other.value
    return int(other) % self.q

  def __add__(self, other):
    return FieldElement((self.value + self._coerce(other)) % self.q, self.q)

  __radd__ = __add__

  def __sub__(self, other):
    return FieldElement((self.value - self._coerce(other)) % self.q, self.q)

  def __mul__(self, other):
    return FieldElement((self.value * self._coerce(other)) % self.q, self.q)

  __rmul__ = __mul__

  def __neg__(self):
    return FieldElement((-self.value) % self.q, self.q)

  def __bool__(self):
    return self.value != 0

  def __int__(self):
    return self.value

  def inverse(self):
    return field_inv(self)


@dataclass(frozen=True, eq=False)
class FieldVector:
  q: int
  values: np.ndarray

  def __post_init__(self):
    q = check_modulus(self.q)
    object.__setattr__(self, 'q', q)
    object.__setattr__(self, 'values', _field_array(self.values, q, ndim=1))

  @classmethod
  def zeros(cls, n, q):
    return cls(q, np.zeros(n, dtype=np.int64))

  @classmethod
  def unit(cls, n, i, q, coefficient=1):
    values = np.zeros(n, dtype=np.int64)
    values[i] = coefficient % q
    return cls(q, values)

  def __len__(self):
    return len(self.values)

  def __eq__(self, other):
    if not isinstance(other, FieldVector):
      return NotImplemented
    return self.q == other.q and np.array_equal(self.values, other.values)

  def __hash__(self):
    return hash((self.q, len(self.values), self.values.tobytes()))

  def __repr__(self):
    return 'FieldVector(q={}, {})'.format(self.q, self.tolist())

  def element(self, i):
    return FieldElement(int(self.values[i]), self.q)

  @property
  def support(self):
    return tuple(int(i) for i in np.nonzero(self.values)[0])

  def tolist(self):
    return [int(v) for v in self.values]


@dataclass(frozen=True, eq=False)
class FieldMatrix:
  q: int
  entries: np.ndarray

  def __post_init__(self):
    q = check_modulus(self.q)
    object.__setattr__(self, 'q', q)
    object.__setattr__(self, 'entries', _field_array(self.entries, q, ndim=2))

  @classmethod
  def from_flat(cls, q, rows, cols, flat):
    """Build from a row-major entry list, as stored in instance files."""
    if rows < 0 or cols < 0 or len(flat) != rows * cols:
      raise DimensionMismatch('{} entries cannot fill a {}x{} matrix'.format(len(flat), rows, cols))
    return cls(q, np.asarray(flat, dtype=np.int64).reshape(rows, cols))

  @classmethod
  def zeros(cls, rows, cols, q):
    return cls(q, np.zeros((rows, cols), dtype=np.int64))

  @classmethod
  def identity(cls, n, q):
    return cls(q, np.eye(n, dtype=np.int64))

  @property
  def rows(self):
    return self.entries.shape[0]

  @property
  def cols(self):
    return self.entries.shape[1]

  @property
  def shape(self):
    return self.entries.shape

  def __eq__(self, other):
    if not isinstance(other, FieldMatrix):
      return NotImplemented
    return (self.q == other.q and self.shape == other.shape
            and np.array_equal(self.entries, other.entries))

  def __hash__(self):
    return hash((self.q, self.shape, self.entries.tobytes()))

  def __repr__(self):
    return 'FieldMatrix(q={}, {}x{}, {})'.format(self.q, self.rows, self.cols, self.tolist())

  def column(self, j):
    return FieldVector(self.q, self.entries[:, j])

  def row(self, i):
    return FieldVector(self.q, self.entries[i, :])

  def transpose(self):
    return FieldMatrix(self.q, self.entries.T)

  def tolist(self):
    return [[int(v) for v in row] for row in self.entries]

  def flat(self):
    return [int(v) for v in self.entries.reshape(-1)]


class RowEchelon(NamedTuple):
  matrix: FieldMatrix
  rank: int
  pivot_cols: Tuple[int, ...]


def field_inv(a):
  """
  Multiplicative inverse in F_q.

  Parameters
  ----------
  a: FieldElement
    nonzero element

  Returns
  -------
  b: FieldElement
    element with a*b = 1 mod q
  """
  if a.value == 0:
    raise ZeroInverse('0 has no inverse in F_{}'.format(a.q))
  return FieldElement(pow(a.value, -1, a.q), a.q)


def _check_same_field(*objs):
  moduli = {o.q for o in objs}
  if len(moduli) != 1:
    raise DimensionMismatch('operands live over different fields: {}'.format(sorted(moduli)))
  return moduli.pop()


def _rref_array(R, q):
  R = np.array(R, dtype=np.int64)
  n_rows, n_cols = R.shape
  pivots = []
  r = 0
  for c in range(n_cols):
    if r == n_rows:
      break
    nonzero = np.nonzero(R[r:, c])[0]
    if nonzero.size == 0:
      continue
    p = r + int(nonzero[0])
    if p != r:
      R[[r, p]] = R[[p, r]]
    R[r] = (R[r] * pow(int(R[r, c]), -1, q)) % q
    factors = R[:, c].copy()
    factors[r] = 0
    R = (R - np.outer(factors, R[r])) % q
    pivots.append(c)
    r += 1
  return R, r, tuple(pivots)


def rref(M):
  """
  Reduced row echelon form over F_q by Gauss-Jordan elimination.

  Parameters
  ----------
  M: FieldMatrix

  Returns
  -------
  RowEchelon
    (reduced matrix, rank, strictly increasing pivot columns)
  """
  R, rank_, pivots = _rref_array(M.entries, M.q)
  return RowEchelon(FieldMatrix(M.q, R), rank_, pivots)


def rank(M):
  return _rref_array(M.entries, M.q)[1]


def nullspace_basis(M):
  """
  Basis of {x : Mx = 0}, one basis vector per column.

  Parameters
  ----------
  M: FieldMatrix, shape (r, c)

  Returns
  -------
  N: FieldMatrix, shape (c, c - rank(M))
    column t is the kernel vector whose t-th free coordinate is 1 and whose
    other free coordinates are 0.
  """
  q = M.q
  R, rank_, pivots = _rref_array(M.entries, q)
  free = [c for c in range(M.cols) if c not in set(pivots)]
  basis = np.zeros((M.cols, len(free)), dtype=np.int64)
  for t, f in enumerate(free):
    basis[f, t] = 1
    for i, p in enumerate(pivots):
      basis[p, t] = (-R[i, f]) % q
  return FieldMatrix(q, basis)


def parity_check(A):
  """
  Canonical parity-check matrix of the code spanned by the columns of A.

  Rows of the result span the left kernel of A (H A = 0), are linearly
  independent and are given in reduced row echelon form, so the output is
  unique for a given A.

  Parameters
  ----------
  A: FieldMatrix, shape (m, n)

  Returns
  -------
  H: FieldMatrix, shape (m - rank(A), m)
  """
  left_kernel = nullspace_basis(A.transpose())
  H, _, _ = _rref_array(left_kernel.entries.T, A.q)
  logger.debug('parity check of %dx%d matrix has %d rows', A.rows, A.cols, H.shape[0])
  return FieldMatrix(A.q, H)


def mat_vec_mul(M, x):
  q = _check_same_field(M, x)
  if M.cols != len(x):
    raise DimensionMismatch('cannot multiply {}x{} matrix by vector of length {}'.format(
      M.rows, M.cols, len(x)))
  return FieldVector(q, (M.entries @ x.values) % q)


def mat_mul(A, B):
  q = _check_same_field(A, B)
  if A.cols != B.rows:
    raise DimensionMismatch('cannot multiply {}x{} by {}x{}'.format(A.rows, A.cols, B.rows, B.cols))
  return FieldMatrix(q, (A.entries @ B.entries) % q)


def vec_add(x, y):
  q = _check_same_field(x, y)
  if len(x) != len(y):
    raise DimensionMismatch('vector lengths differ: {} vs {}'.format(len(x), len(y)))
  return FieldVector(q, (x.values + y.values) % q)


def vec_sub(x, y):
  q = _check_same_field(x, y)
  if len(x) != len(y):
    raise DimensionMismatch('vector lengths differ: {} vs {}'.format(len(x), len(y)))
  return FieldVector(q, (x.values - y.values) % q)


def vec_scale(x, c):
  return FieldVector(x.q, (x.values * (int(c) % x.q)) % x.q)


def hamming_weight(x):
  return int(np.count_nonzero(x.values))


def solve_linear(H, u):
  """
  One solution of Hx = u, or None when u is outside the column space of H.

  The returned solution sets every free coordinate to zero.
  """
  q = _check_same_field(H, u)
  if H.rows != len(u):
    raise DimensionMismatch('target length {} does not match {} rows'.format(len(u), H.rows))
  augmented = np.concatenate([H.entries, u.values.reshape(-1, 1)], axis=1)
  R, _, pivots = _rref_array(augmented, q)
  if pivots and pivots[-1] == H.cols:
    return None
  x = np.zeros(H.cols, dtype=np.int64)
  for i, p in enumerate(pivots):
    x[p] = R[i, -1]
  return FieldVector(q, x)


def random_matrix(rows, cols, q, rng):
  """Uniform matrix; `rng` is a numpy RandomState."""
  return FieldMatrix(q, rng.randint(0, q, size=(rows, cols)).astype(np.int64))


def random_vector(n, q, rng):
  return FieldVector(q, rng.randint(0, q, size=n).astype(np.int64))
