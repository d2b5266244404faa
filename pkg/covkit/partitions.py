"""Balanced partition families and their (P1)/(P2) verifiers.

A family is a stack of functions [0, m) -> [0, k) stored as the rows of a
read-only (|F| x m) integer array. Two constructions are provided:

* `random_family`: uniform functions filtered for balanced buckets;
* `deterministic_family`: coordinate projections of the hypercube [k]^d,
  restricted to the lexicographically first m points of its lowest diagonal
  slices (points whose coordinate sum mod k is small).

Balance is always decided with integer arithmetic: a bucket of size b out of
a set of size s is balanced for slack (1+eps) iff b * k <= (1+eps) * s.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import NamedTuple, Optional, Tuple

import numpy as np
from tqdm import tqdm

from covkit.utils.config import resolve_budget
from covkit.utils.enumeration import check_budget, lex_vectors
from covkit.utils.errors import BadParams, EmptyFamily, SchemaError, TooLarge

logger = logging.getLogger(__name__)


class CheckResult(NamedTuple):
  ok: bool
  counterexample: Optional[Tuple] = None


class DiagonalUniverse(NamedTuple):
  """First m points of the slices U_0, ..., U_{slices-1} of [k]^d, in lex order."""
  points: np.ndarray
  slices: int


@dataclass(frozen=True, eq=False)
class BalancedPartitionFamily:
  """
  Collection of bucket assignments of the universe [0, m) into k buckets.

  Parameters
  ----------
  m: int
    universe size
  k: int
    number of buckets
  functions: array-like, shape (|F|, m)
    row i holds f_i(0), ..., f_i(m-1), values in [0, k)
  bucket_slack: Rational
    declared (P1) slack c: every bucket of every function should hold at
    most c*m/k elements. Constructors guarantee it; explicit families are
    checked with `check_p1`.
  alpha, epsilon: Rational, optional
    parameters the family was built for
  guarantee_regime: bool
    whether the construction's (P2) guarantee provably applies
  """
  m: int
  k: int
  functions: np.ndarray
  bucket_slack: Fraction
  alpha: Optional[Fraction] = None
  epsilon: Optional[Fraction] = None
  guarantee_regime: bool = False
  metadata: dict = field(default_factory=dict, repr=False)

  def __post_init__(self):
    if self.m < 1 or self.k < 1:
      raise BadParams('need m >= 1 and k >= 1, got m={} k={}'.format(self.m, self.k))
    functions = np.array(self.functions, dtype=np.int64).reshape(-1, self.m)
    if functions.size and (functions.min() < 0 or functions.max() >= self.k):
      raise BadParams('function values must lie in [0, {})'.format(self.k))
    functions.setflags(write=False)
    object.__setattr__(self, 'functions', functions)
    object.__setattr__(self, 'bucket_slack', Fraction(self.bucket_slack))
    if self.bucket_slack <= 0:
      raise BadParams('bucket slack must be positive, got {}'.format(self.bucket_slack))

  def __len__(self):
    return self.functions.shape[0]

  def __eq__(self, other):
    if not isinstance(other, BalancedPartitionFamily):
      return NotImplemented
    return (self.m == other.m and self.k == other.k
            and self.bucket_slack == other.bucket_slack
            and self.guarantee_regime == other.guarantee_regime
            and np.array_equal(self.functions, other.functions))

  __hash__ = None

  def bucket(self, i, j):
    return tuple(int(x) for x in np.nonzero(self.functions[i] == j)[0])

  def bucket_counts(self):
    """(|F| x k) array of bucket sizes."""
    return bucket_counts(self.functions, self.k)


########################
# HELPERS
########################

def log_ceil(m, k):
  """Smallest d >= 1 with k**d >= m."""
  d, power = 1, k
  while power < m:
    d += 1
    power *= k
  return d


def rand_family_size(k, alpha, epsilon):
  """Number of functions sampled by `random_family`: ceil(12k / (eps^2 alpha))."""
  bound = Fraction(12 * k) / (Fraction(epsilon) ** 2 * Fraction(alpha))
  return -((-bound.numerator) // bound.denominator)


def bucket_counts(functions, k):
  n_functions = functions.shape[0]
  offsets = functions + k * np.arange(n_functions, dtype=np.int64)[:, None]
  return np.bincount(offsets.reshape(-1), minlength=n_functions * k).reshape(n_functions, k)


def _covered_subsets(functions, subsets, k, epsilon):
  """Flags the rows of a (B x s) subset index array balanced by some function."""
  covered = np.zeros(subsets.shape[0], dtype=bool)
  for row in functions:
    pending = np.nonzero(~covered)[0]
    if not pending.size:
      break
    counts = bucket_counts(row[subsets[pending]], k)
    covered[pending] = _balanced_mask(counts, subsets.shape[1], k, epsilon)
  return covered


def _balanced_mask(counts, size, k, epsilon):
  """Per-function flag: all buckets <= (1+eps)*size/k, compared in integers."""
  slack = 1 + Fraction(epsilon)
  return (counts * k * slack.denominator <= slack.numerator * size).all(axis=-1)


def subset_size(m, alpha):
  size = Fraction(alpha) * m
  if size.denominator != 1:
    raise BadParams('alpha*m must be an integer, got {}*{} = {}'.format(alpha, m, size))
  size = int(size)
  if not 0 <= size <= m:
    raise BadParams('alpha*m = {} outside [0, {}]'.format(size, m))
  return size


########################
# CONSTRUCTIONS
########################

def hypercube_family(k, d, alpha=None, epsilon=None, budget=None):
  """
  The d coordinate projections of [k]^d.

  Points are numbered in lexicographic order, so function i sends point p
  to its i-th coordinate and every bucket holds exactly k^(d-1) points.
  When alpha and epsilon are given, `guarantee_regime` records whether
  d >= 4k/(eps^2 alpha), the dimension from which some projection balances
  every subset of size alpha*k^d.
  """
  if k < 2 or d < 1:
    raise BadParams('hypercube needs k >= 2 and d >= 1, got k={} d={}'.format(k, d))
  budget = resolve_budget(budget, 'hypercube')
  m = check_budget(k ** d, budget, 'hypercube points', TooLarge)
  points = lex_vectors(k, d, 0, m)

  regime = False
  if alpha is not None and epsilon is not None:
    regime = d >= Fraction(4 * k) / (Fraction(epsilon) ** 2 * Fraction(alpha))
  family = BalancedPartitionFamily(m, k, points.T, Fraction(1),
                                   alpha=None if alpha is None else Fraction(alpha),
                                   epsilon=None if epsilon is None else Fraction(epsilon),
                                   guarantee_regime=bool(regime),
                                   metadata={'construction': 'hypercube', 'd': d, 'points': points})
  logger.info('hypercube family k=%d d=%d over %d points', k, d, m)
  return family


def diagonal_universe(m, k, d, budget=None):
  """
  Lexicographically smallest m points of the lowest diagonal slices of [k]^d.

  With c = ceil(m / k^(d-1)) the points come from U_0 | ... | U_{c-1} where
  U_l = {x : sum(x) mod k = l}. Each slice holds k^(d-1) points, so c <= k
  and the selection always succeeds for 1 <= m <= k^d.
  """
  if k < 2 or d < 1:
    raise BadParams('need k >= 2 and d >= 1, got k={} d={}'.format(k, d))
  if not 1 <= m <= k ** d:
    raise BadParams('universe size {} outside [1, {}^{}]'.format(m, k, d))
  budget = resolve_budget(budget, 'hypercube')
  total = check_budget(k ** d, budget, 'hypercube points', TooLarge)

  slices = -(-m // k ** (d - 1))
  cube = lex_vectors(k, d, 0, total)
  in_slices = cube[cube.sum(axis=1) % k < slices]
  points = in_slices[:m]
  points.setflags(write=False)
  return DiagonalUniverse(points, slices)


def _slice_regime(m, k, eta, epsilon, d):
  """Exact test of m >= k^(4k^2 / (eps^2 eta))."""
  exponent = Fraction(4 * k * k) / (Fraction(epsilon) ** 2 * Fraction(eta))
  # m <= k^d, so a larger exponent can never be met
  if exponent > d:
    return False
  return m ** exponent.denominator >= k ** exponent.numerator


def deterministic_family(m, k, eta, epsilon, budget=None):
  """
  Derandomized balanced partition family of size ceil(log_k m).

  Parameters
  ----------
  m: int
    universe size, at least k
  k: int
    number of buckets, at least 2
  eta, epsilon: Rational
    target (P2) parameters; they only decide the `guarantee_regime` flag
    (m >= k^(4k^2/(eps^2 eta))), the construction itself does not use them.

  Returns
  -------
  BalancedPartitionFamily
    projections of [k]^d restricted to `diagonal_universe(m, k, d)` and
    relabeled so that element i is the i-th selected point. Every bucket
    holds fewer than 2m/k elements; the declared bucket slack is 2.
  """
  if k < 2 or m < k:
    raise BadParams('deterministic family needs k >= 2 and m >= k, got m={} k={}'.format(m, k))
  eta, epsilon = Fraction(eta), Fraction(epsilon)
  if eta <= 0 or epsilon <= 0:
    raise BadParams('eta and epsilon must be positive, got eta={} epsilon={}'.format(eta, epsilon))

  d = log_ceil(m, k)
  universe = diagonal_universe(m, k, d, budget=budget)
  regime = _slice_regime(m, k, eta, epsilon, d)
  family = BalancedPartitionFamily(m, k, universe.points.T, Fraction(2),
                                   alpha=eta, epsilon=epsilon, guarantee_regime=regime,
                                   metadata={'construction': 'deterministic', 'd': d,
                                             'slices': universe.slices, 'points': universe.points})
  assert (family.bucket_counts() * k < 2 * m).all()
  logger.info('deterministic family m=%d k=%d: %d functions over %d slices',
              m, k, d, universe.slices)
  return family


def random_family(m, k, alpha, epsilon, seed, budget=None):
  """
  Randomized balanced partition family.

  Draws t = ceil(12k / (eps^2 alpha)) uniform functions from a RandomState
  seeded with `seed` and keeps, in draw order, those whose buckets all hold
  at most (1+eps)m/k elements. `metadata` records t and the retained draw
  indices; `guarantee_regime` records m >= 6k ln(2k) / (eps^2 alpha).
  """
  alpha, epsilon = Fraction(alpha), Fraction(epsilon)
  if m < 1 or k < 2:
    raise BadParams('random family needs m >= 1 and k >= 2, got m={} k={}'.format(m, k))
  if not 0 < alpha <= 1 or not 0 < epsilon < 1:
    raise BadParams('need 0 < alpha <= 1 and 0 < epsilon < 1, got alpha={} epsilon={}'.format(
      alpha, epsilon))
  t = rand_family_size(k, alpha, epsilon)
  budget = resolve_budget(budget, 'enumeration')
  check_budget(t * m, budget, 'sampled function values', TooLarge)

  rng = np.random.RandomState(seed)
  samples = rng.randint(0, k, size=(t, m)).astype(np.int64)
  counts = bucket_counts(samples, k)
  slack = 1 + epsilon
  keep = np.nonzero((counts.max(axis=1) * k * slack.denominator <= slack.numerator * m))[0]
  if keep.size == 0:
    raise EmptyFamily('all {} sampled functions violate the bucket bound; try another seed'.format(t))

  regime = m * epsilon ** 2 * alpha >= 6 * k * math.log(2 * k)
  family = BalancedPartitionFamily(m, k, samples[keep], slack, alpha=alpha, epsilon=epsilon,
                                   guarantee_regime=bool(regime),
                                   metadata={'construction': 'random', 'seed': seed, 'drawn': t,
                                             'retained': [int(i) for i in keep]})
  logger.info('random family m=%d k=%d: kept %d of %d samples', m, k, len(keep), t)
  return family


########################
# VERIFIERS
########################

def check_p1(F):
  """
  Every bucket of every function holds at most bucket_slack*m/k elements.

  Returns
  -------
  CheckResult
    counterexample is the first violating (function index, bucket) pair.
  """
  slack = F.bucket_slack
  counts = F.bucket_counts()
  bad = counts * F.k * slack.denominator > slack.numerator * F.m
  if not bad.any():
    return CheckResult(True)
  f, j = np.argwhere(bad)[0]
  return CheckResult(False, (int(f), int(j)))


def is_balanced(F, i, subset, epsilon):
  subset = np.asarray(sorted(subset), dtype=np.int64)
  counts = np.bincount(F.functions[i, subset], minlength=F.k)
  return bool(_balanced_mask(counts, len(subset), F.k, epsilon))


def find_balancing_partition(F, S, epsilon):
  """Smallest index i whose buckets split S into parts <= (1+eps)|S|/k, or None."""
  subset = np.asarray(sorted(S), dtype=np.int64)
  if subset.size and (subset.min() < 0 or subset.max() >= F.m):
    raise BadParams('subset is not contained in [0, {})'.format(F.m))
  if len(F) == 0:
    return None
  counts = bucket_counts(F.functions[:, subset], F.k)
  hits = np.nonzero(_balanced_mask(counts, subset.size, F.k, epsilon))[0]
  return int(hits[0]) if hits.size else None


def check_p2_exhaustive(F, alpha, epsilon, budget=None, chunk_size=4096, verbose=False):
  """
  Every subset of size alpha*m is balanced by some member of F.

  Subsets are visited in lexicographic order, so the reported counterexample
  is the lexicographically first unbalanced subset.

  Raises
  ------
  BudgetExceeded
    when C(m, alpha*m) exceeds the budget; fall back to `check_p2_sampled`.
  """
  size = subset_size(F.m, alpha)
  budget = resolve_budget(budget, 'enumeration')
  total = check_budget(comb(F.m, size), budget, 'subsets')

  combos = itertools.combinations(range(F.m), size)
  n_chunks = -(-total // chunk_size)
  for _ in tqdm(range(n_chunks), desc='P2 subsets', disable=not verbose):
    chunk = list(itertools.islice(combos, chunk_size))
    subsets = np.array(chunk, dtype=np.int64).reshape(len(chunk), size)
    if len(F) == 0:
      return CheckResult(False, tuple(int(x) for x in subsets[0]))
    covered = _covered_subsets(F.functions, subsets, F.k, epsilon)
    if not covered.all():
      first = int(np.argmin(covered))
      return CheckResult(False, tuple(int(x) for x in subsets[first]))
  return CheckResult(True)


def check_p2_sampled(F, alpha, epsilon, trials, seed):
  """Number of `trials` uniform subsets of size alpha*m balanced by no member of F."""
  size = subset_size(F.m, alpha)
  rng = np.random.RandomState(seed)
  subsets = np.array([np.sort(rng.choice(F.m, size=size, replace=False)) for _ in range(trials)],
                     dtype=np.int64).reshape(trials, size)
  if len(F) == 0:
    return trials
  covered = _covered_subsets(F.functions, subsets, F.k, epsilon)
  failures = int(trials - covered.sum())
  logger.info('sampled P2 check: %d of %d subsets unbalanced', failures, trials)
  return failures


########################
# PERSISTENCE
########################

def family_to_dict(F):
  return {'m': F.m, 'k': F.k,
          'bucket_slack': [F.bucket_slack.numerator, F.bucket_slack.denominator],
          'functions': [[int(v) for v in row] for row in F.functions],
          'guarantee_regime': bool(F.guarantee_regime)}


def family_from_dict(doc):
  num, den = doc['bucket_slack']
  if den <= 0:
    raise SchemaError('bucket_slack', 'denominator must be positive')
  for i, row in enumerate(doc['functions']):
    if len(row) != doc['m']:
      raise SchemaError('functions.{}'.format(i), 'expected {} values, got {}'.format(doc['m'], len(row)))
    if any(v < 0 or v >= doc['k'] for v in row):
      raise SchemaError('functions.{}'.format(i), 'values must lie in [0, {})'.format(doc['k']))
  return BalancedPartitionFamily(doc['m'], doc['k'],
                                 np.array(doc['functions'], dtype=np.int64).reshape(-1, doc['m']),
                                 Fraction(num, den), guarantee_regime=doc['guarantee_regime'])
