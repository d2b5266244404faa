"""Cover families built from balanced partition families.

A ([m], k, alpha, eps)-cover family is a collection of small subsets of
[0, m) such that

  (C1) every member has at most (1+eps)*alpha*m/k elements, and
  (C2) every subset of size at most alpha*m is the disjoint union of
       exactly k members (the empty set may be used several times).

Members are stored as sorted index tuples, deduplicated and ordered by
(size, indices).
"""
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Tuple

from tqdm import tqdm

from covkit.partitions import CheckResult, check_p1, find_balancing_partition, subset_size
from covkit.utils.config import resolve_budget
from covkit.utils.enumeration import check_budget, subsets_upto
from covkit.utils.errors import BadParams, FamilyInvalid, NotBalanced, SchemaError, TooLarge

logger = logging.getLogger(__name__)


def _canonical_sets(sets, m):
  canonical = set()
  for s in sets:
    members = tuple(int(i) for i in s)
    if any(b <= a for a, b in zip(members, members[1:])):
      raise BadParams('member set must be strictly increasing: {}'.format(members))
    if members and (members[0] < 0 or members[-1] >= m):
      raise BadParams('member set {} not contained in [0, {})'.format(members, m))
    canonical.add(members)
  return tuple(sorted(canonical, key=lambda s: (len(s), s)))


@dataclass(frozen=True)
class CoverFamily:
  m: int
  k: int
  sets: Tuple[Tuple[int, ...], ...]
  alpha: Fraction
  epsilon: Fraction
  provenance: dict = field(default_factory=dict, compare=False, repr=False)

  def __post_init__(self):
    if self.m < 1 or self.k < 1:
      raise BadParams('need m >= 1 and k >= 1, got m={} k={}'.format(self.m, self.k))
    object.__setattr__(self, 'alpha', Fraction(self.alpha))
    object.__setattr__(self, 'epsilon', Fraction(self.epsilon))
    if not 0 <= self.alpha <= 1 or self.epsilon < 0:
      raise BadParams('need 0 <= alpha <= 1 and epsilon >= 0, got alpha={} epsilon={}'.format(
        self.alpha, self.epsilon))
    object.__setattr__(self, 'sets', _canonical_sets(self.sets, self.m))

  @property
  def size_bound(self):
    """(1+eps)*alpha*m/k, the largest member size allowed by (C1)."""
    return (1 + self.epsilon) * self.alpha * self.m / self.k

  @property
  def members(self):
    members = self.__dict__.get('_members')
    if members is None:
      members = frozenset(self.sets)
      object.__setattr__(self, '_members', members)
    return members

  def __len__(self):
    return len(self.sets)

  def __contains__(self, subset):
    return tuple(sorted(int(i) for i in subset)) in self.members


class ExactCover(tuple):
  """k pairwise-disjoint member sets together with the balancing function used."""

  def __new__(cls, parts, function_index=None):
    obj = super(ExactCover, cls).__new__(cls, parts)
    obj.function_index = function_index
    return obj


def cover_size_bound(F):
  """|F| * k * 2^ceil(c*m/k): at most this many distinct non-empty members."""
  per_bucket = Fraction(F.bucket_slack * F.m, F.k)
  return len(F) * F.k * 2 ** (-((-per_bucket.numerator) // per_bucket.denominator))


def cover_from_partition_family(F, alpha, epsilon, budget=None):
  """
  Every subset of every bucket small enough to satisfy (C1).

  Parameters
  ----------
  F: BalancedPartitionFamily
    must satisfy (P1) for its declared bucket slack
  alpha, epsilon: Rational
    cover parameters; members have at most floor((1+eps)*alpha*m/k) elements

  Raises
  ------
  FamilyInvalid
    if F violates (P1)
  TooLarge
    if enumerating the members would exceed the budget
  """
  p1 = check_p1(F)
  if not p1.ok:
    raise FamilyInvalid('function {} overfills bucket {}'.format(*p1.counterexample))
  alpha, epsilon = Fraction(alpha), Fraction(epsilon)
  bound = (1 + epsilon) * alpha * F.m / F.k
  cap = bound.numerator // bound.denominator

  buckets = [F.bucket(i, j) for i in range(len(F)) for j in range(F.k)]
  budget = resolve_budget(budget, 'cover')
  check_budget(sum(subsets_upto(len(b), cap) for b in buckets), budget, 'cover members', TooLarge)

  sets = {()}
  for bucket in buckets:
    for size in range(1, min(cap, len(bucket)) + 1):
      sets.update(itertools.combinations(bucket, size))
  cover = CoverFamily(F.m, F.k, sets, alpha, epsilon,
                      provenance={'functions': len(F), 'bucket_slack': F.bucket_slack,
                                  'source': F.metadata.get('construction', 'explicit')})
  assert len(cover) <= cover_size_bound(F) + 1
  logger.info('cover family over m=%d: %d members of size <= %d from %d functions',
              F.m, len(cover), cap, len(F))
  return cover


def check_c1(S):
  """(C1): every member has at most size_bound elements; reports the first violator."""
  bound = S.size_bound
  for members in S.sets:
    if len(members) > bound:
      return CheckResult(False, members)
  return CheckResult(True)


def find_exact_cover(S, F, target, alpha=None, epsilon=None):
  """
  Split `target` into exactly k disjoint members of S.

  The target is padded to alpha*m elements with the smallest unused indices,
  the first function of F balancing the padded set is selected and the parts
  are the intersections of the target with its buckets.

  Parameters
  ----------
  S: CoverFamily
  F: BalancedPartitionFamily
    family S was built from
  target: iterable of int
    at most alpha*m indices of [0, m)
  alpha, epsilon: Rational, optional
    default to the parameters of S

  Returns
  -------
  ExactCover
    tuple of k sorted index tuples, `function_index` names the balancing
    function.

  Raises
  ------
  NotBalanced
    if no member of F balances the padded set, or a part is not a member.
  """
  alpha = S.alpha if alpha is None else Fraction(alpha)
  epsilon = S.epsilon if epsilon is None else Fraction(epsilon)
  if F.m != S.m or F.k != S.k:
    raise BadParams('family is over (m={}, k={}) but the cover over (m={}, k={})'.format(
      F.m, F.k, S.m, S.k))
  size = subset_size(S.m, alpha)
  target = sorted(set(int(i) for i in target))
  if len(target) > size:
    raise BadParams('target has {} elements, more than alpha*m = {}'.format(len(target), size))
  if target and (target[0] < 0 or target[-1] >= S.m):
    raise BadParams('target not contained in [0, {})'.format(S.m))

  chosen = set(target)
  padding = [i for i in range(S.m) if i not in chosen][:size - len(target)]
  padded = sorted(chosen.union(padding))

  f = find_balancing_partition(F, padded, epsilon)
  if f is None:
    raise NotBalanced('no function balances the padded set {}'.format(padded))
  assignment = F.functions[f]
  parts = tuple(tuple(i for i in target if assignment[i] == j) for j in range(S.k))
  for part in parts:
    if part not in S.members:
      raise NotBalanced('part {} is not a member of the cover family'.format(part))
  return ExactCover(parts, function_index=f)


def _is_exact_cover(parts, target, S):
  if len(parts) != S.k:
    return False
  seen = set()
  for part in parts:
    if part not in S.members or seen.intersection(part):
      return False
    seen.update(part)
  return seen == set(target)


def check_c2_exhaustive(S, F, alpha, epsilon, budget=None, verbose=False):
  """
  (C2) on every subset of size at most alpha*m, smallest subsets first.

  Each subset is covered with `find_exact_cover` and the cover is re-checked
  independently (k parts, pairwise disjoint, members of S, union = subset).

  Returns
  -------
  CheckResult
    counterexample is the first subset that could not be covered.
  """
  size = subset_size(S.m, alpha)
  budget = resolve_budget(budget, 'enumeration')
  total = check_budget(subsets_upto(S.m, size), budget, 'subsets')

  subsets = itertools.chain.from_iterable(
    itertools.combinations(range(S.m), w) for w in range(size + 1))
  for target in tqdm(subsets, total=total, desc='C2 subsets', disable=not verbose):
    try:
      parts = find_exact_cover(S, F, target, alpha=alpha, epsilon=epsilon)
    except NotBalanced:
      return CheckResult(False, target)
    if not _is_exact_cover(parts, target, S):
      return CheckResult(False, target)
  return CheckResult(True)


def min_cover_count(S, size):
  """
  Fewest members needed to cover any subset with `size` elements.

  Members hold at most floor(size_bound) elements, so at least
  ceil(size / floor(size_bound)) of them are needed; None if members are
  all empty and size > 0.
  """
  bound = S.size_bound
  cap = bound.numerator // bound.denominator
  if size == 0:
    return 0
  if cap == 0:
    return None
  return -(-size // cap)


def greedy_cover(S, target):
  """
  Disjoint members covering `target`, largest remaining member first.

  Returns
  -------
  list of member tuples, or None when the remaining elements cannot be hit.
  """
  remaining = set(int(i) for i in target)
  chosen = []
  by_size = sorted(S.sets, key=lambda s: (-len(s), s))
  while remaining:
    pick = next((s for s in by_size if s and remaining.issuperset(s)), None)
    if pick is None:
      return None
    chosen.append(pick)
    remaining.difference_update(pick)
  return chosen


########################
# PERSISTENCE
########################

def _rational(value):
  value = Fraction(value)
  return [value.numerator, value.denominator]


def cover_to_dict(S):
  return {'m': S.m, 'k': S.k, 'alpha': _rational(S.alpha), 'epsilon': _rational(S.epsilon),
          'size_bound': _rational(S.size_bound), 'sets': [list(s) for s in S.sets]}


def cover_from_dict(doc):
  values = {}
  for key in ('alpha', 'epsilon', 'size_bound'):
    num, den = doc[key]
    if den <= 0:
      raise SchemaError(key, 'denominator must be positive')
    values[key] = Fraction(num, den)
  try:
    cover = CoverFamily(doc['m'], doc['k'], doc['sets'], values['alpha'], values['epsilon'])
  except BadParams as e:
    raise SchemaError('sets', str(e))
  if cover.size_bound != values['size_bound']:
    raise SchemaError('size_bound', 'expected (1+epsilon)*alpha*m/k = {}, got {}'.format(
      cover.size_bound, values['size_bound']))
  return cover
