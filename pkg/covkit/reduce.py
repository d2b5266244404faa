"""Reductions MaxLin -> MLD -> k-MLD -> NCP and the solution lifts between them."""
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, groupby

import numpy as np

from covkit.covers import cover_from_partition_family, find_exact_cover
from covkit.gfmat import (FieldMatrix, FieldVector, mat_vec_mul, nullspace_basis,
                          parity_check, solve_linear)
from covkit.instances import (ColumnLabel, KMldInstance, MldInstance, NcpInstance,
                              floor_fraction, rational_to_json)
from covkit.partitions import (check_p1, check_p2_exhaustive, deterministic_family,
                               random_family)
from covkit.utils.config import resolve_budget
from covkit.utils.enumeration import check_budget, coefficient_patterns, weight_ball_size
from covkit.utils.errors import (BadParams, BudgetExceeded, DimensionMismatch, FamilyInvalid,
                                 Infeasible, NotBalanced, TooLarge)

logger = logging.getLogger(__name__)


########################
# MAXLIN -> MLD
########################

def maxlin_to_mld(inst):
  """
  Dual MLD instance of a MaxLin system.

  H is the canonical parity-check matrix of the column space of A and
  u = H b, so He = u exactly when e = b - Ax for some x. The YES threshold
  (1-c)m is stored as its floor (weights are integers).
  """
  H = parity_check(inst.A)
  u = mat_vec_mul(H, inst.b)
  ell = floor_fraction((1 - inst.c) * inst.m)
  gamma = (1 - inst.s) / (1 - inst.c)
  logger.info('maxlin (%dx%d) -> mld (%dx%d), ell=%d gamma=%s',
              inst.m, inst.n, H.rows, H.cols, ell, gamma)
  return MldInstance(H, u, ell, gamma)


########################
# GROUPING
########################

def _grouped_block(M, supports, q):
  """
  Columns M.alpha and labels alpha for every alpha whose support is a row of
  `supports` (all of one weight), support-major then coefficient order.
  """
  n_supports, weight = supports.shape
  coefficients = coefficient_patterns(q, weight)
  if weight == 0:
    columns = np.zeros((M.rows, n_supports * len(coefficients)), dtype=np.int64)
  else:
    picked = M.entries[:, supports]
    columns = np.einsum('dsw,cw->dsc', picked, coefficients) % q
    columns = columns.reshape(M.rows, n_supports * len(coefficients))
  labels = [ColumnLabel(tuple(int(i) for i in support), tuple(int(c) for c in coefs))
            for support in supports for coefs in coefficients]
  return columns, labels


def _group(M, supports_by_size, q):
  blocks, labels = [], []
  for weight, supports in supports_by_size:
    array = np.array(supports, dtype=np.int64).reshape(len(supports), weight)
    columns, block_labels = _grouped_block(M, array, q)
    blocks.append(columns)
    labels.extend(block_labels)
  if blocks:
    entries = np.concatenate(blocks, axis=1)
  else:
    entries = np.zeros((M.rows, 0), dtype=np.int64)
  return FieldMatrix(q, entries), labels


def mld_group_naive(M, u, ell, k, gamma=None, epsilon=None, budget=None):
  """
  Group every nonzero vector of weight at most r = ceil(ell/k) into a column.

  Parameters
  ----------
  M: FieldMatrix (d x m)
  u: FieldVector (length d)
  ell: int
    MLD weight threshold, at least 1
  k: int
    target weight threshold, at least 1
  gamma: Rational, optional
    gap of the source instance
  epsilon: Rational, optional
    when given, the soundness regime k/eps < ell < m/gamma is enforced and
    the target gap is gamma - eps; otherwise the target gap is gamma
    (1 when no gap is known).

  A target gap of at most 1 is a grouping without a promise gap: the
  instance is fine for oracles and solution lifts, but `kmld_to_ncp`
  refuses it.

  Returns
  -------
  KMldInstance
    labels in weight order, m' = sum_{i=1..r} (q-1)^i C(m, i) columns.
  """
  if k < 1 or ell < 1:
    raise BadParams('naive grouping needs k >= 1 and ell >= 1, got k={} ell={}'.format(k, ell))
  q, m = M.q, M.cols
  gamma = None if gamma is None else Fraction(gamma)
  if epsilon is not None:
    epsilon = Fraction(epsilon)
    if gamma is None:
      raise BadParams('a soundness slack epsilon needs the source gap gamma')
    if not Fraction(k) / epsilon < ell < Fraction(m) / gamma:
      raise BadParams('naive grouping needs k/eps < ell < m/gamma, got {} < {} < {}'.format(
        Fraction(k) / epsilon, ell, Fraction(m) / gamma))
    target_gap = gamma - epsilon
  else:
    target_gap = gamma if gamma is not None else Fraction(1)
  if target_gap <= 0:
    raise BadParams('target gap gamma - epsilon must be positive, got {}'.format(target_gap))

  r = -(-ell // k)
  budget = resolve_budget(budget, 'label')
  n_labels = check_budget(weight_ball_size(m, q, r, w_min=1), budget, 'labels', TooLarge)

  supports = [(w, list(combinations(range(m), w))) for w in range(1, min(r, m) + 1)]
  matrix, labels = _group(M, supports, q)
  assert len(labels) == n_labels
  logger.info('naive grouping r=%d: %d columns from %d', r, len(labels), m)
  return KMldInstance(matrix, u, k, target_gap, tuple(labels), m, source=M,
                      provenance={'grouping': 'naive', 'r': r, 'ell': ell,
                                  'gamma': gamma, 'epsilon': epsilon})


def cover_labels(S, q):
  """Labels of a cover grouping: every alpha with supp(alpha) a member of S."""
  _, labels = _group(FieldMatrix.zeros(0, S.m, q), _supports_of(S), q)
  return labels


def _supports_of(S):
  return [(w, list(group)) for w, group in groupby(S.sets, key=len)]


def mld_group_cover(M, u, S, k, gamma=None, budget=None):
  """
  Group along a cover family: one column M.alpha per alpha with supp(alpha) in S.

  The zero label appears once (from the empty member). With source gap gamma
  the target gap is gamma/(1+eps).
  """
  q = M.q
  if S.m != M.cols:
    raise DimensionMismatch('cover is over m={} but M has {} columns'.format(S.m, M.cols))
  if S.k != k:
    raise BadParams('cover family was built for k={}, not k={}'.format(S.k, k))
  budget = resolve_budget(budget, 'label')
  check_budget(sum((q - 1) ** len(T) for T in S.sets), budget, 'labels', TooLarge)

  matrix, labels = _group(M, _supports_of(S), q)
  target_gap = (Fraction(gamma) if gamma is not None else Fraction(1)) / (1 + S.epsilon)
  logger.info('cover grouping: %d columns from %d members', len(labels), len(S))
  return KMldInstance(matrix, u, k, target_gap, tuple(labels), M.cols, source=M,
                      provenance={'grouping': 'cover', 'members': len(S),
                                  'gamma': gamma, 'epsilon': S.epsilon})


########################
# SOLUTION LIFTS
########################

def _labels_vector(parts, x, labels, q):
  index = {label: j for j, label in enumerate(labels)}
  y = np.zeros(len(labels), dtype=np.int64)
  for part in parts:
    label = ColumnLabel(part, tuple(int(x.values[i]) for i in part))
    j = index.get(label)
    if j is None:
      raise NotBalanced('no column is labelled by {}'.format(label))
    y[j] = (y[j] + 1) % q
  return FieldVector(q, y)


def split_solution(x, S, F, k, inst=None):
  """
  Lift a solution of weight <= alpha*m to the cover-grouped instance.

  supp(x) is split into k disjoint members T_1..T_k of S; y gets +1 on the
  label of each projection x|T_j (an empty part lands on the zero label), so
  |y|_0 <= k and M_k y = M x.
  """
  if S.k != k:
    raise BadParams('cover family was built for k={}, not k={}'.format(S.k, k))
  if len(x) != S.m:
    raise DimensionMismatch('x has length {} but the cover is over m={}'.format(len(x), S.m))
  labels = inst.labels if inst is not None else cover_labels(S, x.q)
  parts = find_exact_cover(S, F, x.support)
  return _labels_vector(parts, x, labels, x.q)


def split_solution_naive(x, inst):
  """Lift for naive grouping: consecutive support chunks of at most r coordinates."""
  r = max((label.weight for label in inst.labels), default=0)
  support = x.support
  chunks = [support[i:i + r] for i in range(0, len(support), r)] if r else []
  if (support and not chunks) or len(chunks) > inst.k:
    raise BadParams('weight {} exceeds k*r = {}'.format(len(support), inst.k * r))
  return _labels_vector(chunks, x, inst.labels, x.q)


def expand_solution(y, inst):
  """x = sum over supp(y) of y[j] * labels[j]; M x = M_k y."""
  if len(y) != inst.n:
    raise DimensionMismatch('y has length {} but the instance has {} columns'.format(len(y), inst.n))
  q = inst.q
  x = np.zeros(inst.m_source, dtype=np.int64)
  for j in y.support:
    label = inst.labels[j]
    if label.indices:
      x[list(label.indices)] += int(y.values[j]) * np.array(label.coefficients, dtype=np.int64)
  return FieldVector(q, x % q)


########################
# K-MLD -> NCP
########################

def kmld_to_ncp(H, u, k, gamma):
  """
  Nearest-codeword form of {x : Hx = u}.

  With x0 a particular solution and G a kernel basis, A' = G and t' = -x0,
  so A'z - t' ranges over every solution and both optima coincide.
  """
  if Fraction(gamma) <= 1:
    raise BadParams('nearest-codeword form needs a gap above 1, got {}'.format(gamma))
  x0 = solve_linear(H, u)
  if x0 is None:
    raise Infeasible('target is not in the column space of H')
  G = nullspace_basis(H)
  t = FieldVector(H.q, (-x0.values) % H.q)
  logger.info('k-mld (%dx%d) -> ncp with a %dx%d generator', H.rows, H.cols, G.rows, G.cols)
  return NcpInstance(G, t, k, gamma)


########################
# PIPELINE
########################

@dataclass
class PipelineReport:
  params: dict
  thresholds: dict
  stages: list = field(default_factory=list)
  family_status: dict = field(default_factory=dict)
  artifacts: dict = field(default_factory=dict, repr=False)

  @property
  def gamma_target(self):
    return self.thresholds['gamma_target']

  def to_json(self):
    return {'params': dict(self.params),
            'thresholds': {key: rational_to_json(value) for key, value in self.thresholds.items()},
            'stages': [dict(stage) for stage in self.stages],
            'family_status': dict(self.family_status)}


def _family_status(F, alpha, epsilon, budget):
  p1 = check_p1(F)
  status = {'p1': p1.ok, 'functions': len(F), 'guarantee_regime': bool(F.guarantee_regime)}
  try:
    p2 = check_p2_exhaustive(F, alpha, epsilon, budget=budget)
    status['p2'] = p2.ok
    status['p2_counterexample'] = None if p2.ok else list(p2.counterexample)
  except BudgetExceeded as e:
    status['p2'] = None
    status['p2_required'] = e.required
  return status


def pipeline_maxlin_to_kmld(inst, k, epsilon, family_source='random', seed=None, family=None,
                            eta=None, grouping='cover', budget=None, timings=False):
  """
  MaxLin -> MLD -> k-MLD in one call.

  Parameters
  ----------
  inst: MaxLinInstance
  k: int
    target weight parameter
  epsilon: Rational
    cover slack; the target gap is (1-s)/((1-c)(1+eps))
  family_source: {'random', 'deterministic', 'explicit'}
    how the balanced partition family over [0, m) is obtained; 'random'
    needs `seed`, 'explicit' needs `family`.
  eta: Rational, optional
    (P2) parameter passed to the deterministic construction, default alpha
  grouping: {'cover', 'naive'}
    'naive' skips the family and groups every vector of weight <= ceil(ell/k)
  timings: bool
    add wall-clock seconds per stage to the report

  Returns
  -------
  (KMldInstance, PipelineReport)
    alpha = floor((1-c)m)/m, so alpha*m is the integral YES threshold.
  """
  epsilon = Fraction(epsilon)
  if k < 1:
    raise BadParams('k must be positive, got {}'.format(k))
  if grouping not in ('cover', 'naive'):
    raise BadParams('unknown grouping {!r}'.format(grouping))
  clock = time.perf_counter()

  def stage(name, **sizes):
    nonlocal clock
    entry = {'stage': name}
    entry.update(sizes)
    if timings:
      now = time.perf_counter()
      entry['seconds'] = round(now - clock, 6)
      clock = now
    report.stages.append(entry)

  m = inst.m
  mld = maxlin_to_mld(inst)
  ell = mld.ell
  if ell < 1:
    raise BadParams('YES threshold floor((1-c)m) is 0; nothing to group')
  alpha = Fraction(ell, m)

  report = PipelineReport(
    params={'k': k, 'ell': ell, 'm': m, 'n': inst.n, 'q': inst.q, 'grouping': grouping,
            'family': family_source if grouping == 'cover' else None, 'seed': seed},
    thresholds={'c': inst.c, 's': inst.s, 'alpha': alpha, 'epsilon': epsilon,
                'gamma_source': mld.gamma})
  stage('maxlin', rows=inst.m, cols=inst.n)
  stage('mld', rows=mld.H.rows, cols=mld.H.cols, ell=ell)
  report.artifacts['mld'] = mld

  if grouping == 'naive':
    kmld = mld_group_naive(mld.H, mld.u, ell, k, gamma=mld.gamma, epsilon=epsilon, budget=budget)
    report.thresholds['gamma_target'] = kmld.gamma
    stage('kmld', rows=kmld.matrix.rows, cols=kmld.n)
    return kmld, report

  if family_source == 'random':
    if seed is None:
      raise BadParams('a random family needs an explicit seed')
    F = random_family(m, k, alpha, epsilon, seed, budget=budget)
  elif family_source == 'deterministic':
    F = deterministic_family(m, k, alpha if eta is None else eta, epsilon, budget=budget)
  elif family_source == 'explicit':
    if family is None:
      raise BadParams('an explicit family source needs a family')
    F = family
    if F.m != m or F.k != k:
      raise FamilyInvalid('family is over (m={}, k={}), expected (m={}, k={})'.format(F.m, F.k, m, k))
    p1 = check_p1(F)
    if not p1.ok:
      raise FamilyInvalid('function {} overfills bucket {}'.format(*p1.counterexample))
  else:
    raise BadParams('unknown family source {!r}'.format(family_source))
  report.family_status = _family_status(F, alpha, epsilon, budget)
  stage('family', functions=len(F))

  S = cover_from_partition_family(F, alpha, epsilon, budget=budget)
  stage('cover', sets=len(S))

  kmld = mld_group_cover(mld.H, mld.u, S, k, gamma=mld.gamma, budget=budget)
  report.thresholds['gamma_target'] = (1 - inst.s) / ((1 - inst.c) * (1 + epsilon))
  assert kmld.gamma == report.thresholds['gamma_target']
  stage('kmld', rows=kmld.matrix.rows, cols=kmld.n)
  report.artifacts.update(family=F, cover=S)
  return kmld, report
