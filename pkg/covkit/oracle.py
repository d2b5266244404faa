"""Exact brute-force solvers and gap classification.

Every solver enumerates its whole search space (or a provably sufficient
part of it) in a fixed order and returns the first optimal point in that
order, so witnesses are canonical:

* MaxLin and NCP: lexicographic order over F_q^n;
* MLD: weight order (weight, then support, then coefficients).
"""
import itertools
import logging
from typing import NamedTuple, Optional

import numpy as np
from tqdm import tqdm

from covkit.gfmat import FieldVector, nullspace_basis, solve_linear
from covkit.instances import GapVerdict, Verdict, floor_fraction, no_threshold, yes_threshold
from covkit.utils.config import resolve_budget
from covkit.utils.enumeration import (canonical_key, check_budget, coefficient_patterns,
                                      iter_lex_chunks, weight_ball_size)
from covkit.utils.errors import BadParams, DimensionMismatch

logger = logging.getLogger(__name__)


class OracleResult(NamedTuple):
  """
  Optimal witness and value. A bounded search that found nothing sets
  `lower_bound` to the first weight it did not try; both other fields are
  then None.
  """
  witness: Optional[FieldVector]
  optimum: Optional[int]
  lower_bound: Optional[int] = None


def _lex_argmin_distance(G, t, q, budget, what, verbose=False):
  """Lexicographically first z minimizing |Gz - t|_0 over F_q^cols(G)."""
  n = G.shape[1]
  check_budget(q ** n, budget, what)
  best, best_z = None, None
  chunks = iter_lex_chunks(q, n)
  for _, Z in tqdm(chunks, desc=what, disable=not verbose):
    distances = np.count_nonzero((Z @ G.T - t) % q, axis=1)
    i = int(np.argmin(distances))
    if best is None or distances[i] < best:
      best, best_z = int(distances[i]), Z[i].copy()
  return FieldVector(q, best_z), best


def solve_maxlin_exact(inst, budget=None, verbose=False):
  """Assignment violating the fewest equations, over all q^n assignments."""
  budget = resolve_budget(budget, 'enumeration')
  x, violated = _lex_argmin_distance(inst.A.entries, inst.b.values, inst.q, budget,
                                     'assignments', verbose)
  logger.debug('maxlin optimum %d', violated)
  return OracleResult(x, violated)


def solve_ncp_exact(A, t, budget=None, verbose=False):
  """Coefficients z minimizing |Az - t|_0, over all q^d' candidates."""
  if A.q != t.q or A.rows != len(t):
    raise DimensionMismatch('target of length {} for a {}x{} generator'.format(len(t), A.rows, A.cols))
  budget = resolve_budget(budget, 'enumeration')
  z, distance = _lex_argmin_distance(A.entries, t.values, A.q, budget, 'codewords', verbose)
  return OracleResult(z, distance)


def solve_mld_min_weight(H, u, w_max=None, budget=None, chunk_size=1 << 14, verbose=False):
  """
  Minimum-weight solution of Hx = u by enumeration in weight order.

  Parameters
  ----------
  H: FieldMatrix (d x n)
  u: FieldVector (length d)
  w_max: int, optional
    largest weight tried, default n

  Returns
  -------
  OracleResult or None
    the first solution in weight order (hence minimum weight and canonical),
    None when no solution of weight <= w_max exists.
  """
  if H.q != u.q or H.rows != len(u):
    raise DimensionMismatch('target of length {} for {} rows'.format(len(u), H.rows))
  q, n = H.q, H.cols
  w_max = n if w_max is None else min(int(w_max), n)
  budget = resolve_budget(budget, 'enumeration')
  check_budget(weight_ball_size(n, q, w_max), budget, 'candidates')

  target = u.values.reshape(-1, 1, 1)
  for w in tqdm(range(w_max + 1), desc='weights', disable=not verbose):
    coefficients = coefficient_patterns(q, w)
    per_chunk = max(1, chunk_size // len(coefficients))
    supports = itertools.combinations(range(n), w)
    while True:
      block = list(itertools.islice(supports, per_chunk))
      if not block:
        break
      block = np.array(block, dtype=np.int64).reshape(len(block), w)
      images = np.einsum('dsw,cw->dsc', H.entries[:, block], coefficients) % q
      hits = np.argwhere((images == target).all(axis=0))
      if hits.size:
        s, c = hits[0]
        x = np.zeros(n, dtype=np.int64)
        x[block[s]] = coefficients[c]
        logger.debug('mld minimum weight %d', w)
        return OracleResult(FieldVector(q, x), w)
  return None


def solve_mld_coset(H, u, budget=None, verbose=False):
  """
  Minimum-weight solution of Hx = u by enumerating the coset x0 + ker H.

  Visits q^(n - rank H) candidates. Among minimum-weight solutions the
  first in weight order is returned, matching `solve_mld_min_weight`.
  """
  x0 = solve_linear(H, u)
  if x0 is None:
    return None
  q = H.q
  G = nullspace_basis(H).entries
  budget = resolve_budget(budget, 'enumeration')
  check_budget(q ** G.shape[1], budget, 'coset points')

  best_key, best = None, None
  for _, Z in tqdm(iter_lex_chunks(q, G.shape[1]), desc='coset', disable=not verbose):
    X = (x0.values + Z @ G.T) % q
    weights = np.count_nonzero(X, axis=1)
    lightest = X[weights == weights.min()]
    for row in lightest:
      key = canonical_key(row)
      if best_key is None or key < best_key:
        best_key, best = key, row.copy()
  return OracleResult(FieldVector(q, best), best_key[0])


def solve_mld_exact(H, u, w_max=None, budget=None, verbose=False):
  """
  Minimum weight of Hx = u with the cheaper of the coset and weight-order searches.

  With `w_max`, the weight-order search stops there; finding nothing then
  yields OracleResult(None, None, lower_bound=w_max + 1). The coset search is
  always exact, so its optimum may exceed `w_max`. None means Hx = u has no
  solution at all.
  """
  budget = resolve_budget(budget, 'enumeration')
  if solve_linear(H, u) is None:
    return None
  limit = H.cols if w_max is None else min(int(w_max), H.cols)
  coset_cost = H.q ** nullspace_basis(H).cols
  if coset_cost <= budget and coset_cost <= weight_ball_size(H.cols, H.q, limit):
    return solve_mld_coset(H, u, budget=budget, verbose=verbose)
  result = solve_mld_min_weight(H, u, w_max=limit, budget=budget, verbose=verbose)
  if result is None:
    return OracleResult(None, None, lower_bound=limit + 1)
  return result


def solve_instance(inst, budget=None, bounded=False, verbose=False):
  """
  Exact optimum of any instance kind; optimum None means infeasible.

  With `bounded`, MLD-type searches stop right above the NO threshold, which
  is all `classify_gap` needs.
  """
  if inst.kind == 'maxlin':
    return solve_maxlin_exact(inst, budget=budget, verbose=verbose)
  if inst.kind == 'ncp':
    return solve_ncp_exact(inst.A, inst.t, budget=budget, verbose=verbose)
  if inst.kind == 'mld':
    H, u = inst.H, inst.u
  elif inst.kind == 'kmld':
    H, u = inst.matrix, inst.target
  else:
    raise BadParams('unknown instance kind {!r}'.format(inst.kind))
  w_max = floor_fraction(no_threshold(inst)) if bounded else None
  result = solve_mld_exact(H, u, w_max=w_max, budget=budget, verbose=verbose)
  return result if result is not None else OracleResult(None, None)


def objective(inst, witness):
  """Objective value of a candidate witness for `inst`."""
  if inst.kind == 'maxlin':
    return int(np.count_nonzero((inst.A.entries @ witness.values - inst.b.values) % inst.q))
  if inst.kind == 'ncp':
    return int(np.count_nonzero((inst.A.entries @ witness.values - inst.t.values) % inst.q))
  H, u = (inst.H, inst.u) if inst.kind == 'mld' else (inst.matrix, inst.target)
  if not np.array_equal((H.entries @ witness.values) % inst.q, u.values):
    return None
  return int(np.count_nonzero(witness.values))


def classify_gap(inst, result):
  """
  YES / NO / NEITHER verdict of an instance from its exact optimum.

  YES when the optimum is at most the YES threshold, NO when it exceeds the
  NO threshold (an infeasible MLD-type instance is NO), NEITHER in between.
  """
  optimum = result.optimum
  if optimum is None:
    return GapVerdict(Verdict.NO, None)
  if optimum <= yes_threshold(inst):
    assert result.witness is not None and objective(inst, result.witness) == optimum
    return GapVerdict(Verdict.YES, optimum, result.witness)
  if optimum > no_threshold(inst):
    return GapVerdict(Verdict.NO, optimum)
  return GapVerdict(Verdict.NEITHER, optimum)
