"""Shared enumeration orders.

Two orders are used throughout the package and both double as
canonicalization:

* lexicographic order over F_q^n (first coordinate most significant), used
  by the exhaustive MaxLin and NCP oracles;
* weight order: by Hamming weight, then support in lexicographic order, then
  the nonzero coefficients counted lexicographically over [1, q). Used for
  grouping labels and by the minimum-weight MLD oracle.
"""
import itertools
from math import comb

import numpy as np

from covkit.utils.errors import BudgetExceeded


def check_budget(required, budget, what='items', error=BudgetExceeded):
  if required > budget:
    raise error(required, budget, what)
  return required


def lex_vectors(q, n, start, stop):
  """Rows are the vectors of F_q^n with lexicographic ranks start..stop-1."""
  idx = np.arange(start, stop, dtype=np.int64)
  out = np.zeros((len(idx), n), dtype=np.int64)
  for col in range(n - 1, -1, -1):
    out[:, col] = idx % q
    idx = idx // q
  return out


def iter_lex_chunks(q, n, chunk_size=1 << 15):
  """Yield (offset, block) pairs covering F_q^n in lexicographic order."""
  total = q ** n
  for start in range(0, total, chunk_size):
    stop = min(start + chunk_size, total)
    yield start, lex_vectors(q, n, start, stop)


def coefficient_patterns(q, weight):
  """All nonzero coefficient tuples of length `weight`, lexicographic."""
  if weight == 0:
    return np.zeros((1, 0), dtype=np.int64)
  return lex_vectors(q - 1, weight, 0, (q - 1) ** weight) + 1


def weight_ball_size(n, q, w_max, w_min=0):
  """Number of vectors of F_q^n with w_min <= weight <= w_max."""
  return sum((q - 1) ** i * comb(n, i) for i in range(w_min, min(w_max, n) + 1))


def subsets_upto(m, size):
  return sum(comb(m, i) for i in range(0, min(size, m) + 1))


def supports_by_weight(n, w_max, w_min=0):
  for w in range(w_min, min(w_max, n) + 1):
    for support in itertools.combinations(range(n), w):
      yield support


def canonical_key(values):
  """Position of a vector in weight order, as a sortable tuple."""
  values = np.asarray(values)
  support = tuple(int(i) for i in np.nonzero(values)[0])
  coefficients = tuple(int(values[i]) for i in support)
  return (len(support), support, coefficients)
