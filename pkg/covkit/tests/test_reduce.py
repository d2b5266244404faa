import itertools
from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from covkit.covers import CoverFamily, cover_from_partition_family
from covkit.gfmat import (FieldMatrix, FieldVector, hamming_weight, mat_mul, mat_vec_mul,
                          random_matrix, rank)
from covkit.instances import (ColumnLabel, MaxLinInstance, Verdict, gen_planted_maxlin,
                              gen_random_mld, label_matrix)
from covkit.oracle import (classify_gap, solve_instance, solve_maxlin_exact, solve_mld_min_weight,
                           solve_ncp_exact)
from covkit.partitions import BalancedPartitionFamily
from covkit.reduce import (expand_solution, kmld_to_ncp, maxlin_to_mld, mld_group_cover,
                           mld_group_naive, pipeline_maxlin_to_kmld, split_solution,
                           split_solution_naive)
from covkit.utils.enumeration import weight_ball_size
from covkit.utils.errors import BadParams, FamilyInvalid, Infeasible

HALF = Fraction(1, 2)


def _maxlin(A, b, q):
  return MaxLinInstance(FieldMatrix(q, A), FieldVector(q, b), HALF, Fraction(1, 4))


def _vectors_of_support(support, m, q):
  for coefficients in itertools.product(range(1, q), repeat=len(support)):
    x = np.zeros(m, dtype=np.int64)
    x[list(support)] = coefficients
    yield FieldVector(q, x)


########################
# MAXLIN -> MLD
########################

def test_maxlin_to_mld_example():
  inst = _maxlin([[1], [1]], [0, 1], 2)
  mld = maxlin_to_mld(inst)
  assert mld.H.tolist() == [[1, 1]]
  assert mld.u.tolist() == [1]
  assert mld.ell == 1
  assert mld.gamma == Fraction(3, 2)
  assert solve_maxlin_exact(inst).optimum == 1
  assert solve_mld_min_weight(mld.H, mld.u).optimum == 1


def test_consistent_system_has_zero_syndrome():
  inst, x = gen_planted_maxlin(3, 8, 3, 1, seed=4)
  mld = maxlin_to_mld(inst)
  assert not mld.u.values.any()
  result = solve_mld_min_weight(mld.H, mld.u)
  assert result.optimum == 0
  assert not result.witness.values.any()


def test_full_rank_square_system():
  mld = maxlin_to_mld(_maxlin(np.eye(2, dtype=np.int64), [1, 0], 2))
  assert mld.H.shape == (0, 2)
  assert solve_mld_min_weight(mld.H, mld.u).optimum == 0


def test_duality_on_random_systems():
  rng = np.random.RandomState(0)
  for _ in range(200):
    q = int(rng.choice([2, 3]))
    n, m = int(rng.randint(0, 5)), int(rng.randint(1, 7))
    inst = _maxlin(rng.randint(0, q, size=(m, n)), rng.randint(0, q, size=m), q)
    mld = maxlin_to_mld(inst)
    assert solve_maxlin_exact(inst).optimum == solve_mld_min_weight(mld.H, mld.u).optimum


@given(st.integers(0, 10**6))
def test_other_parity_checks_give_the_same_optimum(seed):
  rng = np.random.RandomState(seed)
  inst = _maxlin(rng.randint(0, 3, size=(6, 3)), rng.randint(0, 3, size=6), 3)
  mld = maxlin_to_mld(inst)
  d = mld.H.rows
  P = random_matrix(d, d, 3, rng)
  while rank(P) < d:
    P = random_matrix(d, d, 3, rng)
  H2 = mat_mul(P, mld.H)
  u2 = mat_vec_mul(P, mld.u)
  assert solve_mld_min_weight(H2, u2).optimum == solve_mld_min_weight(mld.H, mld.u).optimum


########################
# NAIVE GROUPING
########################

def test_naive_grouping_examples():
  M = FieldMatrix(2, [[1, 0, 1], [0, 1, 1]])
  u = FieldVector(2, [1, 1])
  kmld = mld_group_naive(M, u, 2, 2)
  assert kmld.matrix == M
  assert kmld.labels == (ColumnLabel((0,), (1,)), ColumnLabel((1,), (1,)), ColumnLabel((2,), (1,)))
  assert kmld.n == 3
  assert mld_group_naive(M, u, 4, 2).n == 6
  assert mld_group_naive(FieldMatrix(3, [[1, 2]]), FieldVector(3, [1]), 2, 2).n == 4


@pytest.mark.parametrize('m,q,ell,k', [(3, 2, 2, 2), (3, 2, 4, 2), (4, 3, 2, 1), (5, 2, 6, 2),
                                       (5, 3, 4, 2), (6, 5, 2, 2), (6, 2, 9, 3), (7, 3, 3, 1),
                                       (4, 7, 3, 3), (8, 2, 8, 4)])
def test_naive_label_count(m, q, ell, k):
  M = random_matrix(2, m, q, np.random.RandomState(m * q))
  kmld = mld_group_naive(M, FieldVector.zeros(2, q), ell, k)
  r = -(-ell // k)
  assert kmld.n == sum((q - 1) ** i * comb(m, i) for i in range(1, min(r, m) + 1))
  assert kmld.n == weight_ball_size(m, q, r, w_min=1)
  assert mat_mul(M, label_matrix(kmld.labels, m, q)) == kmld.matrix


def test_naive_regime():
  M = random_matrix(3, 12, 2, np.random.RandomState(1))
  u = FieldVector.zeros(3, 2)
  kmld = mld_group_naive(M, u, 3, 2, gamma=Fraction(3, 2), epsilon=1)
  assert kmld.gamma == HALF
  with pytest.raises(BadParams):
    mld_group_naive(M, u, 2, 2, gamma=Fraction(3, 2), epsilon=1)
  with pytest.raises(BadParams):
    mld_group_naive(M, u, 9, 2, gamma=Fraction(3, 2), epsilon=1)


def test_naive_split_and_expand():
  q, m = 3, 6
  rng = np.random.RandomState(5)
  M = random_matrix(3, m, q, rng)
  kmld = mld_group_naive(M, FieldVector.zeros(3, q), 4, 2)
  assert kmld.n == 72
  for w in range(5):
    for support in itertools.combinations(range(m), w):
      x = FieldVector(q, np.where(np.isin(np.arange(m), support), rng.randint(1, q, size=m), 0))
      y = split_solution_naive(x, kmld)
      assert hamming_weight(y) <= 2
      assert mat_vec_mul(kmld.matrix, y) == mat_vec_mul(M, x)
      assert expand_solution(y, kmld) == x


########################
# COVER GROUPING
########################

def test_cover_grouping_examples():
  M = FieldMatrix(2, [[1, 0], [1, 1]])
  S = CoverFamily(2, 1, [(), (0,), (1,), (0, 1)], 1, 0)
  kmld = mld_group_cover(M, FieldVector(2, [0, 1]), S, 1)
  assert kmld.labels == (ColumnLabel((), ()), ColumnLabel((0,), (1,)), ColumnLabel((1,), (1,)),
                         ColumnLabel((0, 1), (1, 1)))
  assert kmld.matrix.tolist() == [[0, 1, 0, 1], [0, 1, 1, 0]]

  S = CoverFamily(2, 2, [(), (0,)], 1, 0)
  kmld = mld_group_cover(FieldMatrix(3, [[1, 1]]), FieldVector(3, [0]), S, 2)
  assert kmld.labels == (ColumnLabel((), ()), ColumnLabel((0,), (1,)), ColumnLabel((0,), (2,)))


@pytest.mark.parametrize('q', [2, 3])
def test_cover_columns_match_labels(q, cube_cover):
  M = random_matrix(4, 8, q, np.random.RandomState(q))
  kmld = mld_group_cover(M, FieldVector.zeros(4, q), cube_cover, 2, gamma=3)
  assert kmld.n == sum((q - 1) ** len(T) for T in cube_cover.sets)
  assert mat_mul(M, label_matrix(kmld.labels, 8, q)) == kmld.matrix
  assert kmld.gamma == 2


def test_cover_grouping_completeness(cube_family, cube_cover):
  q = 2
  M = random_matrix(4, 8, q, np.random.RandomState(11))
  kmld = mld_group_cover(M, FieldVector.zeros(4, q), cube_cover, 2)
  for w in range(5):
    for support in itertools.combinations(range(8), w):
      for x in _vectors_of_support(support, 8, q):
        y = split_solution(x, cube_cover, cube_family, 2, inst=kmld)
        assert hamming_weight(y) <= 2
        assert mat_vec_mul(kmld.matrix, y) == mat_vec_mul(M, x)
        assert mat_vec_mul(M, expand_solution(y, kmld)) == mat_vec_mul(M, x)


def test_cover_grouping_completeness_ternary(cube_family, cube_cover):
  q = 3
  rng = np.random.RandomState(12)
  M = random_matrix(4, 8, q, rng)
  kmld = mld_group_cover(M, FieldVector.zeros(4, q), cube_cover, 2)
  for support in itertools.combinations(range(8), 4):
    x = FieldVector(q, np.where(np.isin(np.arange(8), support), rng.randint(1, q, size=8), 0))
    y = split_solution(x, cube_cover, cube_family, 2)
    assert hamming_weight(y) <= 2
    assert mat_vec_mul(kmld.matrix, y) == mat_vec_mul(M, x)


def test_zero_solution_lands_on_zero_label(cube_family, cube_cover):
  for q, expected in ((2, 0), (3, 2)):
    M = random_matrix(2, 8, q, np.random.RandomState(0))
    kmld = mld_group_cover(M, FieldVector.zeros(2, q), cube_cover, 2)
    y = split_solution(FieldVector.zeros(8, q), cube_cover, cube_family, 2, inst=kmld)
    assert kmld.labels[0] == ColumnLabel((), ())
    assert y.values[0] == expected
    assert hamming_weight(y) == (0 if expected == 0 else 1)


def test_cover_grouping_soundness(cube_cover):
  q = 3
  rng = np.random.RandomState(7)
  M = random_matrix(4, 8, q, rng)
  kmld = mld_group_cover(M, FieldVector.zeros(4, q), cube_cover, 2)
  for _ in range(500):
    y = np.zeros(kmld.n, dtype=np.int64)
    picks = rng.choice(kmld.n, size=int(rng.randint(0, 4)), replace=False)
    y[picks] = rng.randint(1, q, size=len(picks))
    y = FieldVector(q, y)
    x = expand_solution(y, kmld)
    assert mat_vec_mul(M, x) == mat_vec_mul(kmld.matrix, y)
    assert hamming_weight(x) <= hamming_weight(y) * 3


########################
# K-MLD -> NCP
########################

def test_kmld_to_ncp_examples():
  ncp = kmld_to_ncp(FieldMatrix(2, [[1, 1]]), FieldVector(2, [1]), 1, 2)
  assert ncp.A.tolist() == [[1], [1]]
  assert ncp.t.tolist() == [1, 0]
  assert solve_ncp_exact(ncp.A, ncp.t).optimum == 1

  ncp = kmld_to_ncp(FieldMatrix(3, [[1, 2, 0]]), FieldVector(3, [0]), 1, 2)
  assert not ncp.t.values.any()
  assert solve_ncp_exact(ncp.A, ncp.t).optimum == 0

  with pytest.raises(Infeasible):
    kmld_to_ncp(FieldMatrix(2, [[0, 0]]), FieldVector(2, [1]), 1, 2)


def test_kmld_without_gap_has_no_ncp_form():
  M = FieldMatrix(2, [[1, 0, 1], [0, 1, 1]])
  kmld = mld_group_naive(M, FieldVector(2, [1, 1]), 2, 2)
  assert kmld.gamma == 1
  with pytest.raises(BadParams):
    kmld_to_ncp(kmld.matrix, kmld.target, kmld.k, kmld.gamma)
  ncp = kmld_to_ncp(kmld.matrix, kmld.target, kmld.k, Fraction(3, 2))
  assert solve_ncp_exact(ncp.A, ncp.t).optimum == solve_mld_min_weight(kmld.matrix, kmld.target).optimum


def test_ncp_equivalence_on_random_instances():
  rng = np.random.RandomState(3)
  for i in range(200):
    q = int(rng.choice([2, 3]))
    n = int(rng.randint(1, 7))
    H, u, _ = gen_random_mld(n, int(rng.randint(0, n + 1)), q, seed=i)
    ncp = kmld_to_ncp(H, u, 1, 2)
    assert solve_ncp_exact(ncp.A, ncp.t).optimum == solve_mld_min_weight(H, u).optimum


########################
# PIPELINE
########################

def test_pipeline_preserves_a_planted_yes():
  inst, _ = gen_planted_maxlin(10, 20, 2, Fraction(9, 10), seed=1, s=HALF)
  kmld, report = pipeline_maxlin_to_kmld(inst, 3, HALF, family_source='random', seed=1)
  assert report.gamma_target == Fraction(10, 3)
  assert report.thresholds['alpha'] == Fraction(1, 10)
  assert [stage['stage'] for stage in report.stages] == ['maxlin', 'mld', 'family', 'cover', 'kmld']
  assert all('seconds' not in stage for stage in report.stages)
  assert report.family_status['p1']
  assert classify_gap(kmld, solve_instance(kmld, bounded=True)).verdict == Verdict.YES


def test_pipeline_gap_formula():
  inst, _ = gen_planted_maxlin(6, 20, 2, Fraction(9, 10), seed=2, s=HALF)
  _, report = pipeline_maxlin_to_kmld(inst, 3, Fraction(1, 4), seed=5, timings=True)
  assert report.gamma_target == 4
  assert all('seconds' in stage for stage in report.stages)


def test_pipeline_deterministic_family():
  inst, _ = gen_planted_maxlin(6, 16, 2, Fraction(7, 8), seed=3)
  kmld, report = pipeline_maxlin_to_kmld(inst, 2, HALF, family_source='deterministic')
  assert report.params['family'] == 'deterministic'
  assert report.artifacts['family'].bucket_slack == 2
  assert kmld.m_source == 16


def test_pipeline_rejects_invalid_explicit_family():
  inst, _ = gen_planted_maxlin(4, 8, 2, Fraction(3, 4), seed=0)
  lopsided = BalancedPartitionFamily(8, 2, [[0, 0, 0, 0, 0, 0, 0, 1]], 1)
  with pytest.raises(FamilyInvalid):
    pipeline_maxlin_to_kmld(inst, 2, HALF, family_source='explicit', family=lopsided)
  with pytest.raises(BadParams):
    pipeline_maxlin_to_kmld(inst, 2, HALF, family_source='random')


def test_pipeline_naive_grouping_checks_regime():
  inst, _ = gen_planted_maxlin(4, 8, 2, Fraction(3, 4), seed=0)
  with pytest.raises(BadParams):
    pipeline_maxlin_to_kmld(inst, 2, HALF, grouping='naive')


def test_pipeline_explicit_cover_family_matches_artifacts(cube_family):
  inst, _ = gen_planted_maxlin(4, 8, 2, HALF, seed=6)
  kmld, report = pipeline_maxlin_to_kmld(inst, 2, HALF, family_source='explicit', family=cube_family)
  assert report.artifacts['cover'] == cover_from_partition_family(cube_family, HALF, HALF)
  assert report.family_status['p2'] is True
