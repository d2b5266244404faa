import os
from fractions import Fraction

import hypothesis
import numpy as np
import pytest

from covkit.partitions import BalancedPartitionFamily, hypercube_family
from covkit.covers import cover_from_partition_family

hypothesis.settings.register_profile('fast', max_examples=25, deadline=None)
hypothesis.settings.register_profile('ci', max_examples=200, deadline=None)
hypothesis.settings.register_profile('debugger', report_multiple_bugs=False, deadline=None)
hypothesis.settings.load_profile(os.environ.get('HYPOTHESIS_PROFILE', 'fast'))

np.seterr(all='warn')


@pytest.fixture
def three_splits():
  """The three perfect matchings of [0, 4) into two pairs."""
  return BalancedPartitionFamily(4, 2, [[0, 0, 1, 1], [0, 1, 0, 1], [0, 1, 1, 0]], 1)


@pytest.fixture(scope='session')
def cube_family():
  """Coordinate projections of [2]^3, which balance every 4-subset for eps = 1/2."""
  return hypercube_family(2, 3)


@pytest.fixture(scope='session')
def cube_cover(cube_family):
  return cover_from_partition_family(cube_family, Fraction(1, 2), Fraction(1, 2))
