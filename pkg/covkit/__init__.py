from covkit.gfmat import (FieldElement, FieldMatrix, FieldVector, field_inv, hamming_weight,
                          mat_vec_mul, nullspace_basis, parity_check, rref)
from covkit.instances import (ColumnLabel, GapVerdict, KMldInstance, MaxLinInstance, MldInstance,
                              NcpInstance, Verdict, gen_planted_maxlin, gen_random_mld,
                              load_instance, save_instance)
from covkit.partitions import (BalancedPartitionFamily, check_p1, check_p2_exhaustive,
                               check_p2_sampled, deterministic_family, diagonal_universe,
                               find_balancing_partition, hypercube_family, random_family)
from covkit.covers import (CoverFamily, check_c1, check_c2_exhaustive,
                           cover_from_partition_family, find_exact_cover)
from covkit.reduce import (expand_solution, kmld_to_ncp, maxlin_to_mld, mld_group_cover,
                           mld_group_naive, pipeline_maxlin_to_kmld, split_solution)
from covkit.oracle import (classify_gap, solve_maxlin_exact, solve_mld_min_weight,
                           solve_ncp_exact)
