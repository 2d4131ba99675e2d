"""Log-det barrier evaluation on chordal sparsity patterns.

Multifrontal and supernodal sweeps over elimination and clique trees for
f(X) = -log det X, its conjugate, gradients, Hessian products, the
inverse Hessian and a Hessian factorization.
"""

from .chordal import (CliqueForest, clique_tree, contiguous_order, representative_vertices,
                      singleton_forest, verify_clique_tree)
from .hessian import (HessianContext, gram_matrix, hess_apply, hess_factor_adjoint,
                      hess_factor_apply, hess_factor_apply_sparse, hess_solve)
from .multifrontal import (CholeskyFactor, NoPositiveCompletion, NotPositiveDefinite,
                           NumericalBreakdown, barrier_value, completion, completion_factored,
                           dual_barrier_value, factor, logdet, product, projected_inverse)
from .patterns import arrow, band, pattern17
from .supernodal import (BlockCholeskyFactor, sn_completion, sn_factor, sn_projected_inverse,
                         to_scalar_factor)
from .symbolic import (NotChordal, PatternError, SparseSymMatrix, SparsityPattern,
                       SymbolicAnalysis, etree_only, extend_add, extract, fill_pattern,
                       monotone_degrees)

__version__ = "0.1.0"
