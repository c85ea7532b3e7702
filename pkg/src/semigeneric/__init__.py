"""Finite members of the semigeneric class S, their ordered expansions, and
the uniform measure on those expansions, at a scale where everything can be
checked by exhaustive counting."""

from .core import (
    Rel,
    SemiDigraph,
    Violation,
    build,
    column_view,
    exists_forall_check,
    is_partial_iso,
    is_valid,
    sim_split,
    to_dot,
    validate,
)
from .extension import (
    ExtensionDemand,
    build_generic,
    clone_in_column,
    disjoint_copy,
    extend_iso,
    lemma1_extend,
)
from .measure import (
    UCylinder,
    VCylinder,
    brute_measure,
    intersect_U,
    mu0_U,
    mu0_V,
    mu0_cyl,
    ordering_independence,
    partition_check,
    rebase,
    sample_expansion,
)
from .star import (
    StarExpansion,
    canonical_split,
    check_star,
    enumerate_expansions,
    from_starstar,
    recover_edges,
    to_starstar,
)

__version__ = "0.1.0"
