"""Exact workbench for union-bounded uniform set families.

A family of k-subsets of [n] is union-bounded with parameters (s, q) when
every s of its members, repetition allowed, have union of size at most q.
This package computes the maximum size of such a family exactly at desk
scale: closed-form candidate constructions and threshold rules (catalog),
property oracles (properties), an exhaustive branch-and-bound over shifted
families with a brute-force validation oracle (search), and a campaign CLI
with a persistent result cache (cli).
"""

__version__ = "0.1.0"

from .core import (
    Family,
    FamilyFormatError,
    KSet,
    ShiftOrderCertificate,
    complete_family,
    compact_ground,
    fully_shift,
    is_shifted,
    link,
    make_set,
    parse_family,
    format_family,
    precedes,
    read_family,
    shadow,
    shift_family,
    shift_order_certificate,
    shift_pair,
    write_family,
)
from .properties import (
    EquivalenceReport,
    UnionProfile,
    are_cross_dependent,
    is_t_intersecting,
    is_union_bounded,
    matching_number,
    max_union,
    union_bound_equivalences,
)
from .catalog import (
    BoundConflictError,
    BoundRecord,
    BoundsLedger,
    K3CrossoverReport,
    NoDecompositionError,
    ParamQuad,
    all_bounds,
    candidate_cover_upper,
    candidate_universe,
    conjecture_value,
    conjecture_witness,
    decompose_q,
    k3_crossover_report,
    large_n_exact_bound,
    prefix_family,
    prefix_family_size,
    reconcile,
    second_candidate_comparison,
    special_bounds,
    star_threshold_bound,
    threshold_exact_bound,
    threshold_factor,
)
from .search import (
    BudgetExhaustedError,
    InstanceTooLargeError,
    SearchBudget,
    SearchCheckpoint,
    SearchOutcome,
    enumerate_maximum_families,
    exact_max_bruteforce,
    exact_max_shifted,
)

__all__ = [name for name in dir() if not name.startswith("_")]
