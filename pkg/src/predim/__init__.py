"""Exact predimension calculus on finite relational structures."""

from .dimension import (
    Alpha,
    DimValue,
    Ordering,
    delta_rel,
    dimension,
    dimension_value,
    e_count,
    e_cross,
    e_cross3,
    is_in_class,
    is_strong,
    predimension,
    verify_axioms,
)
from .structures import (
    Signature,
    Structure,
    canonical_json,
    discrete,
    embeddings_over,
    free_amalgam,
    glue,
    graph,
    isomorphic_over,
    loads,
)
from .closure import (
    ClosureResult,
    chi,
    chi_star,
    d_independent,
    intrinsic_closure,
    is_intrinsic,
    is_minimal_pair,
    is_primitive,
)
from .constructions import (
    Certificate,
    PointedStructure,
    acceptability,
    amalg_copies,
    approach_zero,
    chain,
    dense_find,
    family_structure,
    find_seed,
    is_admissible,
)
from .witnesses import build_block, discontinuity_witness, rank_zero_witness

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
