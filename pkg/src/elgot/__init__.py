"""Flat recursive equations, their solutions in Elgot algebras, and the laws
those solutions obey.

The main entry points are re-exported here; see the submodules for the rest.
"""

from .algebra import (
    BanachAlgebra,
    ElgotAlgebra,
    ExtendedAlgebra,
    FiniteAlgebra,
    FreeRationalAlgebra,
    JoinOfLeavesAlgebra,
    KleeneAlgebra,
    MetricAlgebra,
    UnaryAlgebra,
    build_stream_system,
    canonical_system,
    check_compositionality,
    check_functoriality,
    check_solution,
    check_solution_preserving,
    dagger,
    homomorphism_from_solution_preserving,
)
from .core import App, FlatSystem, Op, Param, Signature, Var, flatten, pair, rename_params, validate
from .em import EMAlgebra, check_em_laws, elgot_to_em, em_to_elgot
from .formats import format_system, parse_algebra, parse_system, parse_tree
from .rational import RationalTree, bisimilar, minimize, solve_free, solve_in_R, substitute, subtree_count, unfold

__all__ = [
    "Signature", "Op", "Param", "Var", "App", "FlatSystem", "validate", "rename_params", "pair", "flatten",
    "RationalTree", "solve_free", "solve_in_R", "substitute", "bisimilar", "minimize", "subtree_count", "unfold",
    "ElgotAlgebra", "FiniteAlgebra", "MetricAlgebra", "UnaryAlgebra", "KleeneAlgebra", "BanachAlgebra",
    "JoinOfLeavesAlgebra", "ExtendedAlgebra", "FreeRationalAlgebra", "dagger", "check_solution",
    "check_functoriality", "check_compositionality", "check_solution_preserving",
    "homomorphism_from_solution_preserving", "canonical_system", "build_stream_system",
    "EMAlgebra", "elgot_to_em", "em_to_elgot", "check_em_laws",
    "parse_system", "parse_tree", "parse_algebra", "format_system",
]
