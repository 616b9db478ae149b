"""Curved A-infinity categories, Maurer-Cartan deformation and gauge functors over exact fields."""
from .basedmod import QQ, Element, Field, Generator, PLUS_INF
from .errors import (
    AinfError,
    CurvedRelationError,
    HomMismatchError,
    PreconditionError,
    SolveError,
    TruncationError,
    ValidationError,
)
from .ainfcore import TRUNC, CurvedCategory, RelationReport, check_ainf_relations, check_grading_filtration
from .deform import (
    CurvedModule,
    MCAssignment,
    build_gauge_functors,
    check_mc,
    deform_bimodule,
    deform_ops,
    solve_mc_from_cyclic,
)
from .functor import (
    CurvedFunctor,
    check_bar_identity,
    check_functor_equation,
    compose,
    deform_functor,
    functors_equal,
    identity_functor,
    pushforward_mc,
)
from .chain import ChainComplex, ChainMap, cohomology_ranks, is_quasi_iso, mapping_cone
from .dsl import Workspace, parse, serialize

__version__ = "0.1.0"

__all__ = [
    "QQ",
    "Element",
    "Field",
    "Generator",
    "PLUS_INF",
    "AinfError",
    "CurvedRelationError",
    "HomMismatchError",
    "PreconditionError",
    "SolveError",
    "TruncationError",
    "ValidationError",
    "TRUNC",
    "CurvedCategory",
    "RelationReport",
    "check_ainf_relations",
    "check_grading_filtration",
    "CurvedModule",
    "MCAssignment",
    "build_gauge_functors",
    "check_mc",
    "deform_bimodule",
    "deform_ops",
    "solve_mc_from_cyclic",
    "CurvedFunctor",
    "check_bar_identity",
    "check_functor_equation",
    "compose",
    "deform_functor",
    "functors_equal",
    "identity_functor",
    "pushforward_mc",
    "ChainComplex",
    "ChainMap",
    "cohomology_ranks",
    "is_quasi_iso",
    "mapping_cone",
    "Workspace",
    "parse",
    "serialize",
]
