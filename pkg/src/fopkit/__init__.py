"""fopkit: finite model theory toolkit.

Formulas and finite structures, first-order and existential second-order
model checking, first-order projections as executable structure
transformers, and bounded verification of combinatorial uniformity, all
backed by brute-force search at desk scale.
"""

from .backends import BACKEND_NAME
from .errors import FopkitError
from .evaluate import DEFAULT_BUDGET, eval_fo, eval_so, is_consistent
from .fops import Fop, FoQuery, apply, pullback, validate_fop
from .formats import (
    parse_formula,
    parse_structure,
    parse_vocabularies,
    print_formula,
    print_structure,
    print_vocabulary,
)
from .logic import Formula, Vocabulary, classify, free_variables, to_prenex_universal
from .structures import (
    Structure,
    count_structures,
    enumerate_structures,
    tuple_index,
)
from .uniformity import (
    UniformityQuery,
    check_uniformity,
    witness_altreach,
    witness_comono,
    witness_hp,
    witness_reach,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "DEFAULT_BUDGET",
    "Fop",
    "FoQuery",
    "FopkitError",
    "Formula",
    "Structure",
    "UniformityQuery",
    "Vocabulary",
    "apply",
    "check_uniformity",
    "classify",
    "count_structures",
    "enumerate_structures",
    "eval_fo",
    "eval_so",
    "free_variables",
    "is_consistent",
    "parse_formula",
    "parse_structure",
    "parse_vocabularies",
    "print_formula",
    "print_structure",
    "print_vocabulary",
    "pullback",
    "to_prenex_universal",
    "tuple_index",
    "validate_fop",
    "witness_altreach",
    "witness_comono",
    "witness_hp",
    "witness_reach",
]
