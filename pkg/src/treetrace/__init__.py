"""Exact trace transfer along Bass-Serre trees of finite graphs of groups."""

__version__ = "0.1.0"

from .algebra import GGroupRingElement, GroupAlgebraElement, evaluate_polynomial, tr_G, tr_H_algebra
from .errors import *  # noqa: F401,F403
from .graph_of_groups import AmalgamSpec, HNNSpec, NormalForm, is_normal_form
from .groups import (
    FiniteGroup,
    GroupHom,
    Subgroup,
    build_transversal,
    check_group_axioms,
    cyclic_group,
    from_permutations,
    is_injective_on,
    symmetric_group,
)
from .index import HModuleMatrix, generate_projection_pair, h_index, h_trace, kasparov_compactness_check, vn_dimension
from .linalg import exact_rank
from .scalars import GaussianRational
from .scenario import Scenario, parse_scenario, parse_word
from .transfer import OrbitOperator, defect_operator, polynomial_calculus_defect, tr_H_orbit, verify_transfer
from .tree import STAR, BassSerreTree
