"""Completeness of n-tuples of orthogonal projections in M_k(C).

Decide whether C^k is the direct sum of the ranges of given projections,
certify the answer, and work with the resulting objects: joins,
perturbation bounds, orthogonalization, homotopies and equivalence
witnesses.
"""

from .completeness import (
    CompletenessReport,
    Verdict,
    is_complete,
    is_complete_quantitative,
    oracle_direct_sum,
    pencil_check,
    split_projection,
    weighted_sum_inverse,
)
from .homotopy import (
    conjugation_path,
    equivalence_witness,
    homotopy_path,
    mvn_equivalent,
    retract,
    same_component_matrix_algebra,
)
from .lattice import join, join_minimality_check
from .linalg import DEFAULT_TOL, TolerancePolicy, pinv, spectral_info
from .model import (
    ProjectionTuple,
    gen_complete,
    gen_near_orthogonal,
    range_projection,
    validate_tuple,
)
from .perturbation import (
    near_identity_test,
    orthogonalize_nearby,
    orthogonalize_vectors_nearby,
    orthonormalize_frame,
    spectral_window,
    stability_radius,
)

__version__ = "0.1.0"
