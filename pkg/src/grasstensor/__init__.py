"""Grassmann tensors of multiview projections over the rationals.

Exact construction of bifocal and trifocal Grassmann tensors, canonical
forms of camera rigs, and certified rank bounds.
"""

from .canonical import (
    CanonicalizationResult,
    GeneralInvariants,
    NonGeneralInvariants,
    canonicalize,
    canonicalize_general,
    canonicalize_nongeneral,
    canonicalize_two_view,
    centers_disjoint,
    check_assumption,
    general_invariants,
    nongeneral_invariants,
    random_general_rig,
    rig_from_stacked,
)
from .combinatorics import complement, enumerate_multiindices, permutation_sign, shift
from .errors import AssumptionViolated, CertificationError, GrasstensorError, ParseError, SamplingError, ShapeError
from .exact_linalg import ExactMatrix, Subspace, det, intersect, minor, rank, right_kernel, rref, span_join
from .fixtures import get_family, get_fixture, load_families, load_fixtures, run_fixtures
from .multiview import (
    Camera,
    CameraRig,
    Profile,
    ViewSubspace,
    act_ambient,
    act_view,
    act_views,
    center,
    plucker,
    project,
    random_rig,
    sample_corresponding,
    sample_generic_subspaces,
    system_matrix,
)
from .rank import (
    DegenerationFamily,
    RankReport,
    Trajectory,
    analyze,
    binom,
    closed_rank_bifocal,
    closed_rank_trifocal,
    find_witness,
    report_for_rig,
    sweep,
)
from .tensor import (
    GrassmannTensor,
    RankOneTerm,
    build_bifocal,
    build_tensor,
    build_trifocal,
    contract,
    flatten,
    flattening_ranks,
    verify_decomposition,
)

reference_fixtures = load_fixtures

__version__ = "0.1.0"
