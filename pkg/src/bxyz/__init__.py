"""Boundary eight-vertex / XYZ chain machinery.

Elliptic special functions, bulk and boundary Boltzmann weights, the
face-vertex correspondence, boundary magnetization contour integrals, and
two independent numerical oracles (truncated-mode Gaussian and exact
diagonalization).  Everything is pure-functional and safe for concurrent
use; quadrature reductions are fixed-order for reproducibility.
"""

from .elliptic import (
    DEFAULT_TRUNC,
    EllipticModulus,
    ModelParams,
    PoleError,
    TauParam,
    TruncationConfig,
    bracket,
    elliptic_fns,
    h1,
    h4,
    modulus_from_nome,
    qpoch,
    theta,
    theta_p,
)
from .vertex import (
    RMatrix,
    SpectralPoint,
    crossing_residual,
    r_matrix,
    r_normalization,
    spectral,
    unitarity_residual,
    ybe_residual,
)
from .sos import (
    DiagonalK,
    FaceConfig,
    GroundSector,
    Region,
    SosBoundaryParams,
    boundary_crossing_residual,
    boundary_unitarity_residual,
    face_crossing_residual,
    face_unitarity_residual,
    ground_state_sector,
    k_diagonal,
    reflection_residual,
    star_triangle_residual,
    w_face,
)
from .face_vertex import (
    BoundaryParams,
    IKParams,
    VertexK,
    boundary_ybe_residual,
    diagonal_specialization,
    fv_rw_residual,
    ik_correspondence,
    intertwiner,
    kbracket,
    vec_relations_residual,
    vertex_k_from_face,
)
from .correlation import (
    BoundaryData,
    ContourSpec,
    MagnetizationResult,
    NoSeparatingCircle,
    OpeFactors,
    build_contour,
    closed_form_difference,
    closed_form_free_fermion_point,
    diagonal_boundary_data,
    integrand_general,
    magnetization_at_unit_xi,
    magnetization_diagonal,
    magnetization_difference,
    magnetization_general,
    ope_factors,
    vev_essential,
    xxz_limit_difference,
)
from .fock import FockConfig, ModeData, gaussian_vev, mode_data
from .ed import (
    HamiltonianParams,
    boundary_fields,
    compare_with_formula,
    couplings_from_params,
    ground_state_sz1,
)

__version__ = "0.1.0"
