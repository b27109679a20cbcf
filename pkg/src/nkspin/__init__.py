"""Numerical certification of spinor calculus on the 3-sphere and the
Lagrangian geometry of the nearly Kahler product of two 3-spheres."""

from .errors import (BranchError, ConfigurationError, ConsistencyError,
                     DegeneracyError, DomainError, GeometryError)
from .quat import (EI, EJ, EK, IM_BASIS, ONE, ZERO_IM, ImQuat, Quat, UnitQuat,
                   bracket, conjugation_matrix, cross, dot, exp_im, log_unit,
                   rotation_to_unit_quat)
from .sampling import (DEFAULT_FD_STEP, MCEstimate, SampleSet, mc_integrate,
                       parallel_map, point_at, uniform_s3)
from .s3calc import (OrthoFrame, ScalarFieldS3, TangentS3, TwoFormS3,
                     VectorFieldS3, covariant_derivative, det_triple,
                     directional_derivative, divergence,
                     exterior_derivative_dual, flow_orbit, gradient,
                     hodge_contract, left_invariant, right_invariant)
from .spinor import (GKReport, SpinorField, VAlphaDecomposition,
                     b_inverse_spinor, clifford_action, conj_spinor,
                     const_spinor, decompose_valpha, frame_from_spinor,
                     gk_check, gk_endomorphism, identity_spinor,
                     inverse_spinor, m_matrix, max_deviation_up_to_global_sign,
                     random_poly_spinor, spinor_covariant_derivative,
                     spinor_from_frame, system_residuals, xi_field)
from .nkgeom import (KAPPA, ComponentGroup, Family, Gamma1, Gamma2, Gamma3,
                     Gamma4, GeometryFit, GramReport, GraphInverse, LFamily,
                     ProductPoint, ProductTangent, admissible_round_radius,
                     component_invariant, family_point, family_tangent,
                     fit_geometry, induced_gram, lagrangian_residual, nk_J,
                     nk_metric, nk_omega, volume_ratio)

__version__ = "0.1.0"
