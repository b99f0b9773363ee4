"""Numerical and exact-combinatorial toolkit for the F-functional calculus
on the S-spectrum, over Clifford algebras and commuting operator tuples."""

from .algebra import (
    CliffordNumber,
    Paravector,
    SlicePoint,
    SliceUnit,
    blade_product,
    cn_mul,
    pv_conjugate,
    pv_modulus,
    slice_embed,
    slice_extract,
)
from .errors import (
    BadSpec,
    CliffFcalcError,
    DivergentRegion,
    EvenDimension,
    HParityMismatch,
    NotInSlice,
    NotVectorOperator,
    OddDimension,
    OutOfRange,
    PointOutsideContour,
    SameSphere,
    SpectralPoint,
    SpectrumNotEnclosed,
    SpectrumOnContour,
)
from .exact import (
    appendix_identity_check,
    gamma_constant,
    gamma_series_coherence,
    k_coeff_exact,
    laplacian_diagonal_constant,
    pochhammer,
    sce_exponent,
)
from .operators import (
    CliffordOperator,
    CommutingTuple,
    SliceComplexOperator,
    SpectralSphere,
    cm_mul,
    cm_norm,
    joint_spectrum,
    make_commuting_tuple,
    spectral_distance,
)
from .resolvents import (
    f_kernel_left,
    f_kernel_right,
    f_kernel_series_left,
    f_kernel_series_terms,
    f_resolvent_left,
    f_resolvent_right,
    f_resolvent_series_left,
    gamma,
    laplacian_power_monomial,
    lr_f_resolvent_residual,
    pseudo_resolvent,
    s_kernel_left,
    s_kernel_right,
    s_resolvent_left,
    s_resolvent_right,
)
from .equations import (
    EQUATION_TOLERANCES,
    EquationId,
    EquationTerm,
    ResidualReport,
    applicable_equations,
    equation_lhs_terms,
    equation_rhs,
    evaluate_equation,
    f_eq_general_residual,
    f_eq_n3_residual,
    f_eq_n5_full_residual,
    f_eq_n5_pseudo_residual,
    f_eq_n7_full_residual,
    f_eq_n7_pseudo_residual,
    pseudo_f_eq_h_even_residual,
    pseudo_f_eq_h_odd_residual,
    s_resolvent_eq_residual,
    sample_admissible_pair,
)
from .calculus import (
    Annulus,
    Contour,
    IntrinsicSliceFunction,
    ProjectorResult,
    cauchy_vanishing_check,
    contour_integrate_left,
    contour_integrate_right,
    f_functional_calculus,
    laplacian_power_operator,
    moment_vanishing_check,
    res2_identity_check,
    riesz_projector,
    s_functional_calculus,
    spectral_clearance,
)

__version__ = "0.1.0"
