"""Classical dynamical r-matrices on self-dual Lie algebras, their Dirac reduction and affine/elliptic versions."""

from .affine import (
    AffineElement,
    AffineKappa,
    AffineRMatrix,
    TwistedGrading,
    affine_bracket,
    affine_form,
    affine_R_block,
    ad_kappa_block,
    build_twisted_grading,
    domain_check,
    grading_from_catalog,
    verify_prop2,
)
from .catalog import catalog, e_selfdual, kappa0, oscillator, sl
from .cdybe import (
    VerificationReport,
    cdyb,
    cdyb_constancy_report,
    check_equivariance,
    check_operator_cdybe,
    proposition1_suite,
)
from .drmatrix import (
    RMatrixField,
    c_matrix,
    canonical_r,
    dirac_D,
    dirac_D_field,
    rational_cartan,
    reduce,
    reduced_canonical,
    trig_cartan,
    zero_field,
)
from .elliptic import EllipticRParams, ThetaParams, chi, elliptic_R, loop_consistency, theta1, theta1_prime0
from .funcalc import F_func, f_func, holo_apply, holo_frechet
from .lie import Chain, LieAlgebra, bracket, build_algebra, make_chain, validate

__all__ = [name for name in dir() if not name.startswith("_")]
