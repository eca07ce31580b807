#![forbid(unsafe_code)]

//! Constructive elementary factorization of special-linear matrices over
//! scalar and function rings.
//!
//! The crate factors SL(n) matrices into products of transvections e(i,j;r):
//! near-identity matrices via a bound-cascade elimination, general scalar
//! matrices via pivoted elimination, and matrix-valued functions patchwise
//! with function coefficients. On top of that it lifts continuous
//! factorizations of smooth matrices into the smooth class, and turns
//! homotopies between matrix functions into explicit certificates
//! B = A · Π G_i that are re-verified pointwise on the grid.
//!
//! Scalars come in two backends — exact rationals and binary floats — and
//! functions in two classes: grid-sampled (continuous) and polynomial
//! (smooth). All pointwise bounds are checked on grid points; that is the
//! declared semantics throughout.

pub mod elementary;
pub mod error;
pub mod gauss;
pub mod homotopy;
pub mod lifting;
pub mod near_identity;
pub mod poly;
pub mod ring;
pub mod scalar;

pub use elementary::{
    elem_matrix, factor_c, factor_m, max_norm, ElementaryFactor, FactorList, SLMatrix,
};
pub use error::{Error, Result};
pub use gauss::{
    build_patch_cover, factor_patch, factor_patch_with_sequence, factor_pointwise, GaussOptions,
    PatchFactorization,
};
pub use homotopy::{
    clamp_coefficients, commutator_step, contractible_factorization, glue_patch,
    homotopy_certificate, retraction, slice_cover, CertOptions, Certificate, CertificateStats,
    ContractibleOutcome, HomotopyMatrix, SlicedCover, SlicedPatch, TimeGrid,
};
pub use lifting::{
    make_budget, smooth_lift, smooth_representative, ApproxBudget, LiftOptions, LiftOutcome,
    RepresentativeOutcome,
};
pub use near_identity::{
    factor_count_bound, factor_near_identity, EliminationTrace, NearIdentityInput,
};
pub use poly::MultiPoly;
pub use ring::{
    approximate_smooth, separating_function, shrink_cover, sup_norm, Axis, Domain, GridSubset,
    PositiveFunction, RingElement,
};
pub use scalar::Coeff;

/// Default tolerance for factorization reconstruction residuals.
pub const DEFAULT_TOL_RECON: f64 = 1e-9;
/// Default tolerance for determinant-one checks on float backends.
pub const DEFAULT_TOL_DET: f64 = 1e-9;
/// Default tolerance for certificate verification.
pub const DEFAULT_TOL_CERT: f64 = 1e-9;
/// Default pivot floor for patchwise elimination.
pub const DEFAULT_PIVOT_FLOOR: f64 = 1e-3;
/// Default cap on fitted polynomial degree.
pub const DEFAULT_MAX_DEGREE: u32 = 64;
/// Default resolution of the time axis for homotopies.
pub const DEFAULT_T_RES: usize = 64;
/// Default relative margin applied when building approximation budgets.
pub const DEFAULT_BUDGET_MARGIN: (i64, i64) = (1, 1_000_000);
