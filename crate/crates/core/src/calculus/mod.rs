//! Gamma-calculus on the models `E`, `S` and the monomial sphere.
//!
//! Test functions are expression trees differentiated to third order by
//! [`Jet3`]; the operators are assembled from those jets, never from finite
//! differences.

pub mod battery;
pub mod checks;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod models;

pub use battery::{
    cd_defect_battery, hessian_bound_battery, ibp_s_battery, ibp_sphere_battery,
    integrated_cd_battery, random_positive_even_function, warped_identity_battery, Extremes,
    HessianSummary, IntegratedCdSummary,
};
pub use checks::{
    cd_sphere_defect, hessian_w_bound_residual, ibp_residual_s, ibp_residual_sphere,
    integrated_cd_defect, warped_identity_residual, warped_terms, zeta_k, zeta_k_support, Defect,
    HessianBound, IbpResidual, IntegratedCd, WarpedTerms, YSupport,
};
pub use expr::{random_polynomial, random_trig_polynomial, smooth_step_derivs, Expr};
pub use geometry::DiagonalGeometry;
pub use jet::{Jet3, MAX_DIM};
pub use models::{r_of_y, y_of_r, ModelE, ModelS, MonomialSphere, Pole, SpherePoint};
