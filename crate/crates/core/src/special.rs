//! Gamma-function evaluation and the closed-form constants `Z` and `C_opt`.
//!
//! Every constant is assembled in the log domain: `Z` is a ratio of Gamma
//! values that individually overflow long before the ratio does.

use serde::{Deserialize, Serialize};

use crate::error::{CknError, Result};
use crate::params::{CknParams, DerivedParams, MonomialWeight};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const HALF_LN_PI: f64 = 0.572_364_942_924_700_1;

/// Below this the argument is shifted upward before the asymptotic series.
const STIRLING_MIN: f64 = 10.0;

// B_{2k} / (2k (2k-1)) for k = 1..8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// `ln Gamma(x)` for `x > 0`.
///
/// Stirling's series with eight Bernoulli terms for `x >= 10`; smaller
/// arguments are lifted with `Gamma(x + N) = x (x+1) ... (x+N-1) Gamma(x)`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(CknError::Domain(format!("log_gamma needs x > 0, got {x}")));
    }
    let mut shifted = x;
    let mut prod = 1.0;
    while shifted < STIRLING_MIN {
        prod *= shifted;
        shifted += 1.0;
    }
    Ok(stirling(shifted) - prod.ln())
}

fn stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv_sq = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in STIRLING {
        series += c * pow;
        pow *= inv_sq;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

/// `Gamma(x)` for `x > 0`, through [`log_gamma`].
pub fn gamma(x: f64) -> Result<f64> {
    log_gamma(x).map(f64::exp)
}

/// `ln B(x, y)` for positive arguments.
pub fn log_beta(x: f64, y: f64) -> Result<f64> {
    Ok(log_gamma(x)? + log_gamma(y)? - log_gamma(x + y)?)
}

fn log_sphere_weight_area(weight: &MonomialWeight) -> Result<f64> {
    let big_d = weight.monomial_dim();
    let mut acc = big_d.ln() - weight.k() as f64 * std::f64::consts::LN_2;
    for &a in weight.exponents() {
        acc += log_gamma(0.5 * (a + 1.0))?;
    }
    Ok(acc - log_gamma(1.0 + 0.5 * big_d)?)
}

/// Weighted area `int_{S^{d-1}_*} theta^A dH^{d-1}`
/// `= D prod Gamma((A_i+1)/2) / (2^k Gamma(1 + D/2))`.
pub fn sphere_weight_area(weight: &MonomialWeight) -> Result<f64> {
    log_sphere_weight_area(weight).map(f64::exp)
}

fn log_cosh_profile_integral(alpha: f64, n: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(CknError::Domain(format!(
            "alpha = {alpha} must be positive"
        )));
    }
    if !(n > 0.0) {
        return Err(CknError::Domain(format!("n = {n} must be positive")));
    }
    Ok(HALF_LN_PI - alpha.ln() + log_gamma(0.5 * n)? - log_gamma(0.5 * (n + 1.0))?)
}

/// `int_R cosh(alpha u)^{-n} du = (sqrt(pi)/alpha) Gamma(n/2) / Gamma((n+1)/2)`.
pub fn cosh_profile_integral(alpha: f64, n: f64) -> Result<f64> {
    log_cosh_profile_integral(alpha, n).map(f64::exp)
}

/// `ln Z`, the log of the total mass of the compactified model.
pub fn log_z_constant(params: &CknParams, dp: &DerivedParams) -> Result<f64> {
    Ok(log_sphere_weight_area(&params.weight)? + log_cosh_profile_integral(dp.alpha, dp.n)?)
}

/// Total mass `Z` of the compactified model: the weighted sphere area times
/// the radial profile integral.
pub fn z_constant(params: &CknParams, dp: &DerivedParams) -> Result<f64> {
    log_z_constant(params, dp).map(f64::exp)
}

/// Value of `C_opt = 4 / (alpha^2 n (n-2) Z^{2/n})` together with whether the
/// Felli-Schneider condition makes it the proved optimal constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalConstant {
    pub value: f64,
    pub proved_sharp: bool,
}

pub fn optimal_constant(params: &CknParams, dp: &DerivedParams) -> Result<OptimalConstant> {
    let log_z = log_z_constant(params, dp)?;
    let log_c =
        4f64.ln() - 2.0 * dp.alpha.ln() - dp.n.ln() - (dp.n - 2.0).ln() - 2.0 / dp.n * log_z;
    Ok(OptimalConstant {
        value: log_c.exp(),
        proved_sharp: dp.regime.constant_is_sharp(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormConstants {
    pub sphere_area: f64,
    pub profile_integral: f64,
    pub z: f64,
    pub c_opt: f64,
    pub c_opt_proved_sharp: bool,
}

pub fn closed_form_constants(
    params: &CknParams,
    dp: &DerivedParams,
) -> Result<ClosedFormConstants> {
    let c = optimal_constant(params, dp)?;
    Ok(ClosedFormConstants {
        sphere_area: sphere_weight_area(&params.weight)?,
        profile_integral: cosh_profile_integral(dp.alpha, dp.n)?,
        z: z_constant(params, dp)?,
        c_opt: c.value,
        c_opt_proved_sharp: c.proved_sharp,
    })
}
